#include "hetroute/equilibria.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetroute/errors.hpp"
#include "hetroute/parallel.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

WardropReport check_wardrop(const Game& game, const RouteSet& routes, const RouteFlow& z,
                            double tol) {
  require_admissible(game, routes, z);
  if (!(tol > 0.0)) throw ValidationError("Wardrop tolerance must be positive");
  const auto costs = route_costs(game, routes, z);

  WardropReport report;
  report.tolerance = tol;
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    const double support = 1e-10 * vp;
    double min_cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < routes.count(p); ++r)
      min_cost = std::min(min_cost, costs[static_cast<std::size_t>(base + r)]);
    double gap = 0.0;
    int gap_route = -1;
    for (int r = 0; r < routes.count(p); ++r) {
      if (z.z[static_cast<std::size_t>(base + r)] <= support) continue;
      const double excess = costs[static_cast<std::size_t>(base + r)] - min_cost;
      if (excess > gap) {
        gap = excess;
        gap_route = r;
      }
    }
    report.min_cost.push_back(min_cost);
    report.gap.push_back(gap);
    if (gap > report.worst_gap) {
      report.worst_gap = gap;
      report.worst_population = p;
      report.worst_route = gap_route;
    }
  }
  report.is_equilibrium = report.worst_gap <= tol;
  return report;
}

StrictReport check_strict(const Game& game, const RouteSet& routes, const RouteFlow& z,
                          double tol) {
  require_admissible(game, routes, z);
  const auto costs = route_costs(game, routes, z);

  StrictReport report;
  report.is_strict = true;
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    const double support = 1e-10 * vp;

    // the single carrying route, if any
    int carrier = -1;
    bool concentrated = true;
    for (int r = 0; r < routes.count(p); ++r) {
      const double zr = z.z[static_cast<std::size_t>(base + r)];
      if (std::abs(zr - vp) <= support) {
        if (carrier >= 0) concentrated = false;
        carrier = r;
      } else if (zr > support) {
        concentrated = false;
      }
    }
    if (vp == 0.0 || routes.count(p) == 1) {
      report.margins.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    if (!concentrated || carrier < 0) {
      report.margins.push_back(0.0);
      report.is_strict = false;
      continue;
    }
    double margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < routes.count(p); ++s) {
      if (s == carrier) continue;
      margin = std::min(margin, costs[static_cast<std::size_t>(base + s)] -
                                    costs[static_cast<std::size_t>(base + carrier)]);
    }
    report.margins.push_back(margin);
    if (!(margin > tol)) report.is_strict = false;
  }
  return report;
}

namespace {

// Newton polish of g(z) = G(z) - z in tangent coordinates. Returns the
// best admissible iterate seen (by l1 residual).
RouteFlow newton_polish(const Game& game, const RouteSet& routes, double eta,
                        RouteFlow z, int max_iterations, double tolerance) {
  const int n = routes.total();
  RouteFlow best = z;
  double best_residual = fixed_point_residual(game, routes, z, eta);

  for (int it = 0; it < max_iterations && best_residual > tolerance; ++it) {
    const RouteFlow gz = logit_map(game, routes, z, eta);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = gz.z[static_cast<std::size_t>(i)] - z.z[static_cast<std::size_t>(i)];

    Eigen::MatrixXd jg = jacobian_z(game, routes, z, eta);
    jg.diagonal().array() -= 1.0;
    const Eigen::MatrixXd reduced = tangent_restriction(jg, routes);
    const Eigen::VectorXd rhs = -tangent_coordinates(g, routes);
    if (reduced.rows() == 0) break;  // all populations single-route

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(reduced);
    Eigen::VectorXd dy = lu.solve(rhs);
    if (!dy.allFinite()) break;  // singular system, keep the Picard result

    const Eigen::VectorXd dz = tangent_embed(dy, routes);
    double step = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 8; ++bt, step *= 0.5) {
      RouteFlow trial = z;
      for (int i = 0; i < n; ++i) trial.z[static_cast<std::size_t>(i)] += step * dz(i);
      bool negative = false;
      for (double v : trial.z)
        if (v < -1e-9) negative = true;
      if (negative) continue;
      for (auto& v : trial.z)
        if (v < 0.0) v = 0.0;
      project_to_simplex(game, routes, trial);
      const double residual = fixed_point_residual(game, routes, trial, eta);
      if (residual < best_residual) {
        best = trial;
        best_residual = residual;
        z = std::move(trial);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

FixedPointOutcome find_fixed_point(const Game& game, const RouteSet& routes, double eta,
                                   RouteFlow z0, const FixedPointOptions& opts) {
  require_admissible(game, routes, z0);
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw ValidationError("Picard damping must lie in (0, 1]");

  FixedPointOutcome outcome;
  RouteFlow z = std::move(z0);
  RouteFlow best = z;
  double current_residual = fixed_point_residual(game, routes, z, eta);

  if (current_residual <= opts.newton_first_threshold) {
    RouteFlow local = newton_polish(game, routes, eta, z, opts.newton_iterations, opts.tolerance);
    const double local_residual = fixed_point_residual(game, routes, local, eta);
    if (local_residual <= opts.tolerance && is_admissible(game, routes, local)) {
      FixedPointRecord record;
      record.z = std::move(local);
      record.eta = eta;
      record.residual = local_residual;
      if (opts.classify_result) {
        const Classification cls = classify(game, routes, record.z, eta);
        record.eigenvalues = cls.full_eigenvalues;
        record.stability = cls.stability;
        record.max_tangent_real = cls.max_real;
      }
      outcome.best_residual = local_residual;
      outcome.record = std::move(record);
      return outcome;
    }
  }

  double best_residual = current_residual;
  double window_best = best_residual;
  long it = 0;

  for (; it < opts.max_iterations && current_residual > opts.tolerance; ++it) {
    const RouteFlow g = logit_map(game, routes, z, eta);
    current_residual = 0.0;
    for (std::size_t i = 0; i < z.z.size(); ++i) {
      current_residual += std::abs(g.z[i] - z.z[i]);
      z.z[i] = (1.0 - opts.damping) * z.z[i] + opts.damping * g.z[i];
    }
    if (current_residual < best_residual) {
      best_residual = current_residual;
      best = z;
    }
    if (opts.stall_window > 0 && (it + 1) % opts.stall_window == 0) {
      if (best_residual > 0.99 * window_best) break;  // cycling, hand to Newton
      window_best = best_residual;
    }
  }
  outcome.iterations = it;

  // Polish the Picard endpoint (it tracks the flow, e.g. away from saddles
  // toward newborn branches); fall back to the lowest-residual iterate,
  // which recovers unstable fixed points from nearly-invariant starts.
  RouteFlow polished =
      newton_polish(game, routes, eta, z, opts.newton_iterations, opts.tolerance);
  double polished_residual = fixed_point_residual(game, routes, polished, eta);
  if (polished_residual > opts.tolerance && l1_distance(best, z) > 0.0) {
    RouteFlow alt =
        newton_polish(game, routes, eta, best, opts.newton_iterations, opts.tolerance);
    const double alt_residual = fixed_point_residual(game, routes, alt, eta);
    if (alt_residual < polished_residual) {
      polished = std::move(alt);
      polished_residual = alt_residual;
    }
  }
  best = std::move(polished);
  best_residual = polished_residual;
  outcome.best_residual = best_residual;

  if (best_residual > opts.tolerance || !is_admissible(game, routes, best)) return outcome;

  FixedPointRecord record;
  record.z = std::move(best);
  record.eta = eta;
  record.residual = best_residual;
  if (opts.classify_result) {
    const Classification cls = classify(game, routes, record.z, eta);
    record.eigenvalues = cls.full_eigenvalues;
    record.stability = cls.stability;
    record.max_tangent_real = cls.max_real;
  }
  outcome.record = std::move(record);
  return outcome;
}

FixedPointSearch find_all_fixed_points(const Game& game, const RouteSet& routes, double eta,
                                       int n_starts, std::uint64_t seed,
                                       const FixedPointOptions& opts, int jobs) {
  if (n_starts < 0) throw ValidationError("number of starts must be >= 0");

  std::vector<RouteFlow> starts;
  const long n_vertices = vertex_profile_count(routes, 1024);
  for (long k = 0; k < n_vertices; ++k) starts.push_back(vertex_profile(game, routes, k));
  starts.push_back(uniform_profile(game, routes));
  {
    Rng rng(seed);
    for (int i = 0; i < n_starts; ++i) starts.push_back(dirichlet_profile(game, routes, rng));
  }

  std::vector<FixedPointOutcome> outcomes(starts.size());
  parallel_for(static_cast<long>(starts.size()), jobs, [&](long i) {
    outcomes[static_cast<std::size_t>(i)] =
        find_fixed_point(game, routes, eta, starts[static_cast<std::size_t>(i)], opts);
  });

  FixedPointSearch search;
  std::vector<FixedPointRecord> found;
  for (auto& o : outcomes) {
    if (o.record)
      found.push_back(std::move(*o.record));
    else
      ++search.failures;
  }
  std::sort(found.begin(), found.end(), [](const FixedPointRecord& a, const FixedPointRecord& b) {
    return lexicographic_less(a.z, b.z);
  });
  for (auto& rec : found) {
    bool duplicate = false;
    for (const auto& kept : search.records) {
      if (l1_distance(rec.z, kept.z) <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) search.records.push_back(std::move(rec));
  }
  return search;
}

std::vector<StrictEquilibrium> enumerate_strict_candidates(const Game& game,
                                                           const RouteSet& routes,
                                                           double tol) {
  long combos = 1;
  for (int p = 0; p < routes.n_populations(); ++p) {
    combos *= routes.count(p);
    if (combos > 1024)
      throw ValidationError("vertex profile count exceeds the enumeration cap of 1024");
  }
  std::vector<StrictEquilibrium> out;
  for (long k = 0; k < combos; ++k) {
    RouteFlow z = vertex_profile(game, routes, k);
    StrictReport report = check_strict(game, routes, z, tol);
    if (report.is_strict) out.push_back({std::move(z), std::move(report.margins), k});
  }
  return out;
}

}  // namespace hetroute
