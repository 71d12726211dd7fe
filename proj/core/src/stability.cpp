#include "hetroute/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetroute/errors.hpp"
#include "hetroute/parallel.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

const char* stability_name(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable: return "stable";
    case StabilityClass::Unstable: return "unstable";
    case StabilityClass::Marginal: return "marginal";
  }
  return "?";
}

namespace {

// Softmax probabilities per population block, cost-shift stabilized.
std::vector<double> choice_probabilities(const RouteSet& routes,
                                         const std::vector<double>& costs, double eta) {
  std::vector<double> pi(costs.size());
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const int k = routes.count(p);
    double cmin = costs[static_cast<std::size_t>(base)];
    for (int r = 1; r < k; ++r)
      cmin = std::min(cmin, costs[static_cast<std::size_t>(base + r)]);
    double sum = 0.0;
    for (int r = 0; r < k; ++r) {
      const double w = std::exp(-(costs[static_cast<std::size_t>(base + r)] - cmin) / eta);
      pi[static_cast<std::size_t>(base + r)] = w;
      sum += w;
    }
    for (int r = 0; r < k; ++r) pi[static_cast<std::size_t>(base + r)] /= sum;
  }
  return pi;
}

// M^{pq}_{kj} = sum_e A^p_{ek} (tau^p_e)'(f_e) A^q_{ej}: sensitivity of the
// cost of route k (population p) to the flow on route j (population q).
Eigen::MatrixXd cost_sensitivity(const Game& game, const RouteSet& routes,
                                 const LinkFlow& f) {
  const int n = routes.total();
  const int n_links = routes.n_links();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);

  // per-population link derivative vectors, then route-by-route overlap
  for (int p = 0; p < routes.n_populations(); ++p) {
    const auto& delays = game.populations[static_cast<std::size_t>(p)].delays;
    std::vector<double> d(static_cast<std::size_t>(n_links));
    for (int e = 0; e < n_links; ++e)
      d[static_cast<std::size_t>(e)] =
          delays[static_cast<std::size_t>(e)].derivative(f[static_cast<std::size_t>(e)]);
    for (int k = 0; k < routes.count(p); ++k) {
      const int row = routes.offset(p) + k;
      for (int q = 0; q < routes.n_populations(); ++q) {
        for (int j = 0; j < routes.count(q); ++j) {
          double acc = 0.0;
          for (int e : routes.route(p, k))
            if (routes.on_route(q, j, e)) acc += d[static_cast<std::size_t>(e)];
          m(row, routes.offset(q) + j) = acc;
        }
      }
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXd jacobian_z(const Game& game, const RouteSet& routes,
                           const RouteFlow& z, double eta) {
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  const auto f = link_flow(routes, z);
  const auto costs = route_costs(game, routes, f);
  const auto pi = choice_probabilities(routes, costs, eta);
  const Eigen::MatrixXd m = cost_sensitivity(game, routes, f);

  const int n = routes.total();
  Eigen::MatrixXd jac(n, n);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const int k = routes.count(p);
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    // w_j = sum_s pi_s M_{sj} over this population's rows
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < k; ++s)
      w += pi[static_cast<std::size_t>(base + s)] * m.row(base + s).transpose();
    for (int i = 0; i < k; ++i) {
      const double scale = vp / eta * pi[static_cast<std::size_t>(base + i)];
      for (int col = 0; col < n; ++col)
        jac(base + i, col) = scale * (w(col) - m(base + i, col));
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(jac(i, j))) throw NumericalError("non-finite Jacobian entry");
  return jac;
}

Eigen::VectorXd jacobian_eta(const Game& game, const RouteSet& routes,
                             const RouteFlow& z, double eta) {
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  const auto costs = route_costs(game, routes, z);
  const auto pi = choice_probabilities(routes, costs, eta);

  Eigen::VectorXd out(routes.total());
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const int k = routes.count(p);
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    double mean_cost = 0.0;
    for (int s = 0; s < k; ++s)
      mean_cost += pi[static_cast<std::size_t>(base + s)] * costs[static_cast<std::size_t>(base + s)];
    for (int i = 0; i < k; ++i) {
      const double pii = pi[static_cast<std::size_t>(base + i)];
      out(base + i) =
          -vp / (eta * eta) * pii * (mean_cost - costs[static_cast<std::size_t>(base + i)]);
    }
    if (!out.segment(base, k).allFinite())
      throw NumericalError("non-finite dG/deta entry");
  }
  return out;
}

Eigen::MatrixXd tangent_restriction(const Eigen::MatrixXd& full, const RouteSet& routes) {
  const int reduced = routes.total() - routes.n_populations();
  Eigen::MatrixXd out(reduced, reduced);
  int row_out = 0;
  for (int p = 0; p < routes.n_populations(); ++p) {
    for (int i = 0; i < routes.count(p) - 1; ++i, ++row_out) {
      const int row = routes.offset(p) + i;
      int col_out = 0;
      for (int q = 0; q < routes.n_populations(); ++q) {
        const int last_q = routes.offset(q) + routes.count(q) - 1;
        for (int j = 0; j < routes.count(q) - 1; ++j, ++col_out) {
          out(row_out, col_out) = full(row, routes.offset(q) + j) - full(row, last_q);
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd tangent_coordinates(const Eigen::VectorXd& full, const RouteSet& routes) {
  Eigen::VectorXd out(routes.total() - routes.n_populations());
  int k = 0;
  for (int p = 0; p < routes.n_populations(); ++p)
    for (int i = 0; i < routes.count(p) - 1; ++i) out(k++) = full(routes.offset(p) + i);
  return out;
}

Eigen::VectorXd tangent_embed(const Eigen::VectorXd& reduced, const RouteSet& routes) {
  Eigen::VectorXd out(routes.total());
  int k = 0;
  for (int p = 0; p < routes.n_populations(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < routes.count(p) - 1; ++i) {
      out(routes.offset(p) + i) = reduced(k);
      sum += reduced(k);
      ++k;
    }
    out(routes.offset(p) + routes.count(p) - 1) = -sum;
  }
  return out;
}

Classification classify(const Game& game, const RouteSet& routes, const RouteFlow& z,
                        double eta) {
  const double residual = fixed_point_residual(game, routes, z, eta);
  if (residual > 1e-10)
    throw PreconditionError("classify requires a fixed point (residual " +
                            std::to_string(residual) + " > 1e-10)");

  Eigen::MatrixXd jg = jacobian_z(game, routes, z, eta);
  jg.diagonal().array() -= 1.0;

  Classification out;

  const Eigen::MatrixXd reduced = tangent_restriction(jg, routes);
  if (reduced.rows() > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(reduced);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed");
    for (int i = 0; i < reduced.rows(); ++i)
      out.tangent_eigenvalues.push_back(es.eigenvalues()(i));
  }
  {
    Eigen::EigenSolver<Eigen::MatrixXd> es(jg);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed");
    for (int i = 0; i < jg.rows(); ++i) out.full_eigenvalues.push_back(es.eigenvalues()(i));
  }

  auto by_real_then_imag = [](const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  };
  std::sort(out.tangent_eigenvalues.begin(), out.tangent_eigenvalues.end(), by_real_then_imag);
  std::sort(out.full_eigenvalues.begin(), out.full_eigenvalues.end(), by_real_then_imag);

  double max_real = -std::numeric_limits<double>::infinity();
  for (const auto& ev : out.tangent_eigenvalues) max_real = std::max(max_real, ev.real());
  if (out.tangent_eigenvalues.empty()) max_real = -1.0;  // single-route populations only
  out.max_real = max_real;

  constexpr double band = 1e-8;
  if (max_real < -band)
    out.stability = StabilityClass::Stable;
  else if (max_real > band)
    out.stability = StabilityClass::Unstable;
  else
    out.stability = StabilityClass::Marginal;
  return out;
}

double contraction_margin_at(const Game& game, const RouteSet& routes, const RouteFlow& z,
                             double eta) {
  Eigen::MatrixXd jg = jacobian_z(game, routes, z, eta);
  jg.diagonal().array() -= 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < jg.cols(); ++j) {
    double measure = jg(j, j);
    for (int i = 0; i < jg.rows(); ++i)
      if (i != j) measure += std::abs(jg(i, j));
    worst = std::max(worst, measure);
  }
  return -worst;
}

ContractionCertificate contraction_margin(const Game& game, const RouteSet& routes,
                                          double eta, std::span<const RouteFlow> sample,
                                          int jobs) {
  if (sample.empty()) throw ValidationError("contraction certificate needs a non-empty sample");
  std::vector<double> margins(sample.size());
  parallel_for(static_cast<long>(sample.size()), jobs, [&](long i) {
    margins[static_cast<std::size_t>(i)] =
        contraction_margin_at(game, routes, sample[static_cast<std::size_t>(i)], eta);
  });
  ContractionCertificate cert;
  cert.eta = eta;
  cert.sample_size = static_cast<int>(sample.size());
  std::size_t worst = 0;
  for (std::size_t i = 1; i < margins.size(); ++i)
    if (margins[i] < margins[worst]) worst = i;
  cert.margin = margins[worst];
  cert.valid = cert.margin > 0.0;
  cert.worst_point = sample[worst];
  return cert;
}

namespace {

std::vector<RouteFlow> default_sample(const Game& game, const RouteSet& routes,
                                      int n_dirichlet, std::uint64_t seed) {
  std::vector<RouteFlow> sample;
  const long n_vertices = vertex_profile_count(routes, 1024);
  for (long k = 0; k < n_vertices; ++k) sample.push_back(vertex_profile(game, routes, k));
  Rng rng(seed);
  for (int i = 0; i < n_dirichlet; ++i) sample.push_back(dirichlet_profile(game, routes, rng));
  return sample;
}

}  // namespace

ContractionCertificate contraction_margin(const Game& game, const RouteSet& routes,
                                          double eta, int n_dirichlet, std::uint64_t seed,
                                          int jobs) {
  const auto sample = default_sample(game, routes, n_dirichlet, seed);
  auto cert = contraction_margin(game, routes, eta, sample, jobs);
  cert.seed = seed;
  return cert;
}

ThresholdEstimate estimate_eta_threshold(const Game& game, const RouteSet& routes,
                                         const ThresholdOptions& opts) {
  if (!(opts.rel_tol > 0.0)) throw ValidationError("threshold tolerance must be positive");
  const auto sample = default_sample(game, routes, opts.n_dirichlet, opts.seed);
  auto margin = [&](double eta) {
    return contraction_margin(game, routes, eta, sample, opts.jobs).margin;
  };

  ThresholdEstimate est;
  est.bracket_lo = opts.bracket_lo;
  est.bracket_hi = opts.bracket_hi;

  const int n = std::max(2, opts.scan_points);
  std::vector<double> etas(static_cast<std::size_t>(n));
  std::vector<double> margins(static_cast<std::size_t>(n));
  const double llo = std::log(opts.bracket_lo), lhi = std::log(opts.bracket_hi);
  for (int i = 0; i < n; ++i) {
    etas[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
    margins[static_cast<std::size_t>(i)] = margin(etas[static_cast<std::size_t>(i)]);
  }
  est.valid_at_lo = margins.front() > 0.0;
  est.valid_at_hi = margins.back() > 0.0;

  for (int i = 0; i + 1 < n; ++i) {
    const bool lo_valid = margins[static_cast<std::size_t>(i)] > 0.0;
    const bool hi_valid = margins[static_cast<std::size_t>(i + 1)] > 0.0;
    if (lo_valid == hi_valid) continue;
    double lo = etas[static_cast<std::size_t>(i)], hi = etas[static_cast<std::size_t>(i + 1)];
    bool lo_sign = lo_valid;
    while (hi - lo > opts.rel_tol * hi) {
      const double mid = std::sqrt(lo * hi);
      if ((margin(mid) > 0.0) == lo_sign)
        lo = mid;
      else
        hi = mid;
    }
    est.crossings.push_back(0.5 * (lo + hi));
  }

  if (est.crossings.empty()) {
    est.one_sided = true;
    // contraction everywhere -> threshold at (or below) the lower end;
    // nowhere -> report the upper end as unresolved
    est.eta_hat = est.valid_at_lo ? opts.bracket_lo : opts.bracket_hi;
  } else {
    est.eta_hat = est.crossings.back();
  }
  return est;
}

ContractionCheck verify_contraction_inequality(const Game& game, const RouteSet& routes,
                                               double eta, int n_pairs, double horizon,
                                               const ContractionCertificate& certificate,
                                               std::uint64_t seed,
                                               const IntegrateOptions& opts) {
  if (!certificate.valid)
    throw PreconditionError("contraction inequality check needs a valid certificate");
  const double c = certificate.margin;

  ContractionCheck check;
  check.ok = true;
  Rng rng(seed);
  IntegrateOptions iopts = opts;
  iopts.stationarity_tol = 0.0;  // keep both trajectories on the same grid

  for (int pair = 0; pair < n_pairs; ++pair) {
    const RouteFlow x0 = dirichlet_profile(game, routes, rng);
    const RouteFlow y0 = dirichlet_profile(game, routes, rng);
    const double d0 = l1_distance(x0, y0);
    const Trajectory tx = integrate(game, routes, x0, eta, horizon, iopts);
    const Trajectory ty = integrate(game, routes, y0, eta, horizon, iopts);
    const std::size_t m = std::min(tx.states.size(), ty.states.size());
    for (std::size_t k = 0; k < m; ++k) {
      const double lhs = l1_distance(tx.states[k], ty.states[k]);
      const double bound = 1.01 * std::exp(-c * tx.times[k]) * d0;
      const double ratio = bound > 0.0 ? lhs / bound : (lhs > 0.0 ? 2.0 : 0.0);
      if (ratio > check.worst_ratio) {
        check.worst_ratio = ratio;
        check.worst_time = tx.times[k];
        check.worst_pair = pair;
      }
      if (lhs > bound) check.ok = false;
    }
  }
  return check;
}

}  // namespace hetroute
