#include "hetroute/continuation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetroute/errors.hpp"
#include "hetroute/parallel.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

const char* bifurcation_name(BifurcationType t) {
  switch (t) {
    case BifurcationType::StabilityChange: return "stability-change";
    case BifurcationType::BranchBirth: return "branch-birth";
    case BifurcationType::FoldSuspect: return "fold-suspect";
  }
  return "?";
}

bool Branch::alive_at(double eta) const { return at(eta) != nullptr; }

const BranchPoint* Branch::at(double eta) const {
  for (const auto& pt : points) {
    if (pt.eta == eta) return &pt;
  }
  return nullptr;
}

std::vector<double> log_grid(double eta_max, double eta_min, int points) {
  if (!(eta_min > 0.0) || !(eta_max > eta_min))
    throw ValidationError("grid needs 0 < eta_min < eta_max");
  if (points < 2) throw ValidationError("grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lmax = std::log(eta_max), lmin = std::log(eta_min);
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(lmax + (lmin - lmax) * static_cast<double>(i) / static_cast<double>(points - 1));
  grid.front() = eta_max;
  grid.back() = eta_min;
  return grid;
}

namespace {

// Tangent-space predictor z(eta + d) ~ z - d * J_g^{-1} dG/deta; falls back
// to the zero-order predictor when the solve degenerates (near events).
RouteFlow predict(const Game& game, const RouteSet& routes, const RouteFlow& z,
                  double eta, double deta, double step_cap) {
  Eigen::MatrixXd jg = jacobian_z(game, routes, z, eta);
  jg.diagonal().array() -= 1.0;
  const Eigen::MatrixXd reduced = tangent_restriction(jg, routes);
  if (reduced.rows() == 0) return z;
  const Eigen::VectorXd rhs = -tangent_coordinates(jacobian_eta(game, routes, z, eta), routes);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(reduced);
  Eigen::VectorXd dy = lu.solve(rhs);
  if (!dy.allFinite()) return z;
  const Eigen::VectorXd dz = tangent_embed(dy, routes);
  double scale = deta;
  const double step = std::abs(deta) * dz.lpNorm<1>();
  if (step > step_cap) scale *= step_cap / step;  // trust region near folds/pitchforks
  RouteFlow out = z;
  for (int i = 0; i < routes.total(); ++i) out.z[static_cast<std::size_t>(i)] += scale * dz(i);
  project_to_simplex(game, routes, out);
  return out;
}

// Real part of the leading tangent eigenvector at a fixed point, embedded
// into the full layout with unit l1 norm. Used for pitchfork child seeds.
RouteFlow critical_direction(const Game& game, const RouteSet& routes, const RouteFlow& z,
                             double eta) {
  Eigen::MatrixXd jg = jacobian_z(game, routes, z, eta);
  jg.diagonal().array() -= 1.0;
  const Eigen::MatrixXd reduced = tangent_restriction(jg, routes);
  RouteFlow dir;
  dir.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  if (reduced.rows() == 0) return dir;
  Eigen::EigenSolver<Eigen::MatrixXd> es(reduced);
  if (es.info() != Eigen::Success) return dir;
  int lead = 0;
  for (int i = 1; i < reduced.rows(); ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(lead).real()) lead = i;
  Eigen::VectorXd y = es.eigenvectors().col(lead).real();
  const Eigen::VectorXd full = tangent_embed(y, routes);
  double norm = full.lpNorm<1>();
  if (norm <= 0.0) return dir;
  for (int i = 0; i < routes.total(); ++i)
    dir.z[static_cast<std::size_t>(i)] = full(i) / norm;
  return dir;
}

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

SweepResult sweep(const Game& game, const RouteSet& routes, std::vector<double> grid,
                  const SweepOptions& opts, std::vector<RouteFlow> seeds) {
  if (grid.size() < 2) throw ValidationError("sweep grid needs at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw ValidationError("sweep grid values must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw ValidationError("sweep grid must be strictly decreasing");
  }

  const double jump_cap = opts.jump_cap_factor * game.total_throughput();
  SweepResult result;
  result.grid = grid;

  // branches at the top of the grid
  std::vector<FixedPointRecord> initial;
  if (seeds.empty()) {
    initial = find_all_fixed_points(game, routes, grid[0], opts.n_starts, opts.seed,
                                    opts.fixed_point, opts.jobs)
                  .records;
  } else {
    for (auto& s : seeds) {
      auto outcome = find_fixed_point(game, routes, grid[0], std::move(s), opts.fixed_point);
      if (outcome.record) initial.push_back(std::move(*outcome.record));
    }
    std::sort(initial.begin(), initial.end(),
              [](const FixedPointRecord& a, const FixedPointRecord& b) {
                return lexicographic_less(a.z, b.z);
              });
    std::vector<FixedPointRecord> dedup;
    for (auto& rec : initial) {
      bool dup = false;
      for (const auto& kept : dedup)
        if (l1_distance(rec.z, kept.z) <= opts.merge_radius) dup = true;
      if (!dup) dedup.push_back(std::move(rec));
    }
    initial = std::move(dedup);
  }
  if (initial.empty())
    throw NumericalError("no fixed point found at the top of the sweep grid");
  for (auto& rec : initial) {
    Branch b;
    b.id = static_cast<int>(result.branches.size());
    b.origin = "multistart@eta=" + std::to_string(grid[0]);
    b.points.push_back({grid[0], std::move(rec)});
    result.branches.push_back(std::move(b));
  }

  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double eta_prev = grid[k - 1];
    const double eta = grid[k];

    // advance live branches (indexed writes keep this deterministic)
    std::vector<int> live;
    for (const auto& b : result.branches)
      if (b.termination.empty() && b.points.back().eta == eta_prev)
        live.push_back(b.id);

    std::vector<std::optional<FixedPointRecord>> advanced(live.size());
    std::vector<std::string> failure(live.size());
    FixedPointOptions corrector = opts.fixed_point;
    corrector.newton_first_threshold = std::numeric_limits<double>::infinity();
    parallel_for(static_cast<long>(live.size()), opts.jobs, [&](long li) {
      Branch& b = result.branches[static_cast<std::size_t>(live[static_cast<std::size_t>(li)])];
      const RouteFlow& tip = b.points.back().record.z;
      RouteFlow pred = predict(game, routes, tip, eta_prev, eta - eta_prev, 0.5 * jump_cap);
      auto outcome = find_fixed_point(game, routes, eta, pred, corrector);
      if (!outcome.record || l1_distance(outcome.record->z, tip) > jump_cap) {
        // zero-order retry
        auto retry = find_fixed_point(game, routes, eta, tip, corrector);
        if (retry.record && l1_distance(retry.record->z, tip) <= jump_cap) {
          outcome = std::move(retry);
        } else if (!outcome.record) {
          failure[static_cast<std::size_t>(li)] =
              "corrector diverged (best residual " + std::to_string(outcome.best_residual) + ")";
          return;
        } else if (l1_distance(outcome.record->z, tip) > jump_cap) {
          failure[static_cast<std::size_t>(li)] = "jump cap exceeded";
          return;
        }
      }
      advanced[static_cast<std::size_t>(li)] = std::move(outcome.record);
    });
    for (std::size_t li = 0; li < live.size(); ++li) {
      Branch& b = result.branches[static_cast<std::size_t>(live[li])];
      if (advanced[li])
        b.points.push_back({eta, std::move(*advanced[li])});
      else
        b.termination = failure[li] + " at eta=" + std::to_string(eta);
    }

    // two branches landing on one fixed point collapse into the older one
    for (std::size_t i = 0; i < result.branches.size(); ++i) {
      Branch& a = result.branches[i];
      if (!a.termination.empty() || !a.at(eta)) continue;
      for (std::size_t j = i + 1; j < result.branches.size(); ++j) {
        Branch& b = result.branches[j];
        if (!b.termination.empty() || !b.at(eta)) continue;
        if (l1_distance(a.at(eta)->record.z, b.at(eta)->record.z) <= opts.merge_radius) {
          b.points.pop_back();
          b.termination = "merged into branch " + std::to_string(a.id) + " at eta=" +
                          std::to_string(eta);
        }
      }
    }

    auto tips_at = [&](double at_eta) {
      std::vector<const RouteFlow*> tips;
      for (const auto& b : result.branches) {
        const BranchPoint* pt = b.at(at_eta);
        if (pt) tips.push_back(&pt->record.z);
      }
      return tips;
    };

    // pitchfork child seeding along the critical eigenvector (parent data is
    // copied out first: pushing children reallocates the branch vector)
    const std::size_t n_before_children = result.branches.size();
    for (std::size_t bi = 0; bi < n_before_children; ++bi) {
      int parent_id = -1;
      RouteFlow parent_z;
      {
        const Branch& b = result.branches[bi];
        if (!b.termination.empty()) continue;
        if (b.points.size() < 2 || b.points.back().eta != eta) continue;
        const auto& cur = b.points.back();
        const auto& prev = b.points[b.points.size() - 2];
        if (prev.eta != eta_prev || prev.record.stability == cur.record.stability) continue;
        parent_id = b.id;
        parent_z = cur.record.z;
      }
      const RouteFlow dir = critical_direction(game, routes, parent_z, eta);
      for (double s : {+1.0, -1.0}) {
        RouteFlow seed = parent_z;
        for (std::size_t i = 0; i < seed.z.size(); ++i)
          seed.z[i] += s * opts.child_perturbation * dir.z[i];
        project_to_simplex(game, routes, seed);
        auto outcome = find_fixed_point(game, routes, eta, seed, opts.fixed_point);
        if (!outcome.record) continue;
        bool distinct = true;
        for (const RouteFlow* tip : tips_at(eta))
          if (l1_distance(outcome.record->z, *tip) <= opts.merge_radius) distinct = false;
        if (!distinct) continue;
        Branch child;
        child.id = static_cast<int>(result.branches.size());
        child.origin = "pitchfork-child of branch " + std::to_string(parent_id) + "@eta=" +
                       std::to_string(eta);
        child.points.push_back({eta, std::move(*outcome.record)});
        result.branches.push_back(std::move(child));
      }
    }

    // newborn detection by multi-start
    auto fresh = find_all_fixed_points(game, routes, eta, opts.n_starts,
                                       Rng::derive(opts.seed, k), opts.fixed_point, opts.jobs);
    for (auto& rec : fresh.records) {
      bool distinct = true;
      for (const RouteFlow* tip : tips_at(eta))
        if (l1_distance(rec.z, *tip) <= opts.merge_radius) distinct = false;
      if (!distinct) continue;
      Branch born;
      born.id = static_cast<int>(result.branches.size());
      born.origin = "multistart@eta=" + std::to_string(eta);
      born.points.push_back({eta, std::move(rec)});
      result.branches.push_back(std::move(born));
    }
  }
  return result;
}

namespace {

struct RawEvent {
  std::size_t interval = 0;  // grid index k: event inside (grid[k], grid[k-1])
  bool count_increase = false;
  bool count_decrease = false;
  bool stability_change = false;
  std::vector<int> branch_ids;
};

// Bisect the eigenvalue sign crossing of one branch inside [lo, hi].
void refine_by_eigenvalue(const Game& game, const RouteSet& routes, const Branch& branch,
                          double& lo, double& hi, double width, const SweepOptions& opts) {
  const BranchPoint* top = branch.at(hi);
  const BranchPoint* bottom = branch.at(lo);
  if (!top || !bottom) return;
  FixedPointOptions corrector = opts.fixed_point;
  corrector.newton_first_threshold = std::numeric_limits<double>::infinity();
  const int sign_hi = sign_of(top->record.max_tangent_real);
  RouteFlow point_hi = top->record.z;
  RouteFlow point_lo = bottom->record.z;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    const RouteFlow& seed = (hi - mid) < (mid - lo) ? point_hi : point_lo;
    auto outcome = find_fixed_point(game, routes, mid, seed, corrector);
    if (!outcome.record) return;  // keep the current bracket
    if (sign_of(outcome.record->max_tangent_real) == sign_hi) {
      hi = mid;
      point_hi = outcome.record->z;
    } else {
      lo = mid;
      point_lo = outcome.record->z;
    }
  }
}

// Bisect on the number of distinct fixed points for pure births/deaths.
void refine_by_count(const Game& game, const RouteSet& routes, const SweepResult& sweep,
                     std::size_t count_hi, double& lo, double& hi, double width,
                     const SweepOptions& opts) {
  int guard = 0;
  while (hi - lo > width && guard++ < 60) {
    const double mid = 0.5 * (lo + hi);
    const auto found = find_all_fixed_points(game, routes, mid, opts.n_starts,
                                             Rng::derive(opts.seed, 0x5eed), opts.fixed_point,
                                             opts.jobs);
    if (found.records.size() == count_hi)
      hi = mid;
    else
      lo = mid;
  }
  (void)sweep;
}

}  // namespace

std::vector<BifurcationEvent> detect_bifurcations(const Game& game, const RouteSet& routes,
                                                  const SweepResult& sweep_result,
                                                  double refine_width,
                                                  const SweepOptions& opts) {
  const auto& grid = sweep_result.grid;
  std::vector<RawEvent> raw;

  for (std::size_t k = 1; k < grid.size(); ++k) {
    RawEvent ev;
    ev.interval = k;
    for (const auto& b : sweep_result.branches) {
      const BranchPoint* above = b.at(grid[k - 1]);
      const BranchPoint* below = b.at(grid[k]);
      if (!above && below) {
        ev.count_increase = true;  // branch born at grid[k]
        ev.branch_ids.push_back(b.id);
      } else if (above && !below) {
        if (b.termination.rfind("merged", 0) != 0) {  // merges are bookkeeping
          ev.count_decrease = true;  // branch died inside the interval
          ev.branch_ids.push_back(b.id);
        }
      } else if (above && below) {
        const bool class_change = above->record.stability != below->record.stability;
        const bool sign_change = sign_of(above->record.max_tangent_real) !=
                                 sign_of(below->record.max_tangent_real);
        if (class_change || sign_change) {
          ev.stability_change = true;
          ev.branch_ids.push_back(b.id);
        }
      }
    }
    if (ev.count_increase || ev.count_decrease || ev.stability_change) raw.push_back(ev);
  }

  std::vector<BifurcationEvent> events;
  for (const auto& ev : raw) {
    BifurcationEvent out;
    out.eta_lo = grid[ev.interval];
    out.eta_hi = grid[ev.interval - 1];
    out.branch_ids = ev.branch_ids;
    std::sort(out.branch_ids.begin(), out.branch_ids.end());
    out.branch_ids.erase(std::unique(out.branch_ids.begin(), out.branch_ids.end()),
                         out.branch_ids.end());
    if (ev.count_increase)
      out.type = BifurcationType::BranchBirth;
    else if (ev.count_decrease)
      out.type = BifurcationType::FoldSuspect;
    else
      out.type = BifurcationType::StabilityChange;

    if (ev.stability_change) {
      // refine through the branch whose eigenvalue crosses zero
      for (const auto& b : sweep_result.branches) {
        const BranchPoint* above = b.at(out.eta_hi);
        const BranchPoint* below = b.at(grid[ev.interval]);
        if (above && below &&
            sign_of(above->record.max_tangent_real) !=
                sign_of(below->record.max_tangent_real)) {
          refine_by_eigenvalue(game, routes, b, out.eta_lo, out.eta_hi, refine_width, opts);
          break;
        }
      }
    } else {
      std::size_t count_hi = 0;
      for (const auto& b : sweep_result.branches)
        if (b.at(out.eta_hi)) ++count_hi;
      refine_by_count(game, routes, sweep_result, count_hi, out.eta_lo, out.eta_hi,
                      refine_width, opts);
    }
    events.push_back(std::move(out));
  }
  return events;
}

std::vector<LimitEquilibrium> limit_equilibria(const Game& game, const RouteSet& routes,
                                               const SweepResult& sweep_result,
                                               double eta_min, double tol) {
  std::vector<LimitEquilibrium> out;
  for (const auto& b : sweep_result.branches) {
    if (b.points.empty()) continue;
    const BranchPoint& tip = b.points.back();
    if (tip.eta > eta_min * (1.0 + 1e-9)) continue;  // did not survive to the floor
    LimitEquilibrium lim;
    lim.branch_id = b.id;
    lim.z = tip.record.z;
    lim.stability = tip.record.stability;
    lim.wardrop = check_wardrop(game, routes, tip.record.z, tol);
    lim.unresolved = lim.wardrop.worst_gap > tol;
    out.push_back(std::move(lim));
  }
  return out;
}

Coordinate parse_coordinate(const Game& game, const RouteSet& routes,
                            const std::string& selector) {
  Coordinate coord;
  coord.name = selector;
  if (selector.rfind("f:", 0) == 0) {
    const std::string link_id = selector.substr(2);
    const int e = game.network.link_index(link_id);
    if (e < 0) throw ValidationError("unknown link '" + link_id + "' in coordinate selector");
    coord.kind = Coordinate::Kind::LinkFlow;
    coord.link = e;
    return coord;
  }
  if (selector.rfind("z:", 0) == 0) {
    const std::string rest = selector.substr(2);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw ValidationError("route-flow selector must look like z:<pop>:<route index>");
    const std::string pop_id = rest.substr(0, colon);
    int pop = -1;
    for (int p = 0; p < game.n_populations(); ++p)
      if (game.populations[static_cast<std::size_t>(p)].id == pop_id) pop = p;
    if (pop < 0) throw ValidationError("unknown population '" + pop_id + "' in coordinate selector");
    int r = -1;
    try {
      r = std::stoi(rest.substr(colon + 1));
    } catch (...) {
      throw ValidationError("route index in coordinate selector is not an integer");
    }
    if (r < 0 || r >= routes.count(pop))
      throw ValidationError("population '" + pop_id + "' has no route index " +
                            std::to_string(r));
    coord.kind = Coordinate::Kind::RouteFlow;
    coord.pop = pop;
    coord.route = r;
    return coord;
  }
  throw ValidationError("unknown coordinate selector '" + selector +
                        "' (expected f:<link> or z:<pop>:<route>)");
}

std::vector<DiagramRow> bifurcation_diagram(const Game& game, const RouteSet& routes,
                                            const SweepResult& sweep_result,
                                            const Coordinate& coord) {
  std::vector<DiagramRow> rows;
  for (const auto& b : sweep_result.branches) {
    for (const auto& pt : b.points) {
      DiagramRow row;
      row.eta = pt.eta;
      row.branch = b.id;
      row.stability = pt.record.stability;
      if (coord.kind == Coordinate::Kind::LinkFlow) {
        row.value = link_flow(routes, pt.record.z)[static_cast<std::size_t>(coord.link)];
      } else {
        row.value =
            pt.record.z.z[static_cast<std::size_t>(routes.offset(coord.pop) + coord.route)];
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace hetroute
