#ifndef HETROUTE_CONTINUATION_HPP
#define HETROUTE_CONTINUATION_HPP

#include <string>
#include <vector>

#include "hetroute/equilibria.hpp"

namespace hetroute {

struct BranchPoint {
  double eta = 0.0;
  FixedPointRecord record;
};

/// One eta-indexed curve of fixed points, eta strictly decreasing.
struct Branch {
  int id = 0;
  std::string origin;          // seed description or parent event
  std::vector<BranchPoint> points;
  std::string termination;     // empty while alive / swept to the end

  double first_eta() const { return points.front().eta; }
  double last_eta() const { return points.back().eta; }
  bool alive_at(double eta) const;
  const BranchPoint* at(double eta) const;  // grid lookup, nullptr if absent
};

struct SweepOptions {
  int n_starts = 64;             // Dirichlet starts for newborn detection
  std::uint64_t seed = 0;
  double jump_cap_factor = 0.2;  // cap = factor * sum_p v_p
  double merge_radius = 1e-6;
  double child_perturbation = 1e-3;  // along the critical eigenvector
  FixedPointOptions fixed_point;
  int jobs = 1;
};

struct SweepResult {
  std::vector<Branch> branches;
  std::vector<double> grid;  // strictly decreasing
};

/// Log-spaced grid from eta_max down to eta_min, `points` entries.
std::vector<double> log_grid(double eta_max, double eta_min, int points);

/// Predictor-corrector continuation of every branch across the grid, with
/// per-grid-point multi-start detection of newborn branches and pitchfork
/// child seeding along critical eigenvectors. Seeds default to the fixed
/// points found at grid.front().
SweepResult sweep(const Game& game, const RouteSet& routes,
                  std::vector<double> grid, const SweepOptions& opts = {},
                  std::vector<RouteFlow> seeds = {});

enum class BifurcationType { StabilityChange, BranchBirth, FoldSuspect };
const char* bifurcation_name(BifurcationType t);

struct BifurcationEvent {
  double eta_lo = 0.0;
  double eta_hi = 0.0;
  BifurcationType type = BifurcationType::StabilityChange;
  std::vector<int> branch_ids;
};

/// Scans consecutive grid points for branch-count changes, stability
/// changes and eigenvalue sign crossings; coincident raw events merge into
/// one. Brackets are refined by bisection (re-solving fixed points inside)
/// down to `refine_width`.
std::vector<BifurcationEvent> detect_bifurcations(const Game& game,
                                                  const RouteSet& routes,
                                                  const SweepResult& sweep,
                                                  double refine_width = 1e-3,
                                                  const SweepOptions& opts = {});

struct LimitEquilibrium {
  int branch_id = 0;
  RouteFlow z;
  WardropReport wardrop;
  StabilityClass stability = StabilityClass::Marginal;
  bool unresolved = false;  // Wardrop gap above tol at eta_min
};

/// Terminal points of branches that survived down to eta_min, with their
/// Wardrop reports (the numerical surrogate of the vanishing-noise limit
/// set).
std::vector<LimitEquilibrium> limit_equilibria(const Game& game,
                                               const RouteSet& routes,
                                               const SweepResult& sweep,
                                               double eta_min = 0.005,
                                               double tol = 1e-3);

/// Diagram coordinate: one link-flow or route-flow component.
struct Coordinate {
  enum class Kind { LinkFlow, RouteFlow };
  Kind kind = Kind::LinkFlow;
  int link = -1;
  int pop = -1;
  int route = -1;
  std::string name;
};

/// Parses "f:<link id>" or "z:<pop id>:<route index>". Throws
/// ValidationError on unknown coordinates.
Coordinate parse_coordinate(const Game& game, const RouteSet& routes,
                            const std::string& selector);

struct DiagramRow {
  double eta = 0.0;
  int branch = 0;
  StabilityClass stability = StabilityClass::Marginal;
  double value = 0.0;
};

/// Long-format table (eta, branch, stability, value) of the selected
/// coordinate along every branch.
std::vector<DiagramRow> bifurcation_diagram(const Game& game, const RouteSet& routes,
                                            const SweepResult& sweep,
                                            const Coordinate& coord);

}  // namespace hetroute

#endif
