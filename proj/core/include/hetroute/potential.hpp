#ifndef HETROUTE_POTENTIAL_HPP
#define HETROUTE_POTENTIAL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hetroute/dynamics.hpp"

namespace hetroute {

/// Result of the delay-derivative symmetry test across population and
/// route pairs. `worst_*` identify the offending (p, q, i, j) tuple.
struct SymmetryReport {
  bool symmetric = false;
  double worst_violation = 0.0;
  int worst_pop_p = -1;
  int worst_pop_q = -1;
  int worst_route_i = -1;
  int worst_route_j = -1;
};

/// Compares sums of delay derivatives over shared links for every pair of
/// routes across populations at each sampled flow. Empty intersections are
/// trivially symmetric. For affine/linear delays the derivatives are
/// constant and one sample suffices.
SymmetryReport check_symmetry(const Game& game, const RouteSet& routes,
                              std::span<const RouteFlow> samples);
SymmetryReport check_symmetry(const Game& game, const RouteSet& routes,
                              int n_samples = 64, std::uint64_t seed = 0);

struct PotentialValue {
  double value = 0.0;      // V = beckmann + toll_term
  double beckmann = 0.0;   // link integrals of the base delays
  double toll_term = 0.0;  // sum_p sum_e alpha_p omega_e (A^p z^p)_e
  double entropy = 0.0;    // sum_p sum_i z_i log(z_i / v_p), <= 0
  double perturbed = 0.0;  // V_eta = V + eta * entropy
};

/// Convex potential of a toll-sensitivity game: Beckmann link integrals of
/// the base delays plus the linear toll term. Exact closed form.
PotentialValue toll_potential(const TollGameSpec& spec, const RouteSet& routes,
                              const RouteFlow& z);

/// V_eta = V + eta * entropy with 0 log 0 = 0 at the boundary; per
/// population the entropy weights flows against the throughput v_p.
PotentialValue perturbed_potential(const Game& game, const TollGameSpec& spec,
                                   const RouteSet& routes, const RouteFlow& z,
                                   double eta);

/// Gradient of V_eta in the flat layout: c^p_i + eta (log(z_i/v_p) + 1).
std::vector<double> perturbed_potential_gradient(const Game& game, const TollGameSpec& spec,
                                                 const RouteSet& routes, const RouteFlow& z,
                                                 double eta);

struct LyapunovReport {
  bool non_increasing = false;
  double max_increase = 0.0;  // worst positive step of V_eta, 0 if none
  double at_time = 0.0;
  double slack = 1e-7;        // allowed per-step discretization increase
};

/// Evaluates V_eta along a trajectory of the expanded game and checks
/// monotone decrease up to the per-step slack. When no toll spec is given,
/// one is derived from the game if its delays are population-independent;
/// otherwise the symmetry check runs and a PreconditionError reports the
/// missing potential structure.
LyapunovReport lyapunov_monitor(const Game& game, const std::optional<TollGameSpec>& spec,
                                const RouteSet& routes, const Trajectory& trajectory,
                                double eta, double slack = 1e-7);

struct MinimizeOptions {
  long max_iterations = 500000;
  double stationarity_tol = 1e-12;  // l1 norm of z - Proj(z - grad)
  double initial_step = 1.0;
};

/// Minimizes V_eta over the product of simplices by projected gradient
/// descent with backtracking. Independent of the logit fixed-point solver;
/// in potential games the minimizer coincides with the unique fixed point
/// of the dynamics.
RouteFlow minimize_perturbed_potential(const Game& game, const TollGameSpec& spec,
                                       const RouteSet& routes, double eta,
                                       const MinimizeOptions& opts = {});

}  // namespace hetroute

#endif
