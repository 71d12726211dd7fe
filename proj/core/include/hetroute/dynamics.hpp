#ifndef HETROUTE_DYNAMICS_HPP
#define HETROUTE_DYNAMICS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetroute/flow.hpp"

namespace hetroute {

/// Scaled softmax weights v * exp(-c_i/eta) / sum_j exp(-c_j/eta),
/// computed with the per-block cost shift (subtract min cost) so that no
/// overflow occurs for eta down to 1e-12. Shift-invariant by construction.
void logit_weights(std::span<const double> costs, double eta, double v,
                   std::span<double> out);

/// Logit choice map G(z, eta). Output blocks sum to v_p (renormalized) and
/// are strictly positive wherever the exponentials do not underflow.
RouteFlow logit_map(const Game& game, const RouteSet& routes, const RouteFlow& z,
                    double eta);

/// Vector field of logit(eta): zdot = G(z,eta) - z. Per-population blocks
/// of the result sum to 0 (tangent to the simplex).
std::vector<double> logit_rhs(const Game& game, const RouteSet& routes,
                              const RouteFlow& z, double eta);

/// l1 residual ||G(z,eta) - z||_1.
double fixed_point_residual(const Game& game, const RouteSet& routes,
                            const RouteFlow& z, double eta);

struct Trajectory {
  std::vector<double> times;
  std::vector<RouteFlow> states;
  double eta = 0.0;
  std::string method = "rk4";
  double step = 0.0;
  bool converged = false;       // stationarity stop triggered
  double final_residual = 0.0;  // ||G - z||_1 at the final state

  // agent-simulation provenance (meanfield module)
  long seed = -1;
  std::vector<long> agents;
};

struct IntegrateOptions {
  double step = 0.01;
  bool adaptive = false;        // step-doubling control on top of RK4
  double adaptive_tol = 1e-8;   // per-step l1 error estimate target
  double min_step = 1e-12;
  double stationarity_tol = 1e-10;  // stop when ||zdot||_1 drops below
  int record_every = 1;
  double max_projection_drift = 1e-9;  // per-step clip+renormalize budget
};

/// Integrates logit(eta) from z0 over [0, horizon] with classic RK4,
/// projecting onto the simplex after every step. Stops early once
/// ||G(z)-z||_1 < stationarity_tol (converged flag). Throws NumericalError
/// on NaN states, drift above budget, or adaptive step underflow.
Trajectory integrate(const Game& game, const RouteSet& routes, RouteFlow z0,
                     double eta, double horizon, const IntegrateOptions& opts = {});

/// One classic RK4 step for a generic autonomous RHS; exposed for the
/// integrator-order tests.
void rk4_step(std::span<const double> y, double h,
              const std::function<void(std::span<const double>, std::span<double>)>& rhs,
              std::span<double> out);

}  // namespace hetroute

#endif
