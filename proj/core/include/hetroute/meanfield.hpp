#ifndef HETROUTE_MEANFIELD_HPP
#define HETROUTE_MEANFIELD_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hetroute/dynamics.hpp"

namespace hetroute {

/// Integer route occupancies n^p_r with sum_r n^p_r = N_p exactly.
struct AgentState {
  std::vector<long> counts;  // flat RouteSet layout
  std::vector<long> totals;  // per population

  RouteFlow to_route_flow(const Game& game, const RouteSet& routes) const;
};

/// Largest-remainder rounding of N_p * z^p / v_p to integer counts.
AgentState round_to_counts(const Game& game, const RouteSet& routes,
                           const RouteFlow& z0, std::span<const long> n_agents);

struct AgentSimOptions {
  double sample_dt = 0.01;  // uniform output grid spacing
};

/// Exact event-driven simulation of the N-agent noisy-best-response
/// process: unit-rate revision clocks, full logit re-draw at the current
/// empirical flow. States are sampled onto a uniform grid; a fixed seed
/// reproduces the trajectory exactly.
Trajectory simulate_agents(const Game& game, const RouteSet& routes, double eta,
                           std::span<const long> n_agents, const RouteFlow& z0,
                           double horizon, std::uint64_t seed,
                           const AgentSimOptions& opts = {});

struct CompareReport {
  double sup_distance = 0.0;
  std::vector<double> times;      // the ODE grid
  std::vector<double> distances;  // l1 distance per time
};

/// Sup over the ODE grid of the l1 distance between the empirical states
/// (piecewise-constant in time) and the ODE states. Throws ValidationError
/// when the empirical trajectory does not cover the ODE grid.
CompareReport compare_to_ode(const Trajectory& empirical, const Trajectory& ode);

}  // namespace hetroute

#endif
