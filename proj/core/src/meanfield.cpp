#include "hetroute/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetroute/errors.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

RouteFlow AgentState::to_route_flow(const Game& game, const RouteSet& routes) const {
  RouteFlow z;
  z.z.assign(counts.size(), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    const long np = totals[static_cast<std::size_t>(p)];
    for (int r = 0; r < routes.count(p); ++r) {
      const std::size_t i = static_cast<std::size_t>(routes.offset(p) + r);
      z.z[i] = vp * static_cast<double>(counts[i]) / static_cast<double>(np);
    }
  }
  return z;
}

AgentState round_to_counts(const Game& game, const RouteSet& routes, const RouteFlow& z0,
                           std::span<const long> n_agents) {
  AgentState state;
  state.counts.assign(static_cast<std::size_t>(routes.total()), 0);
  state.totals.assign(n_agents.begin(), n_agents.end());

  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    const long np = n_agents[static_cast<std::size_t>(p)];
    const int base = routes.offset(p);
    long assigned = 0;
    std::vector<std::pair<double, int>> remainders;  // (-remainder, route)
    for (int r = 0; r < routes.count(p); ++r) {
      const double share =
          vp > 0.0 ? z0.z[static_cast<std::size_t>(base + r)] / vp * static_cast<double>(np)
                   : (r == 0 ? static_cast<double>(np) : 0.0);
      const long floor_count = static_cast<long>(std::floor(share));
      state.counts[static_cast<std::size_t>(base + r)] = floor_count;
      assigned += floor_count;
      remainders.emplace_back(-(share - static_cast<double>(floor_count)), r);
    }
    std::sort(remainders.begin(), remainders.end());  // largest remainder first, ties by route
    long leftover = np - assigned;
    for (long k = 0; k < leftover; ++k) {
      const int r = remainders[static_cast<std::size_t>(k) % remainders.size()].second;
      ++state.counts[static_cast<std::size_t>(base + r)];
    }
  }
  return state;
}

Trajectory simulate_agents(const Game& game, const RouteSet& routes, double eta,
                           std::span<const long> n_agents, const RouteFlow& z0,
                           double horizon, std::uint64_t seed, const AgentSimOptions& opts) {
  require_admissible(game, routes, z0);
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (static_cast<int>(n_agents.size()) != game.n_populations())
    throw ValidationError("one agent count per population required");
  for (long n : n_agents)
    if (n < 1) throw ValidationError("agent count must be >= 1 per population");
  if (!(opts.sample_dt > 0.0)) throw ValidationError("sample spacing must be positive");

  AgentState state = round_to_counts(game, routes, z0, n_agents);
  const long total_agents = std::accumulate(n_agents.begin(), n_agents.end(), 0L);
  const double rate = static_cast<double>(total_agents);

  Trajectory traj;
  traj.eta = eta;
  traj.method = "gillespie";
  traj.step = opts.sample_dt;
  traj.seed = static_cast<long>(seed);
  traj.agents.assign(n_agents.begin(), n_agents.end());

  const long n_grid = static_cast<long>(std::floor(horizon / opts.sample_dt + 1e-9)) + 1;
  traj.times.reserve(static_cast<std::size_t>(n_grid));
  traj.states.reserve(static_cast<std::size_t>(n_grid));

  Rng rng(seed);
  double t = 0.0;
  long g = 0;
  std::vector<double> probs;

  auto record_until = [&](double up_to) {
    while (g < n_grid) {
      const double tg = static_cast<double>(g) * opts.sample_dt;
      if (tg > up_to + 1e-15) break;
      traj.times.push_back(tg);
      traj.states.push_back(state.to_route_flow(game, routes));
      ++g;
    }
  };

  for (;;) {
    const double wait = rng.exponential(rate);
    const double t_next = t + wait;
    record_until(std::min(t_next, horizon));
    if (t_next >= horizon || g >= n_grid) break;
    t = t_next;

    // revising agent: population by cumulative counts, then its route
    long pick = rng.uniform_int(total_agents);
    int pop = 0;
    while (pick >= state.totals[static_cast<std::size_t>(pop)]) {
      pick -= state.totals[static_cast<std::size_t>(pop)];
      ++pop;
    }
    const int base = routes.offset(pop);
    int old_route = 0;
    {
      long cum = 0;
      for (int r = 0; r < routes.count(pop); ++r) {
        cum += state.counts[static_cast<std::size_t>(base + r)];
        if (pick < cum) {
          old_route = r;
          break;
        }
      }
    }

    // logit re-draw at the current empirical flow
    const RouteFlow z = state.to_route_flow(game, routes);
    const auto costs = route_costs(game, routes, z);
    probs.assign(static_cast<std::size_t>(routes.count(pop)), 0.0);
    logit_weights({costs.data() + base, probs.size()}, eta, 1.0, probs);
    const double u = rng.uniform();
    int new_route = routes.count(pop) - 1;
    double cum = 0.0;
    for (int r = 0; r < routes.count(pop); ++r) {
      cum += probs[static_cast<std::size_t>(r)];
      if (u < cum) {
        new_route = r;
        break;
      }
    }

    --state.counts[static_cast<std::size_t>(base + old_route)];
    ++state.counts[static_cast<std::size_t>(base + new_route)];
  }
  record_until(horizon);
  traj.final_residual = fixed_point_residual(game, routes, traj.states.back(), eta);
  return traj;
}

CompareReport compare_to_ode(const Trajectory& empirical, const Trajectory& ode) {
  if (empirical.states.empty() || ode.states.empty())
    throw ValidationError("cannot compare empty trajectories");
  if (empirical.states.front().z.size() != ode.states.front().z.size())
    throw ValidationError("trajectory dimension mismatch");
  if (empirical.times.front() > ode.times.front() + 1e-12 ||
      empirical.times.back() < ode.times.back() - 1e-12)
    throw ValidationError("grid mismatch: empirical trajectory does not cover the ODE grid");

  CompareReport report;
  report.times = ode.times;
  report.distances.reserve(ode.times.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < ode.times.size(); ++k) {
    const double t = ode.times[k];
    while (j + 1 < empirical.times.size() && empirical.times[j + 1] <= t + 1e-12) ++j;
    const double d = l1_distance(empirical.states[j], ode.states[k]);
    report.distances.push_back(d);
    report.sup_distance = std::max(report.sup_distance, d);
  }
  return report;
}

}  // namespace hetroute
