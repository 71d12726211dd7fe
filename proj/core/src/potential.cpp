#include "hetroute/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetroute/errors.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

SymmetryReport check_symmetry(const Game& game, const RouteSet& routes,
                              std::span<const RouteFlow> samples) {
  if (samples.empty()) throw ValidationError("symmetry check needs at least one sample");
  SymmetryReport report;

  const int n_links = routes.n_links();
  std::vector<std::vector<double>> deriv(static_cast<std::size_t>(game.n_populations()));

  for (const auto& z : samples) {
    const LinkFlow f = link_flow(routes, z);
    for (int p = 0; p < game.n_populations(); ++p) {
      auto& d = deriv[static_cast<std::size_t>(p)];
      d.assign(static_cast<std::size_t>(n_links), 0.0);
      const auto& delays = game.populations[static_cast<std::size_t>(p)].delays;
      for (int e = 0; e < n_links; ++e)
        d[static_cast<std::size_t>(e)] =
            delays[static_cast<std::size_t>(e)].derivative(f[static_cast<std::size_t>(e)]);
    }
    for (int p = 0; p < game.n_populations(); ++p) {
      for (int q = p + 1; q < game.n_populations(); ++q) {
        for (int i = 0; i < routes.count(p); ++i) {
          for (int j = 0; j < routes.count(q); ++j) {
            double sum_p = 0.0, sum_q = 0.0;
            for (int e : routes.route(p, i)) {
              if (!routes.on_route(q, j, e)) continue;
              sum_p += deriv[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
              sum_q += deriv[static_cast<std::size_t>(q)][static_cast<std::size_t>(e)];
            }
            const double violation = std::abs(sum_p - sum_q);
            if (violation > report.worst_violation) {
              report.worst_violation = violation;
              report.worst_pop_p = p;
              report.worst_pop_q = q;
              report.worst_route_i = i;
              report.worst_route_j = j;
            }
          }
        }
      }
    }
  }
  report.symmetric = report.worst_violation <= 1e-9;
  return report;
}

SymmetryReport check_symmetry(const Game& game, const RouteSet& routes, int n_samples,
                              std::uint64_t seed) {
  // affine/linear delays have constant derivatives: one sample settles it
  bool flow_independent = true;
  for (const auto& pop : game.populations)
    for (const auto& d : pop.delays)
      if (d.coefficients().size() > 2) flow_independent = false;

  std::vector<RouteFlow> samples;
  samples.push_back(uniform_profile(game, routes));
  if (!flow_independent) {
    Rng rng(seed);
    for (int i = 1; i < n_samples; ++i)
      samples.push_back(dirichlet_profile(game, routes, rng));
  }
  return check_symmetry(game, routes, samples);
}

PotentialValue toll_potential(const TollGameSpec& spec, const RouteSet& routes,
                              const RouteFlow& z) {
  PotentialValue out;
  const LinkFlow f = link_flow(routes, z);
  double beckmann = 0.0;
  for (int e = 0; e < routes.n_links(); ++e)
    beckmann +=
        spec.base_delays[static_cast<std::size_t>(e)].integral(f[static_cast<std::size_t>(e)]);

  double toll_term = 0.0;
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double alpha = spec.sensitivities[static_cast<std::size_t>(p)];
    if (alpha == 0.0) continue;
    for (int r = 0; r < routes.count(p); ++r) {
      const double zr = z.z[static_cast<std::size_t>(routes.offset(p) + r)];
      if (zr == 0.0) continue;
      for (int e : routes.route(p, r))
        toll_term += alpha * spec.tolls[static_cast<std::size_t>(e)] * zr;
    }
  }
  out.beckmann = beckmann;
  out.toll_term = toll_term;
  out.value = beckmann + toll_term;
  out.entropy = 0.0;
  out.perturbed = out.value;
  return out;
}

namespace {

double entropy_term(const Game& game, const RouteSet& routes, const RouteFlow& z) {
  double s = 0.0;
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    if (vp <= 0.0) continue;
    for (double zi : z.pop(routes, p)) {
      if (zi > 0.0) s += zi * std::log(zi / vp);  // 0 log 0 -> 0
    }
  }
  return s;
}

}  // namespace

PotentialValue perturbed_potential(const Game& game, const TollGameSpec& spec,
                                   const RouteSet& routes, const RouteFlow& z, double eta) {
  PotentialValue out = toll_potential(spec, routes, z);
  out.entropy = entropy_term(game, routes, z);
  out.perturbed = out.value + eta * out.entropy;
  return out;
}

std::vector<double> perturbed_potential_gradient(const Game& game, const TollGameSpec& spec,
                                                 const RouteSet& routes, const RouteFlow& z,
                                                 double eta) {
  const LinkFlow f = link_flow(routes, z);
  std::vector<double> grad(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    const double alpha = spec.sensitivities[static_cast<std::size_t>(p)];
    for (int r = 0; r < routes.count(p); ++r) {
      double c = 0.0;
      for (int e : routes.route(p, r)) {
        c += spec.base_delays[static_cast<std::size_t>(e)](f[static_cast<std::size_t>(e)]) +
             alpha * spec.tolls[static_cast<std::size_t>(e)];
      }
      double g = c;
      if (eta > 0.0 && vp > 0.0) {
        const double zi = std::max(z.z[static_cast<std::size_t>(routes.offset(p) + r)], 1e-300);
        g += eta * (std::log(zi / vp) + 1.0);
      }
      grad[static_cast<std::size_t>(routes.offset(p) + r)] = g;
    }
  }
  return grad;
}

LyapunovReport lyapunov_monitor(const Game& game, const std::optional<TollGameSpec>& spec,
                                const RouteSet& routes, const Trajectory& trajectory,
                                double eta, double slack) {
  std::optional<TollGameSpec> resolved = spec;
  if (!resolved) resolved = derive_toll_spec(game);
  if (!resolved) {
    const SymmetryReport sym = check_symmetry(game, routes);
    if (!sym.symmetric)
      throw PreconditionError(
          "no potential structure: the delay-derivative symmetry condition fails "
          "(worst violation " +
          std::to_string(sym.worst_violation) + ")");
    throw PreconditionError(
        "symmetry holds but the game has no toll decomposition to build the potential from");
  }
  if (trajectory.states.empty()) throw ValidationError("empty trajectory");

  LyapunovReport report;
  report.slack = slack;
  report.non_increasing = true;
  double previous =
      perturbed_potential(game, *resolved, routes, trajectory.states.front(), eta).perturbed;
  for (std::size_t k = 1; k < trajectory.states.size(); ++k) {
    const double current =
        perturbed_potential(game, *resolved, routes, trajectory.states[k], eta).perturbed;
    const double increase = current - previous;
    if (increase > report.max_increase) {
      report.max_increase = increase;
      report.at_time = trajectory.times[k];
    }
    if (increase > slack) report.non_increasing = false;
    previous = current;
  }
  return report;
}

namespace {

// Entropic (multiplicative) gradient step per population block:
// z' = v * z e^{-gamma g} / sum(z e^{-gamma g}). The projection is the
// Bregman one induced by the entropy, so iterates stay strictly interior
// and the unbounded boundary slope of the entropy term never deadlocks
// the line search (a Euclidean projection would pin flows at zero).
RouteFlow entropic_step(const Game& game, const RouteSet& routes, const RouteFlow& z,
                        const std::vector<double>& grad, double gamma) {
  RouteFlow out = z;
  for (int p = 0; p < routes.n_populations(); ++p) {
    auto block = out.pop(routes, p);
    const auto zb = z.pop(routes, p);
    const int base = routes.offset(p);
    double gmin = grad[static_cast<std::size_t>(base)];
    for (std::size_t i = 1; i < block.size(); ++i)
      gmin = std::min(gmin, grad[static_cast<std::size_t>(base) + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double w = std::max(zb[i], 1e-250) *
                       std::exp(-gamma * (grad[static_cast<std::size_t>(base) + i] - gmin));
      block[i] = w;
      sum += w;
    }
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    for (auto& v : block) v *= vp / sum;
  }
  return out;
}

}  // namespace

RouteFlow minimize_perturbed_potential(const Game& game, const TollGameSpec& spec,
                                       const RouteSet& routes, double eta,
                                       const MinimizeOptions& opts) {
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  RouteFlow z = uniform_profile(game, routes);
  double value = perturbed_potential(game, spec, routes, z, eta).perturbed;
  double gamma = opts.initial_step;

  for (long it = 0; it < opts.max_iterations; ++it) {
    const auto grad = perturbed_potential_gradient(game, spec, routes, z, eta);

    // stationarity: the unit-step entropic update must be a fixed point
    if (l1_distance(entropic_step(game, routes, z, grad, 1.0), z) <= opts.stationarity_tol)
      break;

    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      RouteFlow trial = entropic_step(game, routes, z, grad, gamma);
      const double trial_value = perturbed_potential(game, spec, routes, trial, eta).perturbed;
      double inner = 0.0;  // descent measure <grad, z - trial> >= 0
      for (std::size_t i = 0; i < trial.z.size(); ++i)
        inner += grad[i] * (z.z[i] - trial.z[i]);
      if (trial_value <= value - 0.1 * inner + 1e-18) {
        z = std::move(trial);
        value = trial_value;
        accepted = true;
        break;
      }
      gamma *= 0.5;
    }
    if (!accepted) break;  // machine-precision floor
    gamma = std::min(gamma * 1.5, opts.initial_step);
  }
  return z;
}

}  // namespace hetroute
