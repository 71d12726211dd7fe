#include "hetroute/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hetroute/errors.hpp"

namespace hetroute {

void logit_weights(std::span<const double> costs, double eta, double v,
                   std::span<double> out) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ValidationError("noise level must be positive and finite");
  double cmin = costs[0];
  for (double c : costs) {
    if (!std::isfinite(c)) throw NumericalError("non-finite route cost");
    cmin = std::min(cmin, c);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    out[i] = std::exp(-(costs[i] - cmin) / eta);
    sum += out[i];
  }
  const double scale = v / sum;
  for (auto& w : out) w *= scale;
}

RouteFlow logit_map(const Game& game, const RouteSet& routes, const RouteFlow& z,
                    double eta) {
  const auto costs = route_costs(game, routes, z);
  RouteFlow g;
  g.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    const int k = routes.count(p);
    logit_weights({costs.data() + base, static_cast<std::size_t>(k)}, eta,
                  game.populations[static_cast<std::size_t>(p)].throughput,
                  {g.z.data() + base, static_cast<std::size_t>(k)});
  }
  return g;
}

std::vector<double> logit_rhs(const Game& game, const RouteSet& routes,
                              const RouteFlow& z, double eta) {
  RouteFlow g = logit_map(game, routes, z, eta);
  std::vector<double> zdot(g.z.size());
  for (std::size_t i = 0; i < g.z.size(); ++i) zdot[i] = g.z[i] - z.z[i];
  return zdot;
}

double fixed_point_residual(const Game& game, const RouteSet& routes,
                            const RouteFlow& z, double eta) {
  const RouteFlow g = logit_map(game, routes, z, eta);
  double r = 0.0;
  for (std::size_t i = 0; i < g.z.size(); ++i) r += std::abs(g.z[i] - z.z[i]);
  return r;
}

void rk4_step(std::span<const double> y, double h,
              const std::function<void(std::span<const double>, std::span<double>)>& rhs,
              std::span<double> out) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  rhs(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

namespace {

void logit_rhs_inplace(const Game& game, const RouteSet& routes, double eta,
                       std::span<const double> y, std::span<double> dy) {
  RouteFlow z;
  z.z.assign(y.begin(), y.end());
  const auto g = logit_map(game, routes, z, eta);
  for (std::size_t i = 0; i < y.size(); ++i) dy[i] = g.z[i] - y[i];
}

}  // namespace

Trajectory integrate(const Game& game, const RouteSet& routes, RouteFlow z0,
                     double eta, double horizon, const IntegrateOptions& opts) {
  require_admissible(game, routes, z0);
  if (!(eta > 0.0)) throw ValidationError("noise level must be positive");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (!(opts.step > 0.0)) throw ValidationError("step size must be positive");

  auto rhs = [&](std::span<const double> y, std::span<double> dy) {
    logit_rhs_inplace(game, routes, eta, y, dy);
  };

  Trajectory traj;
  traj.eta = eta;
  traj.method = opts.adaptive ? "rk4-adaptive" : "rk4";
  traj.step = opts.step;
  traj.times.push_back(0.0);
  traj.states.push_back(z0);

  RouteFlow z = std::move(z0);
  double t = 0.0;
  double h = opts.step;
  long steps = 0;
  std::vector<double> next(z.z.size());
  std::vector<double> half(z.z.size()), full(z.z.size());

  while (t < horizon - 1e-15 * horizon) {
    const double hstep = std::min(h, horizon - t);
    if (hstep < 1e-9 * opts.step) break;  // degenerate trailing step
    if (opts.adaptive) {
      // step doubling: one full step against two half steps
      for (;;) {
        const double hs = std::min(h, horizon - t);
        rk4_step(z.z, hs, rhs, full);
        rk4_step(z.z, 0.5 * hs, rhs, half);
        rk4_step(half, 0.5 * hs, rhs, next);
        double err = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) err += std::abs(next[i] - full[i]);
        if (err <= opts.adaptive_tol || hs <= opts.min_step) {
          if (hs <= opts.min_step && err > opts.adaptive_tol)
            throw NumericalError("adaptive step size underflow at t=" + std::to_string(t));
          t += hs;
          if (err < 0.25 * opts.adaptive_tol) h = std::min(opts.step * 100.0, hs * 2.0);
          break;
        }
        h = std::max(opts.min_step, 0.5 * hs);
      }
    } else {
      rk4_step(z.z, hstep, rhs, next);
      t += hstep;
    }

    for (double v : next)
      if (!std::isfinite(v)) throw NumericalError("integration produced a NaN state");
    z.z.assign(next.begin(), next.end());
    const double drift = project_to_simplex(game, routes, z);
    if (drift > opts.max_projection_drift)
      throw NumericalError("simplex projection drift " + std::to_string(drift) +
                           " exceeds budget at t=" + std::to_string(t));

    ++steps;
    if (steps % opts.record_every == 0 || t >= horizon - 1e-15 * horizon) {
      traj.times.push_back(t);
      traj.states.push_back(z);
    }

    const double residual = fixed_point_residual(game, routes, z, eta);
    if (residual < opts.stationarity_tol) {
      traj.converged = true;
      if (traj.times.back() != t) {
        traj.times.push_back(t);
        traj.states.push_back(z);
      }
      traj.final_residual = residual;
      return traj;
    }
  }
  traj.final_residual = fixed_point_residual(game, routes, traj.states.back(), eta);
  return traj;
}

}  // namespace hetroute
