#include "hetroute/flow.hpp"

#include <algorithm>
#include <cmath>

#include "hetroute/errors.hpp"
#include "hetroute/rng.hpp"

namespace hetroute {

LinkFlow link_flow(const RouteSet& routes, const RouteFlow& z) {
  if (static_cast<int>(z.z.size()) != routes.total())
    throw ValidationError("route flow dimension mismatch");
  LinkFlow f(static_cast<std::size_t>(routes.n_links()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const int base = routes.offset(p);
    for (int r = 0; r < routes.count(p); ++r) {
      const double zr = z.z[static_cast<std::size_t>(base + r)];
      if (zr == 0.0) continue;
      for (int e : routes.route(p, r)) f[static_cast<std::size_t>(e)] += zr;
    }
  }
  return f;
}

std::vector<double> route_costs(const Game& game, const RouteSet& routes,
                                const LinkFlow& f) {
  std::vector<double> costs(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const auto& delays = game.populations[static_cast<std::size_t>(p)].delays;
    const int base = routes.offset(p);
    for (int r = 0; r < routes.count(p); ++r) {
      double c = 0.0;
      for (int e : routes.route(p, r))
        c += delays[static_cast<std::size_t>(e)](f[static_cast<std::size_t>(e)]);
      costs[static_cast<std::size_t>(base + r)] = c;
    }
  }
  return costs;
}

std::vector<double> route_costs(const Game& game, const RouteSet& routes,
                                const RouteFlow& z) {
  return route_costs(game, routes, link_flow(routes, z));
}

bool is_admissible(const Game& game, const RouteSet& routes, const RouteFlow& z) {
  if (static_cast<int>(z.z.size()) != routes.total()) return false;
  for (double v : z.z) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  }
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    double sum = 0.0;
    for (double v : z.pop(routes, p)) sum += v;
    if (std::abs(sum - vp) > 1e-12 * std::max(1.0, vp)) return false;
  }
  return true;
}

void require_admissible(const Game& game, const RouteSet& routes, const RouteFlow& z) {
  if (static_cast<int>(z.z.size()) != routes.total())
    throw ValidationError("route flow dimension mismatch");
  for (double v : z.z) {
    if (!std::isfinite(v)) throw ValidationError("route flow has a non-finite component");
    if (v < 0.0) throw ValidationError("route flow has a negative component");
  }
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    double sum = 0.0;
    for (double v : z.pop(routes, p)) sum += v;
    if (std::abs(sum - vp) > 1e-12 * std::max(1.0, vp))
      throw ValidationError("population '" + game.populations[static_cast<std::size_t>(p)].id +
                            "' route flow sums to " + std::to_string(sum) +
                            " instead of its throughput");
  }
}

double project_to_simplex(const Game& game, const RouteSet& routes, RouteFlow& z) {
  double drift = 0.0;
  for (int p = 0; p < routes.n_populations(); ++p) {
    auto block = z.pop(routes, p);
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    double sum = 0.0;
    for (auto& v : block) {
      if (v < 0.0) {
        drift += -v;
        v = 0.0;
      }
      sum += v;
    }
    if (sum <= 0.0) {
      // total collapse: fall back to the uniform block
      const double u = vp / static_cast<double>(block.size());
      for (auto& v : block) {
        drift += std::abs(v - u);
        v = u;
      }
      continue;
    }
    const double scale = vp / sum;
    for (auto& v : block) {
      const double nv = v * scale;
      drift += std::abs(nv - v);
      v = nv;
    }
  }
  return drift;
}

double l1_distance(const RouteFlow& a, const RouteFlow& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.z.size(); ++i) d += std::abs(a.z[i] - b.z[i]);
  return d;
}

double l1_norm(std::span<const double> x) {
  double d = 0.0;
  for (double v : x) d += std::abs(v);
  return d;
}

long vertex_profile_count(const RouteSet& routes, long cap) {
  long count = 1;
  for (int p = 0; p < routes.n_populations(); ++p) {
    count *= routes.count(p);
    if (count >= cap) return cap;
  }
  return count;
}

RouteFlow vertex_profile(const Game& game, const RouteSet& routes, long k) {
  RouteFlow z;
  z.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const long idx = k % routes.count(p);
    k /= routes.count(p);
    z.z[static_cast<std::size_t>(routes.offset(p) + idx)] =
        game.populations[static_cast<std::size_t>(p)].throughput;
  }
  return z;
}

RouteFlow uniform_profile(const Game& game, const RouteSet& routes) {
  RouteFlow z;
  z.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    const double u = game.populations[static_cast<std::size_t>(p)].throughput /
                     static_cast<double>(routes.count(p));
    for (auto& v : z.pop(routes, p)) v = u;
  }
  return z;
}

RouteFlow dirichlet_profile(const Game& game, const RouteSet& routes, Rng& rng) {
  RouteFlow z;
  z.z.assign(static_cast<std::size_t>(routes.total()), 0.0);
  for (int p = 0; p < routes.n_populations(); ++p) {
    auto block = z.pop(routes, p);
    auto w = rng.dirichlet(routes.count(p));
    const double vp = game.populations[static_cast<std::size_t>(p)].throughput;
    for (std::size_t i = 0; i < block.size(); ++i) block[i] = vp * w[i];
  }
  return z;
}

bool lexicographic_less(const RouteFlow& a, const RouteFlow& b) {
  return std::lexicographical_compare(a.z.begin(), a.z.end(), b.z.begin(), b.z.end());
}

}  // namespace hetroute
