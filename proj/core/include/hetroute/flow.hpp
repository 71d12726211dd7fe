#ifndef HETROUTE_FLOW_HPP
#define HETROUTE_FLOW_HPP

#include <span>
#include <vector>

#include "hetroute/routeset.hpp"

namespace hetroute {

class Rng;

/// Route flow over all populations, flat in RouteSet layout.
struct RouteFlow {
  std::vector<double> z;

  std::span<const double> pop(const RouteSet& routes, int p) const {
    return {z.data() + routes.offset(p), static_cast<std::size_t>(routes.count(p))};
  }
  std::span<double> pop(const RouteSet& routes, int p) {
    return {z.data() + routes.offset(p), static_cast<std::size_t>(routes.count(p))};
  }
};

using LinkFlow = std::vector<double>;

/// f = sum_p A^p z^p.
LinkFlow link_flow(const RouteSet& routes, const RouteFlow& z);

/// Route costs c^p_r(z) for all populations, flat in RouteSet layout.
std::vector<double> route_costs(const Game& game, const RouteSet& routes,
                                const RouteFlow& z);
/// Same, with the link flow already available.
std::vector<double> route_costs(const Game& game, const RouteSet& routes,
                                const LinkFlow& f);

/// Simplex-membership check: z >= 0 and per-population sums equal the
/// throughputs within 1e-12 * max(1, v_p). Throws ValidationError.
void require_admissible(const Game& game, const RouteSet& routes,
                        const RouteFlow& z);
bool is_admissible(const Game& game, const RouteSet& routes, const RouteFlow& z);

/// Clips negatives at 0 and rescales each population block to sum v_p.
/// Returns the l1 size of the adjustment.
double project_to_simplex(const Game& game, const RouteSet& routes, RouteFlow& z);

double l1_distance(const RouteFlow& a, const RouteFlow& b);
double l1_norm(std::span<const double> x);

/// Number of vertex profiles prod_p |R_p| (saturating at `cap`).
long vertex_profile_count(const RouteSet& routes, long cap = 1L << 30);

/// k-th vertex profile; population 0 is the least significant digit.
RouteFlow vertex_profile(const Game& game, const RouteSet& routes, long k);

/// Every population spread uniformly over its routes.
RouteFlow uniform_profile(const Game& game, const RouteSet& routes);

/// Interior point with flat-Dirichlet blocks.
RouteFlow dirichlet_profile(const Game& game, const RouteSet& routes, Rng& rng);

/// Compares flow vectors lexicographically (deterministic sort order).
bool lexicographic_less(const RouteFlow& a, const RouteFlow& b);

}  // namespace hetroute

#endif
