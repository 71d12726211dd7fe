#ifndef HETROUTE_EQUILIBRIA_HPP
#define HETROUTE_EQUILIBRIA_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetroute/stability.hpp"

namespace hetroute {

/// Wardrop check: every route carrying flow is cost-minimal for its
/// population, up to `tolerance`. A route is "used" when its flow exceeds
/// 1e-10 * v_p.
struct WardropReport {
  bool is_equilibrium = false;
  double tolerance = 0.0;
  double worst_gap = 0.0;                // max over populations
  std::vector<double> min_cost;          // per population
  std::vector<double> gap;               // per population, >= 0
  int worst_population = -1;
  int worst_route = -1;                  // a used route attaining the gap
};

WardropReport check_wardrop(const Game& game, const RouteSet& routes,
                            const RouteFlow& z, double tol = 1e-8);

/// Strictness check: each population concentrated on a single route whose
/// cost beats every alternative by more than `tol`. Populations with a
/// single route (or zero throughput) have margin +infinity.
struct StrictReport {
  bool is_strict = false;
  std::vector<double> margins;  // per population, min_s!=r (c_s - c_r)
};

StrictReport check_strict(const Game& game, const RouteSet& routes,
                          const RouteFlow& z, double tol = 1e-8);

struct FixedPointOptions {
  double damping = 0.5;          // Picard z <- (1-a) z + a G(z)
  double tolerance = 1e-12;      // l1 residual target
  long max_iterations = 100000;  // Picard cap
  int newton_iterations = 50;
  long stall_window = 5000;      // Picard early-out when best residual stalls
  bool classify_result = true;   // fill eigenvalues/stability on success
  // Run Newton from the seed before any Picard step when the seed residual
  // is at most this value (0 disables). Continuation correctors set it to
  // infinity: the damped Picard flow would drift off weakly-unstable branch
  // points, and it diverges outright at small eta where ||J_G|| >> 1.
  double newton_first_threshold = 0.0;
};

/// A polished fixed point of G(., eta): residual <= tolerance, full
/// eigenvalue list of J_g (one entry per route) and the stability class
/// from the tangent restriction.
struct FixedPointRecord {
  RouteFlow z;
  double eta = 0.0;
  double residual = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  StabilityClass stability = StabilityClass::Marginal;
  double max_tangent_real = 0.0;  // largest real part on the tangent space
};

struct FixedPointOutcome {
  std::optional<FixedPointRecord> record;  // empty on no-convergence
  double best_residual = 0.0;
  long iterations = 0;
};

/// Damped Picard iteration followed by a Newton polish in tangent
/// coordinates (analytic Jacobian). Never throws on non-convergence; the
/// outcome reports the best residual reached.
FixedPointOutcome find_fixed_point(const Game& game, const RouteSet& routes,
                                   double eta, RouteFlow z0,
                                   const FixedPointOptions& opts = {});

struct FixedPointSearch {
  std::vector<FixedPointRecord> records;  // deduplicated, sorted
  int failures = 0;                       // starts that did not converge
};

/// Multi-start search: every vertex profile (capped at 1024), the
/// barycenter, and n_starts Dirichlet interior points. Results within l1
/// distance 1e-6 are merged; output is sorted lexicographically.
FixedPointSearch find_all_fixed_points(const Game& game, const RouteSet& routes,
                                       double eta, int n_starts, std::uint64_t seed,
                                       const FixedPointOptions& opts = {},
                                       int jobs = 1);

struct StrictEquilibrium {
  RouteFlow z;
  std::vector<double> margins;
  long vertex_index = 0;
};

/// Tests every vertex profile of Z with check_strict. Throws
/// ValidationError when prod_p |R_p| exceeds 1024.
std::vector<StrictEquilibrium> enumerate_strict_candidates(const Game& game,
                                                           const RouteSet& routes,
                                                           double tol = 1e-8);

}  // namespace hetroute

#endif
