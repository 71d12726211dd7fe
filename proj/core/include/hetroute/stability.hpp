#ifndef HETROUTE_STABILITY_HPP
#define HETROUTE_STABILITY_HPP

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <vector>

#include "hetroute/dynamics.hpp"
#include "hetroute/flow.hpp"

namespace hetroute {

enum class StabilityClass { Stable, Unstable, Marginal };
const char* stability_name(StabilityClass c);

/// Analytic Jacobian of G with respect to z, full RouteSet layout
/// (Sum_p |R_p| square). Row (p,i), column (q,j). Evaluated through the
/// shifted softmax so entries stay finite for eta >= 1e-12.
Eigen::MatrixXd jacobian_z(const Game& game, const RouteSet& routes,
                           const RouteFlow& z, double eta);

/// Analytic dG/deta, flat RouteSet layout.
Eigen::VectorXd jacobian_eta(const Game& game, const RouteSet& routes,
                             const RouteFlow& z, double eta);

/// Restriction of a full-layout operator to the per-population tangent
/// space (last route of each block eliminated). Input is the Jacobian of
/// either G or g = G - id; the restriction commutes with subtracting I.
Eigen::MatrixXd tangent_restriction(const Eigen::MatrixXd& full,
                                    const RouteSet& routes);

/// Projects a full-layout vector with zero block sums onto the chart
/// coordinates (drops the last route of each population).
Eigen::VectorXd tangent_coordinates(const Eigen::VectorXd& full,
                                    const RouteSet& routes);

/// Embeds chart coordinates back into the full layout (last route of each
/// block receives minus the block sum).
Eigen::VectorXd tangent_embed(const Eigen::VectorXd& reduced,
                              const RouteSet& routes);

struct Classification {
  StabilityClass stability = StabilityClass::Marginal;
  std::vector<std::complex<double>> tangent_eigenvalues;  // of J_g restricted
  std::vector<std::complex<double>> full_eigenvalues;     // of J_g, all n
  double max_real = 0.0;  // over tangent eigenvalues
};

/// Linear stability of a fixed point: eigenvalues of J_G - I on the
/// tangent space; stable if all real parts < -1e-8, unstable if any
/// > 1e-8, marginal otherwise. Requires residual <= 1e-10.
Classification classify(const Game& game, const RouteSet& routes,
                        const RouteFlow& z, double eta);

struct ContractionCertificate {
  double eta = 0.0;
  double margin = 0.0;  // c = min over sample of -(max l1 column measure of J_g)
  bool valid = false;   // margin > 0
  int sample_size = 0;
  std::uint64_t seed = 0;
  RouteFlow worst_point;
};

/// -(max_j [J_jj + sum_{i!=j} |J_ij|]) of J_g = J_G - I at one point.
double contraction_margin_at(const Game& game, const RouteSet& routes,
                             const RouteFlow& z, double eta);

/// Certificate over an explicit sample of admissible flows.
ContractionCertificate contraction_margin(const Game& game, const RouteSet& routes,
                                          double eta,
                                          std::span<const RouteFlow> sample,
                                          int jobs = 1);

/// Default sample: all vertex profiles (up to 1024) plus n_dirichlet
/// interior points drawn from the seed.
ContractionCertificate contraction_margin(const Game& game, const RouteSet& routes,
                                          double eta, int n_dirichlet = 512,
                                          std::uint64_t seed = 0, int jobs = 1);

struct ThresholdOptions {
  double rel_tol = 1e-3;       // bisection width relative to the crossing
  double bracket_lo = 1e-3;
  double bracket_hi = 1e9;
  int scan_points = 25;        // initial log-spaced sign scan
  int n_dirichlet = 512;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct ThresholdEstimate {
  double eta_hat = 0.0;          // contraction held for all tested eta above
  bool sampled = true;           // estimate from a z-sample, not a proof
  bool one_sided = false;        // no sign change inside the bracket
  bool valid_at_lo = false;      // margin sign at the bracket ends
  bool valid_at_hi = false;
  std::vector<double> crossings; // every detected sign change, refined
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Bisects the sign of the sampled contraction margin over eta. Reports
/// all sign changes; eta_hat is the largest one (or the lower bracket end
/// when contraction already holds there).
ThresholdEstimate estimate_eta_threshold(const Game& game, const RouteSet& routes,
                                         const ThresholdOptions& opts = {});

struct ContractionCheck {
  bool ok = false;
  double worst_ratio = 0.0;  // max over times of ||x-y||_1 / bound
  double worst_time = 0.0;
  int worst_pair = -1;
};

/// Integrates `n_pairs` random start pairs and checks
/// ||x(t)-y(t)||_1 <= 1.01 * exp(-c t) * ||x0-y0||_1 on the whole grid,
/// with c taken from the certificate. Requires certificate.valid.
ContractionCheck verify_contraction_inequality(const Game& game, const RouteSet& routes,
                                               double eta, int n_pairs, double horizon,
                                               const ContractionCertificate& certificate,
                                               std::uint64_t seed = 0,
                                               const IntegrateOptions& opts = {});

}  // namespace hetroute

#endif
