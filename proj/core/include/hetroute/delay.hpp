#ifndef HETROUTE_DELAY_HPP
#define HETROUTE_DELAY_HPP

#include <string>
#include <vector>

namespace hetroute {

/// Link delay as a polynomial in the link flow with non-negative
/// coefficients, so it is non-decreasing and C^1 on [0, inf) with
/// closed-form derivative and antiderivative. The original variant tag
/// (constant / affine / linear / poly) is kept for round-tripping.
class DelayFunction {
 public:
  enum class Kind { Constant, Affine, Linear, Poly };

  DelayFunction() : kind_(Kind::Constant), coeffs_{0.0} {}

  static DelayFunction constant(double a);
  static DelayFunction affine(double a, double b);  // a + b*f
  static DelayFunction linear(double b);            // b*f
  static DelayFunction poly(std::vector<double> coeffs);  // ascending powers

  /// Value at link flow f.
  double operator()(double f) const;
  /// d tau / d f at link flow f.
  double derivative(double f) const;
  /// Integral of tau over [0, f] (Beckmann term).
  double integral(double f) const;

  /// New delay with a constant added (toll composition).
  DelayFunction plus_constant(double c) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  bool operator==(const DelayFunction&) const = default;

  static const char* kind_name(Kind k);

 private:
  DelayFunction(Kind kind, std::vector<double> coeffs);

  Kind kind_;
  std::vector<double> coeffs_;  // coeffs_[i] multiplies f^i; all >= 0
};

}  // namespace hetroute

#endif
