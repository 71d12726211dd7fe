#include "hetroute/delay.hpp"

#include <cmath>

#include "hetroute/errors.hpp"

namespace hetroute {

namespace {

void require_coeffs(const std::vector<double>& c) {
  if (c.empty()) throw ValidationError("delay function needs at least one coefficient");
  for (double v : c) {
    if (!std::isfinite(v)) throw ValidationError("delay coefficient is not finite");
    if (v < 0.0) throw ValidationError("delay coefficient is negative (delays must be non-decreasing)");
  }
}

}  // namespace

DelayFunction::DelayFunction(Kind kind, std::vector<double> coeffs)
    : kind_(kind), coeffs_(std::move(coeffs)) {
  require_coeffs(coeffs_);
}

DelayFunction DelayFunction::constant(double a) { return {Kind::Constant, {a}}; }

DelayFunction DelayFunction::affine(double a, double b) { return {Kind::Affine, {a, b}}; }

DelayFunction DelayFunction::linear(double b) { return {Kind::Linear, {0.0, b}}; }

DelayFunction DelayFunction::poly(std::vector<double> coeffs) {
  return {Kind::Poly, std::move(coeffs)};
}

double DelayFunction::operator()(double f) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * f + *it;
  return acc;
}

double DelayFunction::derivative(double f) const {
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) {
    acc = acc * f + static_cast<double>(k) * coeffs_[k];
  }
  return acc;
}

double DelayFunction::integral(double f) const {
  // Horner on the antiderivative sum_k c_k f^{k+1} / (k+1)
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    acc = acc * f + coeffs_[k] / static_cast<double>(k + 1);
  }
  return acc * f;
}

DelayFunction DelayFunction::plus_constant(double c) const {
  if (c < 0.0) throw ValidationError("toll contribution is negative");
  std::vector<double> coeffs = coeffs_;
  coeffs[0] += c;
  Kind kind = kind_;
  if (c != 0.0 && kind == Kind::Linear) kind = Kind::Affine;
  return {kind, std::move(coeffs)};
}

const char* DelayFunction::kind_name(Kind k) {
  switch (k) {
    case Kind::Constant: return "constant";
    case Kind::Affine: return "affine";
    case Kind::Linear: return "linear";
    case Kind::Poly: return "poly";
  }
  return "?";
}

}  // namespace hetroute
