#pragma once

// Point-wise (and, for SVLT, index-aware) singular value shrinkage rules.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "svshrink/spectral.hpp"

namespace svshrink {

inline constexpr double kMaxAtnExponent = 64.0;
inline constexpr double kSvltDefaultSlope = 100.0;

// Derivative-of-Gaussian basis, k counted from zero:
//   phi_k(y) = y * exp(-k y^2 / (2 T^2)),  phi_0(y) = y.
double dog_basis(int k, double y, double scale);
double dog_basis_derivative(int k, double y, double scale);

class SvletBasis {
 public:
  // T = C * sigma.
  static SvletBasis from_constant(int order, double constant, double sigma, Vector coeffs);
  static SvletBasis from_scale(int order, double scale, Vector coeffs);

  int order() const noexcept { return order_; }
  double scale() const noexcept { return scale_; }
  std::optional<double> constant() const noexcept { return constant_; }
  const Vector& coeffs() const noexcept { return coeffs_; }

  // Unclamped sum_k a_k phi_k(y) and its y-derivative.
  double raw(double y) const;
  double raw_derivative(double y) const;

 private:
  SvletBasis(int order, double scale, std::optional<double> constant, Vector coeffs);

  int order_;
  double scale_;
  std::optional<double> constant_;
  Vector coeffs_;
};

namespace rules {
struct Identity {};
struct Zero {};
struct Svht {
  double mu;
};
struct Svst {
  double lambda;
};
struct Atn {
  double tau;
  double gamma;
};
// p2 is a 1-based index centre.
struct Svlt {
  double p1;
  double p2;
  double p3;
};
struct Svlet {
  SvletBasis basis;
};
struct RmtOptimal {
  double beta;
};
}  // namespace rules

class ShrinkageRule {
 public:
  using Variant = std::variant<rules::Identity, rules::Zero, rules::Svht, rules::Svst, rules::Atn,
                               rules::Svlt, rules::Svlet, rules::RmtOptimal>;

  static ShrinkageRule identity();
  static ShrinkageRule zero();
  static ShrinkageRule svht(double mu);
  static ShrinkageRule svst(double lambda);
  static ShrinkageRule atn(double tau, double gamma);
  static ShrinkageRule svlt(double p1, double p2, double p3);
  static ShrinkageRule svlet(SvletBasis basis);
  static ShrinkageRule rmt_optimal(double beta);

  const Variant& variant() const noexcept { return rule_; }
  std::string_view name() const;
  /// Named scalar parameters, in declaration order (SVLET lists T then a_k).
  std::vector<std::pair<std::string, double>> parameters() const;

  /// eta(y) at 0-based descending position i. Non-negative.
  double value(double y, Index i) const;
  /// Same as value() except SVLET, which is returned without the clamp at 0.
  double raw_value(double y, Index i) const;
  /// Analytic d eta / dy at fixed i; right-hand branch at a threshold point.
  double derivative(double y, Index i) const;
  double raw_derivative(double y, Index i) const;

 private:
  explicit ShrinkageRule(Variant v) : rule_(std::move(v)) {}
  Variant rule_;
};

/// Shrinks a descending, non-negative spectrum. Output is non-negative but not
/// necessarily descending (SVLET can be non-monotone).
Vector apply(const ShrinkageRule& rule, const Vector& spectrum);

/// Like apply(), without the SVLET clamp.
Vector apply_raw(const ShrinkageRule& rule, const Vector& spectrum);

double derivative(const ShrinkageRule& rule, double y, Index i);

/// Throws ContractError unless the spectrum is descending and non-negative.
void require_descending(const Vector& spectrum);

}  // namespace svshrink
