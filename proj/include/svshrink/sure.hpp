#pragma once

// Stein's unbiased risk estimate for spectral estimators, its closed-form
// divergence, grid tuning of SVST/ATN/SVLT, and the closed-form SVLET solve.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "svshrink/shrinkage.hpp"
#include "svshrink/spectral.hpp"

namespace svshrink {

struct SureOptions {
  Tolerances tol{};
  // Break ties in the spectrum with y_i += 1e-9 * y_1 * (L - i) instead of
  // rejecting it.
  bool jitter = false;
  // Worker threads for grid tuning; results do not depend on it.
  unsigned threads = 1;
};

inline constexpr double kJitterScale = 1e-9;
inline constexpr double kSureIdentityTolerance = 1e-10;
inline constexpr double kSolveResidualTolerance = 1e-8;

/// Returns the spectrum the divergence formula may be evaluated on: strictly
/// positive with |y_i^2 - y_j^2| > gap * y_1^2 for every pair. Applies jitter
/// when opted in; otherwise throws DegenerateSpectrumError naming the pair.
Vector prepare_spectrum(const Vector& spectrum, const SureOptions& opts = {});

/// w_i = sum_{j != i} y_i / (y_i^2 - y_j^2), the per-index factor of the
/// cross term in the divergence.
Vector cross_weights(const Vector& spectrum);

double divergence(const Vector& spectrum, const ShrinkageRule& rule, const MatrixShape& shape,
                  const SureOptions& opts = {});

struct TracePoint {
  std::array<double, 3> params{};
  double sure = 0.0;
};

struct SureReport {
  ShrinkageRule rule;
  MatrixShape shape;
  double sigma;
  double sure;
  double residual;    // ||Y - F(Y)||_F^2 using the unclamped rule
  double divergence;  // div F(Y)
  // Residual with the clamped rule. Equals `residual` except for SVLET when the
  // linear combination dips below zero.
  double clamped_residual;
  std::vector<std::string> trace_columns;
  std::vector<TracePoint> trace;

  /// Relative mismatch of sure against -nm sigma^2 + residual + 2 sigma^2 div.
  double identity_error() const;
};

/// Precomputes the spectrum-only quantities so SURE for many rules costs O(L)
/// each.
class SureEvaluator {
 public:
  SureEvaluator(const Vector& spectrum, const MatrixShape& shape, double sigma,
                const SureOptions& opts = {});

  SureReport evaluate(const ShrinkageRule& rule) const;
  double divergence(const ShrinkageRule& rule) const;

  const Vector& spectrum() const noexcept { return spectrum_; }
  const Vector& weights() const noexcept { return weights_; }
  const MatrixShape& shape() const noexcept { return shape_; }
  double sigma() const noexcept { return sigma_; }
  const SureOptions& options() const noexcept { return opts_; }

 private:
  Vector spectrum_;
  Vector weights_;
  MatrixShape shape_;
  double sigma_;
  SureOptions opts_;
};

SureReport sure(const DenoiseProblem& problem, const SvdFactors& factors,
                const ShrinkageRule& rule, const SureOptions& opts = {});

struct SvletSolve {
  Matrix gram;  // M_kl = sum_i phi_k(y_i) phi_l(y_i)
  Vector rhs;   // c
  Vector coeffs;
  double condition_estimate;
  double ridge_used;
  SvletBasis basis;
  std::optional<SureReport> report;  // filled for solves over the whole spectrum
};

/// Closed-form SURE minimizer over span{phi_1..phi_K} with T = C * sigma.
SvletSolve solve_svlet(const DenoiseProblem& problem, const SvdFactors& factors, int order,
                       double constant, const SureOptions& opts = {});

/// Same system with an explicit scale, fitting only the leading `active`
/// singular values (the cross term still runs over the whole spectrum).
/// active == L reproduces solve_svlet.
SvletSolve solve_svlet(const SureEvaluator& eval, int order, double scale, Index active,
                       std::optional<double> constant = std::nullopt);

enum class TunableFamily { Svst, Atn, Svlt };

std::string_view family_name(TunableFamily f);

/// Parameter axes in tuple order: SVST (lambda), ATN (tau, gamma),
/// SVLT (p1, p2, p3). Each axis ascending.
struct GridSpec {
  std::vector<double> first;
  std::vector<double> second;
  std::vector<double> third;

  /// lambda/tau/p3 equally spaced on (0, 0.5 y_1] (100 points, 50 for p3),
  /// gamma on {1..20}, p2 on {1..L}, p1 = 100.
  static GridSpec defaults(TunableFamily family, const Vector& spectrum);
  std::size_t size(TunableFamily family) const;
};

ShrinkageRule grid_rule(TunableFamily family, const std::array<double, 3>& params);

/// Exhaustive SURE minimization over the grid. Ties go to the
/// lexicographically smallest parameter tuple. The report carries the trace in
/// enumeration order.
SureReport tune_grid(const DenoiseProblem& problem, const SvdFactors& factors,
                     TunableFamily family, const GridSpec& grid, const SureOptions& opts = {});
SureReport tune_grid(const SureEvaluator& eval, TunableFamily family, const GridSpec& grid);

}  // namespace svshrink
