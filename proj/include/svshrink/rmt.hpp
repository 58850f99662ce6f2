#pragma once

// Large-matrix laws for Y = X + W with W_ij ~ N(0, 1/m) and n/m -> beta.

#include "svshrink/spectral.hpp"

namespace svshrink {

class AspectRatio {
 public:
  explicit AspectRatio(double beta);
  // beta = min(n, m) / max(n, m), so orientation does not matter.
  static AspectRatio of(const MatrixShape& shape);

  double beta() const noexcept { return beta_; }
  double lower_edge() const noexcept;  // 1 - sqrt(beta)
  double upper_edge() const noexcept;  // 1 + sqrt(beta)
  double transition() const noexcept;  // beta^(1/4)

 private:
  double beta_;
};

/// Limiting density of the calibrated noise singular values on
/// [lower_edge, upper_edge]; zero outside. For beta = 1 the value at w = 0 is
/// the continuous extension 2/pi.
double quarter_circle_pdf(double w, const AspectRatio& ar);

/// Integral of the density from the lower edge to w.
double quarter_circle_cdf(double w, const AspectRatio& ar);

/// Almost-sure limit of the observed singular value produced by a signal
/// singular value x: sqrt((x + 1/x)(x + beta/x)) above the transition,
/// the bulk edge below it.
double spike_location(double x, const AspectRatio& ar);

/// Limiting |<u, u~>| and |<v, v~>| for a spike x; zero at or below the
/// transition.
double left_cosine(double x, const AspectRatio& ar);
double right_cosine(double x, const AspectRatio& ar);

/// Optimal bulk shrinker on the calibrated scale:
/// sqrt((y^2 - beta - 1)^2 - 4 beta) / y for y > 1 + sqrt(beta), else 0.
double optimal_bulk_shrink(double y, const AspectRatio& ar);
/// y-derivative of optimal_bulk_shrink (right branch at the edge, where it diverges).
double optimal_bulk_shrink_derivative(double y, const AspectRatio& ar);

/// Which dimension the calibration divides by: sqrt(rows) * sigma as used
/// for the asymptotic estimators, or sqrt(max(n, m)) * sigma as in the
/// quarter-circle normalization. They agree for square matrices.
enum class Calibration { RowCount, MaxDimension };

double calibration_scale(const MatrixShape& shape, double sigma, Calibration c);

struct RankEstimate {
  Index rank;
  double threshold;  // upper bulk edge on the calibrated scale
};

/// Counts calibrated singular values strictly above the upper bulk edge.
RankEstimate estimate_rank(const Vector& spectrum, const MatrixShape& shape, double sigma,
                           Calibration c = Calibration::MaxDimension);

enum class AsymptoticVariant {
  OptimalShrink,      // optimal bulk shrinker
  HardThreshold,      // SVHT at 4/sqrt(3)
  SoftThresholdBulk,  // SVST at 1 + sqrt(beta)
};

/// Shrunken spectrum at native scale: s * eta(y / s) with s the calibration scale.
Vector asymptotic_spectrum(const Vector& spectrum, const MatrixShape& shape, double sigma,
                           AsymptoticVariant variant, Calibration c = Calibration::RowCount);

Matrix asymptotic_denoise(const DenoiseProblem& problem, const SvdFactors& factors,
                          AsymptoticVariant variant, Calibration c = Calibration::RowCount);

}  // namespace svshrink
