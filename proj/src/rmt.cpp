#include "svshrink/rmt.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

#include "svshrink/errors.hpp"
#include "svshrink/shrinkage.hpp"

namespace svshrink {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
}

AspectRatio::AspectRatio(double beta) : beta_(beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ContractError("aspect ratio beta must lie in (0, 1]");
}

AspectRatio AspectRatio::of(const MatrixShape& shape) {
  return AspectRatio(static_cast<double>(shape.min_dim()) / static_cast<double>(shape.max_dim()));
}

double AspectRatio::lower_edge() const noexcept { return 1.0 - std::sqrt(beta_); }
double AspectRatio::upper_edge() const noexcept { return 1.0 + std::sqrt(beta_); }
double AspectRatio::transition() const noexcept { return std::sqrt(std::sqrt(beta_)); }

double quarter_circle_pdf(double w, const AspectRatio& ar) {
  const double lo = ar.lower_edge();
  const double hi = ar.upper_edge();
  if (w < lo || w > hi) return 0.0;
  if (ar.beta() == 1.0) return std::sqrt(4.0 - w * w) / kPi;
  if (w <= 0.0) return 0.0;
  const double v = (w * w - lo * lo) * (hi * hi - w * w);
  return v > 0.0 ? std::sqrt(v) / (kPi * ar.beta() * w) : 0.0;
}

double quarter_circle_cdf(double w, const AspectRatio& ar) {
  const double lo = ar.lower_edge();
  const double hi = ar.upper_edge();
  if (w <= lo) return 0.0;
  if (w >= hi) return 1.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double v =
      integrator.integrate([&ar](double t) { return quarter_circle_pdf(t, ar); }, lo, w);
  return std::clamp(v, 0.0, 1.0);
}

double spike_location(double x, const AspectRatio& ar) {
  if (!(x > 0.0)) throw ContractError("spike location needs x > 0");
  if (x <= ar.transition()) return ar.upper_edge();
  return std::sqrt((x + 1.0 / x) * (x + ar.beta() / x));
}

double left_cosine(double x, const AspectRatio& ar) {
  if (!(x > ar.transition())) return 0.0;
  const double x2 = x * x;
  return std::sqrt((x2 * x2 - ar.beta()) / (x2 * (x2 + ar.beta())));
}

double right_cosine(double x, const AspectRatio& ar) {
  if (!(x > ar.transition())) return 0.0;
  const double x2 = x * x;
  return std::sqrt((x2 * x2 - ar.beta()) / (x2 * (x2 + 1.0)));
}

double optimal_bulk_shrink(double y, const AspectRatio& ar) {
  if (!(y > ar.upper_edge())) return 0.0;
  const double b = y * y - ar.beta() - 1.0;
  const double g = b * b - 4.0 * ar.beta();
  return g > 0.0 ? std::sqrt(g) / y : 0.0;
}

double optimal_bulk_shrink_derivative(double y, const AspectRatio& ar) {
  if (y < ar.upper_edge()) return 0.0;
  const double b = y * y - ar.beta() - 1.0;
  const double g = b * b - 4.0 * ar.beta();
  if (!(g > 1e-12 * b * b)) return std::numeric_limits<double>::infinity();
  const double root = std::sqrt(g);
  return 2.0 * b / root - root / (y * y);
}

double calibration_scale(const MatrixShape& shape, double sigma, Calibration c) {
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  const Index dim = c == Calibration::RowCount ? shape.rows() : shape.max_dim();
  return std::sqrt(static_cast<double>(dim)) * sigma;
}

RankEstimate estimate_rank(const Vector& spectrum, const MatrixShape& shape, double sigma,
                           Calibration c) {
  const double scale = calibration_scale(shape, sigma, c);
  const double edge = AspectRatio::of(shape).upper_edge();
  Index count = 0;
  for (Index i = 0; i < spectrum.size(); ++i) {
    if (spectrum[i] / scale > edge) ++count;
  }
  return {count, edge};
}

Vector asymptotic_spectrum(const Vector& spectrum, const MatrixShape& shape, double sigma,
                           AsymptoticVariant variant, Calibration c) {
  const double scale = calibration_scale(shape, sigma, c);
  const AspectRatio ar = AspectRatio::of(shape);
  switch (variant) {
    case AsymptoticVariant::HardThreshold:
      return apply(ShrinkageRule::svht(4.0 / std::sqrt(3.0) * scale), spectrum);
    case AsymptoticVariant::SoftThresholdBulk:
      return apply(ShrinkageRule::svst(ar.upper_edge() * scale), spectrum);
    case AsymptoticVariant::OptimalShrink:
      break;
  }
  require_descending(spectrum);
  Vector out(spectrum.size());
  for (Index i = 0; i < spectrum.size(); ++i) {
    out[i] = scale * optimal_bulk_shrink(spectrum[i] / scale, ar);
  }
  return out;
}

Matrix asymptotic_denoise(const DenoiseProblem& problem, const SvdFactors& factors,
                          AsymptoticVariant variant, Calibration c) {
  if (factors.shape() != problem.shape()) {
    throw DimensionError("factors do not match the problem shape");
  }
  return reconstruct(factors,
                     asymptotic_spectrum(factors.S, problem.shape(), problem.sigma(), variant, c));
}

}  // namespace svshrink
