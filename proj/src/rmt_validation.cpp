#include "svshrink/rmt_validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svshrink/errors.hpp"
#include "svshrink/matrix_io.hpp"
#include "svshrink/random.hpp"

namespace svshrink {

double ks_distance(const Vector& calibrated, const AspectRatio& ar) {
  std::vector<double> v(calibrated.data(), calibrated.data() + calibrated.size());
  std::sort(v.begin(), v.end());
  const double count = static_cast<double>(v.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = quarter_circle_cdf(v[i], ar);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / count - F),
                      std::abs(F - static_cast<double>(i) / count)});
  }
  return worst;
}

namespace {

// Stream ids so each law draws from its own sequence.
enum : std::uint64_t { kNoiseStream = 1, kSpikeStream = 100 };

LawCheck make_check(std::string name, double observed, double expected, double deviation,
                    double tolerance) {
  return {std::move(name), observed, expected, deviation, tolerance, deviation <= tolerance};
}

std::string label(const std::string& base, double x) { return base + " x=" + format_double(x); }

}  // namespace

std::vector<LawCheck> run_rmt_checks(const RmtCheckOptions& opts) {
  if (opts.trials < 1) throw ContractError("trials must be >= 1");
  if (opts.n < 2) throw ContractError("n must be >= 2");
  const AspectRatio ar(opts.beta);
  const Index n = opts.n;
  const Index m = static_cast<Index>(std::llround(static_cast<double>(n) / opts.beta));
  const double sigma = 1.0 / std::sqrt(static_cast<double>(std::max(n, m)));

  std::vector<LawCheck> checks;

  // Pure noise: top singular value and bulk shape.
  double worst_edge = 0.0, worst_ks = 0.0, mean_top = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    Rng rng = Rng::stream(opts.seed, kNoiseStream, static_cast<std::uint64_t>(t));
    const Vector w = singular_values(sigma * rng.gaussian(n, m));
    mean_top += w[0] / opts.trials;
    worst_edge = std::max(worst_edge, std::abs(w[0] - ar.upper_edge()));
    worst_ks = std::max(worst_ks, ks_distance(w, ar));
  }
  checks.push_back(make_check("bulk edge", mean_top, ar.upper_edge(), worst_edge, opts.edge_tolerance));
  checks.push_back(make_check("quarter-circle KS", worst_ks, 0.0, worst_ks, opts.ks_tolerance));

  // Rank-one spikes: location of y_1 and overlap of the leading singular vectors.
  for (std::size_t s = 0; s < opts.spikes.size(); ++s) {
    const double x = opts.spikes[s];
    const bool want_overlap = x == opts.overlap_spike;
    double mean_y = 0.0, mean_left = 0.0, mean_right = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
      Rng rng = Rng::stream(opts.seed, kSpikeStream + s, static_cast<std::uint64_t>(t));
      const Vector u = rng.unit_vector(n);
      const Vector v = rng.unit_vector(m);
      const Matrix Y = x * u * v.transpose() + sigma * rng.gaussian(n, m);
      if (want_overlap) {
        const SvdFactors f = svd(Y);
        mean_y += f.S[0] / opts.trials;
        mean_left += std::abs(u.dot(f.U.col(0))) / opts.trials;
        mean_right += std::abs(v.dot(f.V.col(0))) / opts.trials;
      } else {
        mean_y += singular_values(Y)[0] / opts.trials;
      }
    }
    const double rho = spike_location(x, ar);
    checks.push_back(make_check(label("spike location", x), mean_y, rho,
                                std::abs(mean_y - rho) / rho, opts.location_tolerance));
    if (want_overlap) {
      const double tu = left_cosine(x, ar);
      const double tv = right_cosine(x, ar);
      checks.push_back(make_check(label("left overlap", x), mean_left, tu, std::abs(mean_left - tu),
                                  opts.overlap_tolerance));
      checks.push_back(make_check(label("right overlap", x), mean_right, tv,
                                  std::abs(mean_right - tv), opts.overlap_tolerance));
    }
  }
  return checks;
}

}  // namespace svshrink
