#pragma once

// Monte Carlo checks of the quarter-circle law, the spike location map and
// the singular-vector phase transition at finite size.

#include <cstdint>
#include <string>
#include <vector>

#include "svshrink/rmt.hpp"

namespace svshrink {

struct LawCheck {
  std::string name;
  double observed;
  double expected;
  double deviation;  // compared against tolerance
  double tolerance;
  bool passed;
};

struct RmtCheckOptions {
  Index n = 400;
  double beta = 1.0;
  int trials = 10;
  std::uint64_t seed = 0;
  std::vector<double> spikes{1.5, 2.0, 3.0};
  double overlap_spike = 2.0;
  double edge_tolerance = 0.1;
  double ks_tolerance = 0.05;
  double location_tolerance = 0.05;  // relative
  double overlap_tolerance = 0.05;
};

/// Sup-distance between the empirical CDF of calibrated singular values and
/// the quarter-circle CDF.
double ks_distance(const Vector& calibrated, const AspectRatio& ar);

std::vector<LawCheck> run_rmt_checks(const RmtCheckOptions& opts);

}  // namespace svshrink
