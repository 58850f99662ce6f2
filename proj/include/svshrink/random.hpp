#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cstdint>

#include "svshrink/spectral.hpp"

namespace svshrink {

std::uint64_t splitmix64(std::uint64_t x);

// Portable Gaussian source: Boost's mt19937_64 and ziggurat normal produce the
// same stream on every platform for a given Boost release.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for one (cell, trial) pair; parallel and serial runs
  // see identical draws.
  static Rng stream(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial);

  double normal();
  // Column-major fill.
  Matrix gaussian(Index rows, Index cols);
  Vector unit_vector(Index dim);

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace svshrink
