#include "svshrink/random.hpp"

namespace svshrink {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial) {
  return Rng(splitmix64(splitmix64(splitmix64(seed) ^ cell) ^ trial));
}

double Rng::normal() { return normal_(engine_); }

Matrix Rng::gaussian(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal();
  }
  return m;
}

Vector Rng::unit_vector(Index dim) {
  Vector v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v[i] = normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace svshrink
