#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sailor/numerics/dense.hpp"

namespace sailor::num {

using Rng = std::mt19937_64;

// Independent streams derived from one run seed. Values are part of the
// on-disk reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
  kInit = 1,
  kSplit = 2,
  kForge = 3,
  kSample = 4,
  kNoise = 5,
  kDropout = 6,
  kSynthetic = 7,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline DenseMatrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

/// Glorot/Xavier uniform initialization.
inline DenseMatrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseMatrix m(fan_in, fan_out);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

}  // namespace sailor::num
