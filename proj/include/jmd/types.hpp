// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace jmd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random source. Every generator in the library takes one of these
/// explicitly; there is no global state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Stream for (master seed, index, purpose). Distinct tuples give
  /// statistically independent streams.
  static RandomStream derive(std::uint64_t master, std::uint64_t index, std::uint64_t purpose = 0) {
    return RandomStream(mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL)) ^
                        mix64(purpose * 0x8cb92ba72f3d8dd7ULL + 1));
  }

  double normal() { return gauss_(engine_); }

  /// CN(0,1): (g1 + i g2) / sqrt(2).
  Complex complex_normal() {
    const double re = gauss_(engine_);
    const double im = gauss_(engine_);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

  CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
    return m;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace jmd
