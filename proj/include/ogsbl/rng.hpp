#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "ogsbl/types.hpp"

namespace ogsbl {

/// Seeded random stream. Gaussian variates use an explicit Box-Muller
/// transform so that output is identical across standard libraries;
/// std::normal_distribution is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed), base_seed_(seed) {}

  /// Derives an independent stream keyed off the construction seed,
  /// e.g. one stream per dataset sample.
  RngStream fork(std::uint64_t salt) const {
    std::uint64_t z = base_seed_ + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return RngStream(z ^ (z >> 31));
  }

  double uniform() {  // in [0, 1)
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t integer(std::uint64_t bound) {  // in [0, bound)
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Circular complex Gaussian with total variance var (var/2 per part).
  Complex complex_gaussian(double var = 1.0) {
    double s = std::sqrt(var / 2.0);
    double re = gaussian();
    double im = gaussian();
    return {s * re, s * im};
  }

  VecC complex_gaussian_vector(int n, double var = 1.0) {
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = complex_gaussian(var);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t base_seed_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ogsbl
