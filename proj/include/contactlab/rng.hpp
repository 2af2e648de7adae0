#pragma once

#include <cstdint>
#include <random>

#include "contactlab/types.hpp"

namespace contactlab {

/// Named, seedable generator used for random test vectors and quasi-random
/// point sets. The generator name and seed are recorded in every report.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  Vec vector(int n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Uniform point on the unit sphere in R^ambient_dim.
  Vec sphere_point(int ambient_dim) {
    Vec x(ambient_dim);
    double n2 = 0.0;
    do {
      for (int i = 0; i < ambient_dim; ++i) x[i] = normal();
      n2 = x.squaredNorm();
    } while (n2 < 1e-12);
    return x / std::sqrt(n2);
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
};

}  // namespace contactlab
