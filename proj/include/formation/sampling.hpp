#pragma once

#include <cstdint>
#include <random>

#include "formation/scenario.hpp"

namespace formation {

// Seeded uniform sampling. Doubles are built directly from the 64-bit engine
// output so sequences do not depend on the standard library's distributions.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int index(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

  Vector in_box(const Box& box) {
    Vector v(box.lower.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = uniform(box.lower[k], box.upper[k]);
    return v;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace formation
