// rng.hpp
// Deterministic random generation. std::normal_distribution is
// implementation-defined, so the normal variates are produced by an explicit
// Box-Muller transform to keep scene synthesis byte-reproducible.

#ifndef BEAMKIT_RNG_HPP
#define BEAMKIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "beamkit/common.hpp"

namespace beamkit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1).
  double uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Complex normal_complex() {
    // Unit-variance circular complex Gaussian.
    return Complex(normal(), normal()) * M_SQRT1_2;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace beamkit

#endif  // BEAMKIT_RNG_HPP
