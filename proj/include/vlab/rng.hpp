#pragma once

#include <cmath>
#include <cstdint>

namespace vlab {

// Deterministic 64-bit stream (splitmix64). Used everywhere instead of
// std::normal_distribution so that a given seed produces the same samples
// on every standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one value per call, pair cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Derive an independent stream for a sub-task (realization index, sweep
  // point, ...). Mixing is stateless so the result does not depend on how
  // many draws the parent has made.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    Rng g(seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    return g.next_u64();
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error below 1.2e-9). Used to stratify Monte Carlo offsets over
// exact Gaussian quantiles.
double inverse_normal_cdf(double p);

}  // namespace vlab
