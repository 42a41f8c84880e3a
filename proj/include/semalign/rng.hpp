#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "semalign/hash.hpp"

namespace semalign {

/**
 * Seeded PRNG with value semantics. The engine is std::mt19937_64 (its
 * output sequence is pinned by the standard); the uniform and Gaussian
 * transforms are implemented here so draws are bit-identical across
 * platforms, which the reproducibility contracts rely on.
 *
 * Copying an Rng copies its state: two copies produce identical streams.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pair cached).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from (master seed, label, index).
/// Used to hand each (trajectory, agent) worker its own stream so results
/// do not depend on execution interleaving.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = fnv1a64_u64(master);
  h = fnv1a64(label, h);
  h = fnv1a64_u64(index, h);
  return mix64(h);
}

}  // namespace semalign
