#pragma once

#include <cstdint>
#include <random>

namespace lexrule {

// Seeded generator with a fully specified output sequence: the raw
// std::mt19937_64 stream (fixed by the C++ standard) mapped to integers and
// doubles with the portable reductions below, never through <random>
// distributions whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound) by rejection sampling; bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lexrule
