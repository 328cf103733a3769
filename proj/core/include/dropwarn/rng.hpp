#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dropwarn {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so the few we need are derived by hand to keep streams identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller, one variate per call.
  double Normal();

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer: derives independent sub-seeds (per student, per arm).
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t HashString(std::string_view text);

}  // namespace dropwarn
