#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace selfieboost {

/// splitmix64 generator. The stream is fully specified so that any
/// implementation seeded with the same value produces the same sequence.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is
  /// returned by the following call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fixed sub-stream offsets. Every consumer of randomness derives its own
/// generator from the run seed so that streams never share state.
enum class Stream : std::uint64_t {
  kTeacher = 1,
  kFeatures = 2,
  kLearnerInit = 3,
  kBoost = 4,
  kWiden = 5,
  kAdaBoost = 6,
  kPlainSgd = 7,
  kVerify = 8,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  SeededRng mix(seed + static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL +
                index * 0x8CB92BA72F3D8DD7ULL);
  return mix.next_u64();
}

}  // namespace selfieboost
