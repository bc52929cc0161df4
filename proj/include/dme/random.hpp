#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>

namespace dme {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one client's randomness in one round. Everything a client draws
/// (subsample rows, sign flips, sampling coins) is a pure function of this
/// triple, so the server can regenerate it from the seed alone.
struct SketchSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t client_index = 0;
  std::uint64_t round_index = 0;

  auto operator<=>(const SketchSeed&) const = default;
};

/// Independent sub-streams derived from the same seed.
enum class StreamDomain : std::uint64_t {
  kSketch = 0x736b65746368ULL,
  kSampling = 0x73616d706c65ULL,
  kData = 0x64617461ULL,
  kCalibration = 0x63616c6962ULL,
};

constexpr std::uint64_t derive_key(const SketchSeed& seed, StreamDomain domain) noexcept {
  std::uint64_t key = mix64(seed.master_seed ^ 0x9e3779b97f4a7c15ULL);
  key = mix64(key ^ (seed.client_index + 0x632be59bd9b4e019ULL));
  key = mix64(key ^ (seed.round_index + 0x85157af5ed2ee7d3ULL));
  return mix64(key ^ static_cast<std::uint64_t>(domain));
}

/// Counter-based generator: output j is mix64(key + j * gamma). Streams keyed
/// on different seeds never share state, so evaluation order is irrelevant.
/// Satisfies UniformRandomBitGenerator, but the members below are preferred
/// because std distributions are not bit-identical across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  constexpr CounterRng(const SketchSeed& seed, StreamDomain domain) noexcept
      : key_(derive_key(seed, domain)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound); bound > 0. Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t bound) noexcept {
    auto m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// +1 or -1 with equal probability.
  double rademacher() noexcept {
    if (bits_left_ == 0) {
      bits_ = (*this)();
      bits_left_ = 64;
    }
    const bool bit = bits_ & 1U;
    bits_ >>= 1;
    --bits_left_;
    return bit ? -1.0 : 1.0;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dme
