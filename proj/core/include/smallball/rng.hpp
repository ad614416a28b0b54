#pragma once

// Counter-based random numbers for deterministic parallel Monte Carlo.
//
// Every trial owns an independent generator keyed by the experiment seed and
// addressed by (stream, trial index). The mapping is Philox4x32-10:
//
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (trial & 0xffffffff, trial >> 32, stream, block)
//
// where `block` counts the 128-bit outputs already drawn by that trial.
// Each 128-bit block yields two 64-bit words (lo word first). Doubles use the
// top 53 bits of a word. Normals use the Box-Muller transform on two uniforms
// and return the cosine branch first, then the cached sine branch.
//
// This derivation is frozen: changing it changes every reported number.

#include <array>
#include <cstdint>
#include <limits>

namespace sblab {

/// Stream identifiers. Each names one source of randomness inside one
/// experiment; values are part of the frozen derivation.
enum class Stream : std::uint32_t {
  kOperatorEntries = 1,
  kSubspace = 2,
  kGaussianMoment = 3,
  kModelSamples = 4,
  kSbaCheck = 5,
  kCoordCount = 6,
  kBasis = 7,
  kSignal = 8,
  kConvolution = 9,
  kLp = 10,
  kTest = 100,
};

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// The Philox4x32 bijection with 10 rounds.
PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

/// splitmix64 finalizer; used to derive per-grid-point seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for grid point `index` of a sweep with base seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

class TrialRng {
 public:
  using result_type = std::uint64_t;

  TrialRng(std::uint64_t seed, Stream stream, std::uint64_t trial) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  void refill() noexcept;

  PhiloxKey key_;
  PhiloxBlock counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sblab
