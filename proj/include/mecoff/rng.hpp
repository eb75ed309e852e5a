#pragma once

#include <array>
#include <cstdint>

namespace mecoff {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is identified by the 128-bit key {seed, stream_id}; draws walk
/// the 256-bit counter. Output block b of a stream is philox(counter = b+1,
/// key), so the sequence matches numpy.random.Philox(key=[seed, stream_id])
/// word for word. Scenario generation gives each device its own stream.
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64(std::uint64_t seed, std::uint64_t stream_id) : key_{seed, stream_id} {}

  /// The raw bijection: ten rounds of Philox on (counter, key).
  static Block encrypt(Block counter, Key key);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Circularly-symmetric complex Gaussian with unit variance, returned as
  /// (re, im); each part has variance 1/2. Box-Muller, two uniforms per draw.
  std::array<double, 2> complex_normal();

 private:
  Key key_;
  Block counter_{0, 0, 0, 0};
  Block buffer_{};
  int used_ = 4;
};

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mecoff
