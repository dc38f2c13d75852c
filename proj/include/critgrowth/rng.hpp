#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace critgrowth {

/// Philox4x32-10 counter-based generator. The 64-bit key is the master seed;
/// the upper half of the 128-bit counter selects an independent stream and the
/// lower half counts blocks within it. Satisfies UniformRandomBitGenerator.
class Philox {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Ten-round bijection applied to one counter block.
  static Block encrypt(Block counter, Key key);

 private:
  void refill();

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

/// Stream identifier for (tag, a, b) sub-streams; a SplitMix64-style mix so
/// distinct tuples land on unrelated counters.
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0);

namespace stream_tag {
inline constexpr std::uint64_t kEnsemble = 1;
inline constexpr std::uint64_t kLyapunov = 2;
inline constexpr std::uint64_t kMoments = 3;
inline constexpr std::uint64_t kSigma2 = 4;
inline constexpr std::uint64_t kAudit = 5;
inline constexpr std::uint64_t kTransverse = 6;
}  // namespace stream_tag

}  // namespace critgrowth
