#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace esrp {

/// Counter-based Philox4x64-10 generator.
///
/// The raw 64-bit output stream is bit-compatible with numpy's Philox bit
/// generator for key = (seed, stream): numpy advances the counter before
/// producing each block, and that convention is mirrored here. The fourth
/// counter word selects a substream; distinct (seed, stream, substream)
/// triples index provably disjoint counter ranges, so parallel consumers
/// never overlap.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0,
                  std::uint64_t substream = 0)
      : key_{seed, stream}, counter_{0, 0, 0, substream} {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      next_block();
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform draw on the open interval (0, 1); never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential draw with the given rate, by inversion.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b,
                               std::uint64_t& hi) {
    unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    return static_cast<std::uint64_t>(prod);
  }

  void next_block() {
    if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0)
      ++counter_[3];
    std::array<std::uint64_t, 4> c = counter_;
    std::array<std::uint64_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi0, hi1;
      std::uint64_t lo0 = mulhilo(kMul0, c[0], hi0);
      std::uint64_t lo1 = mulhilo(kMul1, c[2], hi1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    block_ = c;
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4;
};

}  // namespace esrp
