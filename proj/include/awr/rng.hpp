#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
// pure function of (seed, stream, counter), so trials can be split across
// workers in any order and still reproduce bit-for-bit.

#include <array>
#include <cstdint>

#include "awr/gf2n.hpp"

namespace awr {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Stream of 32-bit words for one (seed, stream) pair. `at(i)` is random
/// access; `next*()` walks the counter sequentially.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t start = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        counter_(start) {}

  PhiloxBlock block(std::uint64_t counter) const noexcept {
    return philox4x32_10({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
  }

  PhiloxBlock next_block() noexcept { return block(counter_++); }

  std::uint64_t next_u64() noexcept {
    auto b = next_block();
    return (std::uint64_t{b[1]} << 32) | b[0];
  }

  /// 128 uniform bits masked to `mask`.
  Word next_word(Word mask) noexcept {
    auto b = next_block();
    Word w = (Word{b[3]} << 96) | (Word{b[2]} << 64) | (Word{b[1]} << 32) | Word{b[0]};
    return w & mask;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    for (;;) {
      auto v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

}  // namespace awr
