#pragma once

// Polynomial-hash almost strongly universal family over GF(2^n):
//
//   h_(a,b)(m_1..m_L) = b + sum_{i=1..L} m_i * a^i
//
// with tags and key halves in GF(2^n). Messages of at most L blocks give
// epsilon = L / 2^n; the key space has 2^(2n) members.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "awr/error.hpp"
#include "awr/gf2n.hpp"
#include "awr/rational.hpp"

namespace awr {

struct FamilyParams {
  unsigned tag_bits = 0;
  std::uint32_t max_blocks = 0;
  Rational epsilon;
  GaloisField field;

  /// Parameters of the polynomial family: epsilon = max_blocks / 2^tag_bits.
  static FamilyParams polynomial(unsigned tag_bits, std::uint32_t max_blocks) {
    if (tag_bits < 1) fail(ErrorCode::ParamOutOfRange, "tag_bits must be >= 1");
    if (max_blocks < 1) fail(ErrorCode::ParamOutOfRange, "max_blocks must be >= 1");
    GaloisField field(tag_bits);
    Rational eps(BigInt(max_blocks), pow2(tag_bits));
    if (eps > 1) fail(ErrorCode::ParamOutOfRange, "max_blocks exceeds the tag space; epsilon would exceed 1");
    return FamilyParams{tag_bits, max_blocks, eps, field};
  }

  BigInt tag_space() const { return pow2(tag_bits); }
  BigInt key_space() const { return pow2(2 * tag_bits); }

  /// |T| as a machine integer; only meaningful for enumerable widths.
  std::uint64_t tag_count() const {
    if (tag_bits > 32) fail(ErrorCode::SpaceTooLarge, "tag space not enumerable");
    return std::uint64_t{1} << tag_bits;
  }
  std::uint64_t key_count() const { return tag_count() * tag_count(); }

  /// Bytes per tag / key half at the serialization boundary.
  std::size_t block_bytes() const {
    if (tag_bits % 8 != 0) fail(ErrorCode::InvalidArgument, "tag_bits must be a multiple of 8 to serialize");
    return tag_bits / 8;
  }
};

struct AuthKey {
  Word a = 0;
  Word b = 0;

  friend bool operator==(const AuthKey& x, const AuthKey& y) noexcept { return x.a == y.a && x.b == y.b; }
  friend bool operator<(const AuthKey& x, const AuthKey& y) noexcept {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  }
};

using Tag = Word;

struct MessageBlocks {
  std::vector<Word> blocks;

  std::size_t block_count() const noexcept { return blocks.size(); }

  friend bool operator==(const MessageBlocks&, const MessageBlocks&) = default;
};

// Key index <-> key for enumerable spaces: index = a * |T| + b.
inline std::uint64_t key_index(const FamilyParams& p, const AuthKey& k) {
  return static_cast<std::uint64_t>(k.a) * p.tag_count() + static_cast<std::uint64_t>(k.b);
}

inline AuthKey key_from_index(const FamilyParams& p, std::uint64_t index) {
  const auto t = p.tag_count();
  return AuthKey{Word{index / t}, Word{index % t}};
}

/// Fixed-length message with index-th base-|T| digit expansion
/// (most significant digit first).
inline MessageBlocks message_from_index(const FamilyParams& p, std::uint64_t index, std::uint32_t blocks) {
  const auto t = p.tag_count();
  MessageBlocks msg;
  msg.blocks.assign(blocks, 0);
  for (std::size_t i = blocks; i-- > 0;) {
    msg.blocks[i] = Word{index % t};
    index /= t;
  }
  return msg;
}

/// sum_{i=1..L} m_i a^i by Horner's rule.
inline Word evaluate_polynomial(const GaloisField& field, Word a, const MessageBlocks& msg) noexcept {
  Word acc = 0;
  for (auto it = msg.blocks.rbegin(); it != msg.blocks.rend(); ++it) acc = field.mul(acc ^ *it, a);
  return acc;
}

inline Tag tag(const FamilyParams& p, const AuthKey& key, const MessageBlocks& msg) {
  if (msg.block_count() > p.max_blocks) {
    fail(ErrorCode::OverlongMessage, std::to_string(msg.block_count()) + " blocks exceed max_blocks " +
                                         std::to_string(p.max_blocks));
  }
  return key.b ^ evaluate_polynomial(p.field, key.a, msg);
}

inline bool verify(const FamilyParams& p, const AuthKey& key, const MessageBlocks& msg, Tag t) {
  return tag(p, key, msg) == t;
}

/// A key different from `key` that yields the same tag on `msg`: flip the
/// lowest bit of a, then solve for b.
inline AuthKey failure_key(const FamilyParams& p, const AuthKey& key, const MessageBlocks& msg, Tag t) {
  AuthKey alt;
  alt.a = key.a ^ 1;
  if (msg.block_count() > p.max_blocks) fail(ErrorCode::OverlongMessage, "message too long");
  alt.b = t ^ evaluate_polynomial(p.field, alt.a, msg);
  if (alt == key) fail(ErrorCode::NoAlternativeKey, "no second key consistent with the tag");
  return alt;
}

// ---------------------------------------------------------------------------
// Byte strings <-> blocks, keys/tags <-> bytes.

namespace detail {

inline void put_word(std::vector<std::uint8_t>& out, Word value, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline Word get_word(std::span<const std::uint8_t> in) {
  Word value = 0;
  for (auto byte : in) value = (value << 8) | byte;
  return value;
}

}  // namespace detail

/// Number of blocks `pad_message` produces for a byte string of this length.
inline std::size_t padded_block_count(const FamilyParams& p, std::size_t byte_len) {
  const auto w = p.block_bytes();
  return 1 + (byte_len + 1 + w - 1) / w;
}

/// Injective byte-string encoding: a one-block big-endian bit-length header,
/// then the bytes followed by 0x80 and zero fill to a block boundary.
inline MessageBlocks pad_message(const FamilyParams& p, std::span<const std::uint8_t> bytes) {
  const auto w = p.block_bytes();
  const BigInt bit_length = BigInt(bytes.size()) * 8;
  if (bit_length >= pow2(static_cast<unsigned>(8 * w))) {
    fail(ErrorCode::OverlongMessage, "bit length does not fit in the header block");
  }
  std::vector<std::uint8_t> padded(bytes.begin(), bytes.end());
  padded.push_back(0x80);
  while (padded.size() % w != 0) padded.push_back(0);

  MessageBlocks msg;
  msg.blocks.reserve(1 + padded.size() / w);
  msg.blocks.push_back(Word{static_cast<std::uint64_t>(bytes.size())} * 8);
  for (std::size_t off = 0; off < padded.size(); off += w) {
    msg.blocks.push_back(detail::get_word(std::span(padded).subspan(off, w)));
  }
  if (msg.block_count() > p.max_blocks) {
    fail(ErrorCode::OverlongMessage, "padded message needs " + std::to_string(msg.block_count()) +
                                         " blocks, max_blocks is " + std::to_string(p.max_blocks));
  }
  return msg;
}

inline MessageBlocks pad_message(const FamilyParams& p, std::string_view text) {
  return pad_message(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::vector<std::uint8_t> tag_to_bytes(const FamilyParams& p, Tag t) {
  std::vector<std::uint8_t> out;
  detail::put_word(out, t, p.block_bytes());
  return out;
}

inline Tag tag_from_bytes(const FamilyParams& p, std::span<const std::uint8_t> bytes) {
  if (bytes.size() != p.block_bytes()) fail(ErrorCode::FrameMalformed, "tag has wrong width");
  return detail::get_word(bytes);
}

inline std::vector<std::uint8_t> key_to_bytes(const FamilyParams& p, const AuthKey& k) {
  std::vector<std::uint8_t> out;
  detail::put_word(out, k.a, p.block_bytes());
  detail::put_word(out, k.b, p.block_bytes());
  return out;
}

inline AuthKey key_from_bytes(const FamilyParams& p, std::span<const std::uint8_t> bytes) {
  const auto w = p.block_bytes();
  if (bytes.size() != 2 * w) fail(ErrorCode::FrameMalformed, "key has wrong width");
  return AuthKey{detail::get_word(bytes.first(w)), detail::get_word(bytes.subspan(w))};
}

// ---------------------------------------------------------------------------
// Exhaustive check of the two defining conditions.

struct CheckReport {
  bool condition1_exact = false;
  Rational condition2_max;
  Rational epsilon;
  // Witness of the maximum in condition 2: messages by index, tags.
  std::uint64_t worst_m1 = 0, worst_m2 = 0;
  std::uint64_t worst_t1 = 0, worst_t2 = 0;

  bool passes() const { return condition1_exact && condition2_max <= epsilon; }
};

inline constexpr std::uint64_t kAsu2EnumerationLimit = std::uint64_t{1} << 24;

/// Number of fixed-length messages (|T|^max_blocks), or 0 on overflow past the limit.
inline std::uint64_t message_space_size(const FamilyParams& p) {
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < p.max_blocks; ++i) {
    if (p.tag_bits > 24) return 0;
    n *= p.tag_count();
    if (n > kAsu2EnumerationLimit) return 0;
  }
  return n;
}

/// Enumerates every key and every message of exactly max_blocks blocks.
/// Shorter block sequences are the same polynomial as their zero-extension,
/// so they are not distinct members of the message space.
inline CheckReport check_asu2(const FamilyParams& p) {
  const std::uint64_t msgs = message_space_size(p);
  if (p.tag_bits > 12 || msgs == 0 ||
      p.key_count() > kAsu2EnumerationLimit / msgs) {
    fail(ErrorCode::SpaceTooLarge, "|T|^2 * |M| exceeds 2^24 for tag_bits=" + std::to_string(p.tag_bits) +
                                       ", max_blocks=" + std::to_string(p.max_blocks));
  }
  const std::uint64_t tags = p.tag_count();
  const std::uint64_t keys = p.key_count();

  // table[m * keys + k] = h_k(m)
  std::vector<std::uint16_t> table(msgs * keys);
  for (std::uint64_t m = 0; m < msgs; ++m) {
    const auto msg = message_from_index(p, m, p.max_blocks);
    for (std::uint64_t k = 0; k < keys; ++k) {
      table[m * keys + k] = static_cast<std::uint16_t>(tag(p, key_from_index(p, k), msg));
    }
  }

  CheckReport report;
  report.epsilon = p.epsilon;

  // Condition 1: every tag value is hit by exactly |K|/|T| keys.
  std::vector<std::vector<std::uint64_t>> preimages(msgs, std::vector<std::uint64_t>(tags, 0));
  report.condition1_exact = true;
  for (std::uint64_t m = 0; m < msgs; ++m) {
    for (std::uint64_t k = 0; k < keys; ++k) ++preimages[m][table[m * keys + k]];
    for (auto c : preimages[m]) {
      if (c * tags != keys) report.condition1_exact = false;
    }
  }

  // Condition 2: max over m1 != m2, t1, t2 of |{k : h_k(m1)=t1, h_k(m2)=t2}| / |{k : h_k(m1)=t1}|.
  std::uint64_t best_num = 0, best_den = 1;
  std::vector<std::uint32_t> joint(tags * tags);
  auto consider = [&](std::uint64_t num, std::uint64_t den, std::uint64_t m1, std::uint64_t m2, std::uint64_t t1,
                      std::uint64_t t2) {
    if (den == 0) return;
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      report.worst_m1 = m1;
      report.worst_m2 = m2;
      report.worst_t1 = t1;
      report.worst_t2 = t2;
    }
  };
  std::vector<std::uint32_t> scaled(keys);
  for (std::uint64_t m1 = 0; m1 < msgs; ++m1) {
    for (std::uint64_t k = 0; k < keys; ++k) scaled[k] = static_cast<std::uint32_t>(table[m1 * keys + k] * tags);
    for (std::uint64_t m2 = m1 + 1; m2 < msgs; ++m2) {
      const std::uint16_t* row2 = &table[m2 * keys];
      std::fill(joint.begin(), joint.end(), 0u);
      for (std::uint64_t k = 0; k < keys; ++k) ++joint[scaled[k] + row2[k]];
      if (report.condition1_exact) {
        // Uniform marginals: every denominator is |K|/|T|, so only the largest cell matters.
        const auto it = std::max_element(joint.begin(), joint.end());
        const auto cell = static_cast<std::uint64_t>(it - joint.begin());
        consider(*it, keys / tags, m1, m2, cell / tags, cell % tags);
        continue;
      }
      // Both orientations from one joint histogram.
      for (std::uint64_t t1 = 0; t1 < tags; ++t1) {
        for (std::uint64_t t2 = 0; t2 < tags; ++t2) {
          const std::uint64_t c = joint[t1 * tags + t2];
          consider(c, preimages[m1][t1], m1, m2, t1, t2);
          consider(c, preimages[m2][t2], m2, m1, t2, t1);
        }
      }
    }
  }
  report.condition2_max = Rational(BigInt(best_num), BigInt(best_den));
  return report;
}

}  // namespace awr
