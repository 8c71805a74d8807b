#pragma once

// Arithmetic in binary extension fields GF(2^n), 1 <= n <= 128.
//
// Elements are stored as the low n bits of an unsigned 128-bit word; bit i is
// the coefficient of x^i. Each supported width has one fixed reduction
// polynomial so that tags computed by independent implementations agree.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "awr/error.hpp"

namespace awr {

using Word = unsigned __int128;

struct ReductionPolynomial {
  unsigned degree;
  Word low_terms;  // the polynomial minus its x^degree term
};

/// Fixed low-weight irreducible for each supported width, or nullopt.
constexpr std::optional<ReductionPolynomial> reduction_polynomial(unsigned bits) noexcept {
  switch (bits) {
    case 1: return ReductionPolynomial{1, 0x1};        // x + 1
    case 2: return ReductionPolynomial{2, 0x3};        // x^2 + x + 1
    case 3: return ReductionPolynomial{3, 0x3};        // x^3 + x + 1
    case 4: return ReductionPolynomial{4, 0x3};        // x^4 + x + 1
    case 5: return ReductionPolynomial{5, 0x5};        // x^5 + x^2 + 1
    case 6: return ReductionPolynomial{6, 0x3};        // x^6 + x + 1
    case 7: return ReductionPolynomial{7, 0x3};        // x^7 + x + 1
    case 8: return ReductionPolynomial{8, 0x1B};       // x^8 + x^4 + x^3 + x + 1
    case 16: return ReductionPolynomial{16, 0x2D};     // x^16 + x^5 + x^3 + x^2 + 1
    case 32: return ReductionPolynomial{32, 0x8D};     // x^32 + x^7 + x^3 + x^2 + 1
    case 64: return ReductionPolynomial{64, 0x1B};     // x^64 + x^4 + x^3 + x + 1
    case 128: return ReductionPolynomial{128, 0x87};   // x^128 + x^7 + x^2 + x + 1
    default: return std::nullopt;
  }
}

class GaloisField {
 public:
  explicit GaloisField(unsigned bits) {
    auto poly = reduction_polynomial(bits);
    if (!poly) fail(ErrorCode::ParamOutOfRange, "unsupported field width " + std::to_string(bits));
    bits_ = bits;
    low_terms_ = poly->low_terms;
    mask_ = bits == 128 ? ~Word{0} : ((Word{1} << bits) - 1);
  }

  unsigned bits() const noexcept { return bits_; }
  Word mask() const noexcept { return mask_; }
  Word low_terms() const noexcept { return low_terms_; }

  bool contains(Word x) const noexcept { return (x & ~mask_) == 0; }

  static constexpr Word add(Word x, Word y) noexcept { return x ^ y; }

  /// Shift-and-add multiplication, reducing on every doubling step.
  Word mul(Word x, Word y) const noexcept {
    const Word top = Word{1} << (bits_ - 1);
    Word acc = 0;
    for (int i = static_cast<int>(bits_) - 1; i >= 0; --i) {
      const bool carry = (acc & top) != 0;
      acc = (acc << 1) & mask_;
      if (carry) acc ^= low_terms_;
      if ((y >> i) & 1) acc ^= x;
    }
    return acc;
  }

  Word pow(Word x, Word exponent) const noexcept {
    Word result = 1;
    while (exponent != 0) {
      if (exponent & 1) result = mul(result, x);
      x = mul(x, x);
      exponent >>= 1;
    }
    return result;
  }

  /// Multiplicative inverse via x^(2^n - 2); inverse(0) is 0.
  Word inverse(Word x) const noexcept {
    const Word order_minus_one = mask_;  // 2^n - 1
    return pow(x, order_minus_one - 1);
  }

  friend bool operator==(const GaloisField& a, const GaloisField& b) noexcept { return a.bits_ == b.bits_; }

 private:
  unsigned bits_ = 0;
  Word low_terms_ = 0;
  Word mask_ = 0;
};

/// Hex rendering without leading zeros (at least one digit).
inline std::string to_hex(Word value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.insert(out.begin(), kDigits[static_cast<unsigned>(value & 0xF)]);
    value >>= 4;
  }
  return out;
}

}  // namespace awr
