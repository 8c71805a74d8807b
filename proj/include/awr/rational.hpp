#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "awr/error.hpp"

namespace awr {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) fail(ErrorCode::InvalidArgument, "zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

inline BigInt pow2(unsigned exponent) { return BigInt(1) << exponent; }

/// Exact value of a finite double as a rational (every double is a dyadic
/// rational, so no rounding happens here).
inline Rational rational_from_double(double value) {
  if (!std::isfinite(value)) fail(ErrorCode::InvalidArgument, "non-finite value");
  if (value == 0.0) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);  // value = mantissa * 2^exponent, |mantissa| in [0.5,1)
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational out{BigInt(scaled)};
  if (exponent >= 0) {
    out *= Rational(pow2(static_cast<unsigned>(exponent)));
  } else {
    out /= Rational(pow2(static_cast<unsigned>(-exponent)));
  }
  return out;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline BigInt numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

/// "num/den" in lowest terms; integers print without a denominator.
inline std::string to_string(const Rational& r) {
  auto num = numerator_of(r);
  auto den = denominator_of(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace awr
