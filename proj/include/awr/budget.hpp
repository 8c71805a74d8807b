#pragma once

// Multi-round security budgets.
//
// Straightforward mutual authentication (two keys per round):
//   e'_1 = 0, e'_i = et_{i-1}, e2_i = eps + e'_i, et_i = eps1 + 2 e2_i
//   closed form: et_i = (2^i - 1) eps1 + (2^(i+1) - 2) eps
//
// Authentication with response (one key per round), eps_dot = eps + |T|/|K|:
//   e''_1 = 0, e''_i = eh_{i-1}, e3_i = eps_dot + e''_i, eh_i = eps1 + e3_i
//   closed form: eh_i = i (eps1 + eps_dot)
//
// An optional nonzero first-round key perfectness c shifts the closed forms
// by 2^i c (straightforward) and c (response variant).

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "awr/error.hpp"
#include "awr/rational.hpp"

namespace awr::budget {

struct BudgetParams {
  double eps1 = 0;  // quantum key exchange security
  double eps = 0;   // ASU2 epsilon
  BigInt tag_space = 2;
  BigInt key_space = 4;
  std::uint32_t rounds = 1;
  double initial_key_perfectness = 0;

  void validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0 && v <= 1; };
    if (!unit(eps1) || !unit(eps) || !unit(initial_key_perfectness)) {
      fail(ErrorCode::ParamOutOfRange, "epsilon values must lie in [0, 1]");
    }
    if (rounds < 1) fail(ErrorCode::ParamOutOfRange, "rounds must be >= 1");
    if (tag_space < 2 || key_space < tag_space) fail(ErrorCode::ParamOutOfRange, "need key_space >= tag_space >= 2");
  }
};

/// Parameters as exact rationals (each double converted without rounding).
struct ExactParams {
  Rational eps1, eps, tag_ratio, initial;

  explicit ExactParams(const BudgetParams& p)
      : eps1(rational_from_double(p.eps1)),
        eps(rational_from_double(p.eps)),
        tag_ratio(p.tag_space, p.key_space),
        initial(rational_from_double(p.initial_key_perfectness)) {}

  Rational eps_dot() const { return eps + tag_ratio; }
};

template <class Scalar>
struct Row {
  std::uint32_t round = 0;
  Scalar key_perfectness{};
  Scalar auth_security{};
  Scalar round_security{};

  friend bool operator==(const Row&, const Row&) = default;
};

using ExactRow = Row<Rational>;

struct BudgetRow {
  std::uint32_t round = 0;
  double key_perfectness = 0;
  double auth_security = 0;
  double round_security = 0;
  bool vacuous = false;
};

// Generic over Scalar so the same formulas serve both the exact oracle
// (Rational) and the floating-point path (double).

template <class Scalar>
Scalar power_of_two(std::uint32_t exponent) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return std::ldexp(Scalar(1), static_cast<int>(exponent));
  } else {
    return Scalar(pow2(exponent));
  }
}

template <class Scalar>
std::vector<Row<Scalar>> straightforward_recurrence(const Scalar& eps1, const Scalar& eps, const Scalar& initial,
                                                    std::uint32_t rounds) {
  std::vector<Row<Scalar>> rows;
  rows.reserve(rounds);
  Scalar previous{};
  for (std::uint32_t i = 1; i <= rounds; ++i) {
    Row<Scalar> r;
    r.round = i;
    r.key_perfectness = i == 1 ? initial : previous;
    r.auth_security = eps + r.key_perfectness;
    r.round_security = eps1 + Scalar(2) * r.auth_security;
    previous = r.round_security;
    rows.push_back(r);
  }
  return rows;
}

template <class Scalar>
Row<Scalar> straightforward_closed(const Scalar& eps1, const Scalar& eps, const Scalar& initial, std::uint32_t i) {
  const Scalar p_im1 = power_of_two<Scalar>(i - 1);
  const Scalar p_i = power_of_two<Scalar>(i);
  const Scalar p_ip1 = power_of_two<Scalar>(i + 1);
  Row<Scalar> r;
  r.round = i;
  r.key_perfectness = (p_im1 - Scalar(1)) * eps1 + (p_i - Scalar(2)) * eps + p_im1 * initial;
  r.auth_security = (p_im1 - Scalar(1)) * eps1 + (p_i - Scalar(1)) * eps + p_im1 * initial;
  r.round_security = (p_i - Scalar(1)) * eps1 + (p_ip1 - Scalar(2)) * eps + p_i * initial;
  return r;
}

template <class Scalar>
std::vector<Row<Scalar>> awr_recurrence(const Scalar& eps1, const Scalar& eps_dot, const Scalar& initial,
                                        std::uint32_t rounds) {
  std::vector<Row<Scalar>> rows;
  rows.reserve(rounds);
  Scalar previous{};
  for (std::uint32_t i = 1; i <= rounds; ++i) {
    Row<Scalar> r;
    r.round = i;
    r.key_perfectness = i == 1 ? initial : previous;
    r.auth_security = eps_dot + r.key_perfectness;
    r.round_security = eps1 + r.auth_security;
    previous = r.round_security;
    rows.push_back(r);
  }
  return rows;
}

template <class Scalar>
Row<Scalar> awr_closed(const Scalar& eps1, const Scalar& eps_dot, const Scalar& initial, std::uint32_t i) {
  const Scalar n(i);
  Row<Scalar> r;
  r.round = i;
  r.key_perfectness = (n - Scalar(1)) * (eps1 + eps_dot) + initial;
  r.auth_security = (n - Scalar(1)) * eps1 + n * eps_dot + initial;
  r.round_security = n * (eps1 + eps_dot) + initial;
  return r;
}

namespace detail {

template <class Recur, class Closed>
std::vector<BudgetRow> checked_table(std::uint32_t rounds, Recur recur, Closed closed) {
  const auto unrolled = recur(rounds);
  std::vector<BudgetRow> out;
  for (std::uint32_t i = 1; i <= rounds; ++i) {
    const ExactRow& r = unrolled[i - 1];
    if (!(r == closed(i))) {
      fail(ErrorCode::InvalidState, "closed form disagrees with the recurrence at round " + std::to_string(i));
    }
    BudgetRow row{i, to_double(r.key_perfectness), to_double(r.auth_security), to_double(r.round_security),
                  r.round_security > 1};
    out.push_back(row);
    if (row.vacuous) break;  // the bound says nothing beyond this point
  }
  return out;
}

}  // namespace detail

/// Rows computed exactly both ways (recurrence and closed form), required
/// to agree, then rounded to double. Emission stops after the first row
/// whose round security exceeds 1; that row is flagged vacuous.
inline std::vector<BudgetRow> straightforward_table(const BudgetParams& p) {
  p.validate();
  const ExactParams x(p);
  return detail::checked_table(
      p.rounds, [&](std::uint32_t n) { return straightforward_recurrence(x.eps1, x.eps, x.initial, n); },
      [&](std::uint32_t i) { return straightforward_closed(x.eps1, x.eps, x.initial, i); });
}

inline std::vector<BudgetRow> awr_table(const BudgetParams& p) {
  p.validate();
  const ExactParams x(p);
  const Rational eps_dot = x.eps_dot();
  return detail::checked_table(
      p.rounds, [&](std::uint32_t n) { return awr_recurrence(x.eps1, eps_dot, x.initial, n); },
      [&](std::uint32_t i) { return awr_closed(x.eps1, eps_dot, x.initial, i); });
}

struct Crossover {
  std::uint64_t rounds_straightforward = 0;
  std::uint64_t rounds_awr = 0;
};

inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

/// Largest round index whose overall security stays within `target`, per
/// scheme (0 if even the first round exceeds it; kUnbounded if the bound
/// never grows).
inline Crossover crossover_report(const BudgetParams& p, double target) {
  p.validate();
  if (!(target > 0 && target <= 1)) fail(ErrorCode::ParamOutOfRange, "target must lie in (0, 1]");
  const ExactParams x(p);
  const Rational goal = rational_from_double(target);
  Crossover c;

  if (x.eps1 + x.eps + x.initial == 0) {
    c.rounds_straightforward = kUnbounded;
  } else {
    // Doubling growth: a linear scan ends within ~1100 steps for any double.
    std::uint32_t i = 1;
    while (straightforward_closed(x.eps1, x.eps, x.initial, i).round_security <= goal) ++i;
    c.rounds_straightforward = i - 1;
  }

  const Rational step = x.eps1 + x.eps_dot();
  if (goal < x.initial + step) {
    c.rounds_awr = 0;
  } else {
    const Rational q = (goal - x.initial) / step;
    const BigInt whole = numerator_of(q) / denominator_of(q);
    c.rounds_awr = whole > BigInt(kUnbounded) ? kUnbounded : whole.convert_to<std::uint64_t>();
  }
  return c;
}

inline constexpr std::string_view kBudgetCsvHeader = "scheme,round,key_perfectness,auth_security,round_security,vacuous";

inline void write_csv(std::ostream& out, std::string_view scheme, const std::vector<BudgetRow>& rows) {
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.*s,%u,%.17g,%.17g,%.17g,%s\n", static_cast<int>(scheme.size()), scheme.data(),
                  r.round, r.key_perfectness, r.auth_security, r.round_security, r.vacuous ? "true" : "false");
    out << buf;
  }
}

}  // namespace awr::budget
