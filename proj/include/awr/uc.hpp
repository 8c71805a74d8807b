#pragma once

// Exact real-vs-ideal comparison for authentication-with-response.
//
// Real world: TAG under k, the distinguisher tampers (m, t) -> (m', t'),
// VRFY gives x' in M u {Bottom}, ENC turns Bob's verdict into z in {k, Bottom},
// the distinguisher tampers z -> z', and COMP gives Alice f = [z' == k].
//
// Ideal world: the simulator tags with its own key drawn from the same
// distribution, so the wire view (m, t) is identical. The functionality
// delivers m only if (m', t') == (m, t); otherwise x' = Bottom, z = Bottom and
// f = 0 whatever z' is.
//
// Outcome tables are exact rationals over (m, y, y', x', z, z', f).

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "awr/asu2.hpp"
#include "awr/error.hpp"
#include "awr/keys.hpp"
#include "awr/rational.hpp"

namespace awr::uc {

using MsgIndex = std::uint32_t;
using KeyIndex = std::uint32_t;

/// (message index, tag) as seen on the wire.
struct WirePair {
  MsgIndex m = 0;
  std::uint32_t t = 0;
  friend auto operator<=>(const WirePair&, const WirePair&) = default;
};

/// How the distinguisher rewrites Bob's response for one observed (m, t).
struct RespAction {
  enum class Kind : std::uint8_t { Forward, Bottom, Guess };
  Kind kind = Kind::Forward;
  KeyIndex guess = 0;

  static RespAction forward() { return {}; }
  static RespAction bottom() { return {Kind::Bottom, 0}; }
  static RespAction guess_key(KeyIndex k) { return {Kind::Guess, k}; }

  std::optional<KeyIndex> apply(std::optional<KeyIndex> z) const {
    switch (kind) {
      case Kind::Forward: return z;
      case Kind::Bottom: return std::nullopt;
      case Kind::Guess: return guess;
    }
    return z;
  }
  friend bool operator==(const RespAction&, const RespAction&) = default;
};

/// Finite message space {0..size-1} embedded as fixed-length block messages.
struct Setup {
  FamilyParams params;
  std::uint32_t msg_space = 0;

  std::uint32_t tags() const { return static_cast<std::uint32_t>(params.tag_count()); }
  std::uint32_t keys() const { return static_cast<std::uint32_t>(params.key_count()); }
  std::size_t pair_index(WirePair y) const { return std::size_t{y.m} * tags() + y.t; }
  std::size_t pair_count() const { return std::size_t{msg_space} * tags(); }
};

inline constexpr std::uint64_t kUcEnumerationLimit = std::uint64_t{1} << 20;

inline void check_setup(const Setup& s) {
  if (s.params.tag_bits > 8) fail(ErrorCode::SpaceTooLarge, "tag space too large for exact enumeration");
  if (s.msg_space < 1) fail(ErrorCode::InvalidArgument, "message space must be nonempty");
  const auto available = message_space_size(s.params);
  if (available != 0 && s.msg_space > available) {
    fail(ErrorCode::InvalidArgument, "message space exceeds |T|^max_blocks");
  }
  const std::uint64_t size = s.params.key_count() * s.msg_space * s.params.tag_count();
  if (size > kUcEnumerationLimit) fail(ErrorCode::SpaceTooLarge, "|K|*|M|*|T| exceeds 2^20");
}

/// Deterministic distinguisher: message distribution plus lookup tables,
/// indexed by the observed pair, for the tamper and the response rewrite.
struct DistinguisherStrategy {
  std::vector<Rational> msg_dist;
  std::vector<WirePair> tamper;
  std::vector<RespAction> respond;

  static DistinguisherStrategy identity(const Setup& s) {
    DistinguisherStrategy d;
    d.msg_dist.assign(s.msg_space, Rational(BigInt(1), BigInt(s.msg_space)));
    d.tamper.resize(s.pair_count());
    d.respond.assign(s.pair_count(), RespAction::forward());
    for (MsgIndex m = 0; m < s.msg_space; ++m) {
      for (std::uint32_t t = 0; t < s.tags(); ++t) d.tamper[s.pair_index({m, t})] = {m, t};
    }
    return d;
  }

  bool tamper_is_identity(const Setup& s) const {
    for (std::size_t i = 0; i < tamper.size(); ++i) {
      if (s.pair_index(tamper[i]) != i) return false;
    }
    return true;
  }

  void validate(const Setup& s) const {
    if (msg_dist.size() != s.msg_space || tamper.size() != s.pair_count() || respond.size() != s.pair_count()) {
      fail(ErrorCode::DimensionMismatch, "strategy tables do not cover the setup");
    }
    Rational total(0);
    for (const auto& p : msg_dist) {
      if (p < 0) fail(ErrorCode::InvalidArgument, "negative message probability");
      total += p;
    }
    if (total != 1) fail(ErrorCode::InvalidArgument, "message distribution does not sum to 1");
    for (const auto& y : tamper) {
      if (y.m >= s.msg_space || y.t >= s.tags()) fail(ErrorCode::InvalidArgument, "tamper target out of range");
    }
    for (const auto& r : respond) {
      if (r.kind == RespAction::Kind::Guess && r.guess >= s.keys()) {
        fail(ErrorCode::InvalidArgument, "guessed key out of range");
      }
    }
  }
};

struct JointOutcome {
  MsgIndex m = 0;
  WirePair y;
  WirePair y_prime;
  std::optional<MsgIndex> x_prime;
  std::optional<KeyIndex> z;
  std::optional<KeyIndex> z_prime;
  bool f = false;
  friend auto operator<=>(const JointOutcome&, const JointOutcome&) = default;
};

enum class World { Real, Ideal };

struct JointDistribution {
  World world = World::Real;
  std::map<JointOutcome, Rational> table;

  Rational total() const {
    Rational sum(0);
    for (const auto& [_, p] : table) sum += p;
    return sum;
  }

  /// Probability of every outcome satisfying `pred`.
  template <class Pred>
  Rational probability(Pred pred) const {
    Rational sum(0);
    for (const auto& [o, p] : table) {
      if (pred(o)) sum += p;
    }
    return sum;
  }
};

namespace detail {

/// Tag of every message in the setup under every key.
class TagTable {
 public:
  explicit TagTable(const Setup& s) : tags_(s.keys()) {
    rows_.resize(s.msg_space);
    for (MsgIndex m = 0; m < s.msg_space; ++m) {
      const auto msg = message_from_index(s.params, m, s.params.max_blocks);
      rows_[m].resize(s.keys());
      for (KeyIndex k = 0; k < s.keys(); ++k) {
        rows_[m][k] = static_cast<std::uint32_t>(tag(s.params, key_from_index(s.params, k), msg));
      }
    }
  }
  std::uint32_t operator()(MsgIndex m, KeyIndex k) const { return rows_[m][k]; }

 private:
  std::uint32_t tags_;
  std::vector<std::vector<std::uint32_t>> rows_;
};

/// Outcome of one (world, m, key) branch under a single action pair.
inline JointOutcome run_branch(World world, const TagTable& h, MsgIndex m, KeyIndex k, WirePair y_prime,
                               const RespAction& respond) {
  JointOutcome o;
  o.m = m;
  o.y = {m, h(m, k)};
  o.y_prime = y_prime;
  bool bob_accepts = false;
  if (world == World::Real) {
    bob_accepts = h(y_prime.m, k) == y_prime.t;  // VRFY
    if (bob_accepts) o.x_prime = y_prime.m;
  } else {
    bob_accepts = y_prime == o.y;  // F delivers only untouched messages
    if (bob_accepts) o.x_prime = m;
  }
  if (bob_accepts) o.z = k;  // ENC(1) = k, ENC(0) = Bottom
  o.z_prime = respond.apply(o.z);
  const bool comp = o.z_prime.has_value() && *o.z_prime == k;  // COMP
  o.f = world == World::Real ? comp : (bob_accepts && comp);
  return o;
}

inline Rational table_distance(const std::map<JointOutcome, Rational>& p, const std::map<JointOutcome, Rational>& q) {
  Rational sum(0);
  auto a = p.begin();
  auto b = q.begin();
  while (a != p.end() || b != q.end()) {
    if (b == q.end() || (a != p.end() && a->first < b->first)) {
      sum += a->second;
      ++a;
    } else if (a == p.end() || b->first < a->first) {
      sum += b->second;
      ++b;
    } else {
      const Rational d = a->second - b->second;
      sum += d < 0 ? Rational(-d) : d;
      ++a;
      ++b;
    }
  }
  return sum / 2;
}

inline JointDistribution execute(World world, const DistinguisherStrategy& d, const ExactKeyDistribution& keys,
                                 const Setup& s) {
  check_setup(s);
  d.validate(s);
  if (keys.key_space_size() != s.keys()) fail(ErrorCode::DimensionMismatch, "key distribution size");
  const TagTable h(s);
  JointDistribution out;
  out.world = world;
  for (MsgIndex m = 0; m < s.msg_space; ++m) {
    if (d.msg_dist[m] == 0) continue;
    for (KeyIndex k = 0; k < s.keys(); ++k) {
      if (keys[k] == 0) continue;
      const std::size_t y = s.pair_index({m, h(m, k)});
      const auto o = run_branch(world, h, m, k, d.tamper[y], d.respond[y]);
      out.table[o] += d.msg_dist[m] * keys[k];
    }
  }
  return out;
}

}  // namespace detail

inline JointDistribution real_exec(const DistinguisherStrategy& d, const ExactKeyDistribution& keys, const Setup& s) {
  return detail::execute(World::Real, d, keys, s);
}

inline JointDistribution ideal_exec(const DistinguisherStrategy& d, const ExactKeyDistribution& keys, const Setup& s) {
  return detail::execute(World::Ideal, d, keys, s);
}

inline Rational trace_distance(const JointDistribution& p, const JointDistribution& q) {
  return detail::table_distance(p.table, q.table);
}

inline Rational exact_uc_distance(const DistinguisherStrategy& d, const ExactKeyDistribution& keys, const Setup& s) {
  return trace_distance(real_exec(d, keys, s), ideal_exec(d, keys, s));
}

/// |T|/|K| + epsilon + epsilon'.
inline Rational theorem_bound(const Setup& s, const ExactKeyDistribution& keys) {
  return Rational(s.params.tag_space(), s.params.key_space()) + s.params.epsilon + epsilon_perfectness(keys);
}

/// Marginal over (m, y, y') of an outcome table.
inline std::map<std::tuple<MsgIndex, WirePair, WirePair>, Rational> wire_marginal(const JointDistribution& d) {
  std::map<std::tuple<MsgIndex, WirePair, WirePair>, Rational> out;
  for (const auto& [o, p] : d.table) out[{o.m, o.y, o.y_prime}] += p;
  return out;
}

// ---------------------------------------------------------------------------
// Search over the declared strategy family.

struct SearchFamily {
  bool allow_tamper = true;  // false: the tamper map is the identity
  bool allow_guess = true;   // response rewrites may guess keys in A_y
};

struct SearchResult {
  DistinguisherStrategy best_strategy;
  Rational max_distance;
  Rational bound;
  Rational slack;
  std::uint64_t strategies_considered = 0;  // per-pair action evaluations
  std::string strategy_id;
};

/// Compact rendering of the non-trivial actions of a strategy.
inline std::string describe(const DistinguisherStrategy& d, const Setup& s) {
  std::string out;
  for (MsgIndex m = 0; m < s.msg_space; ++m) {
    if (d.msg_dist[m] == 0) continue;
    if (!out.empty()) out += '|';
    out += "m" + std::to_string(m) + "@" + to_string(d.msg_dist[m]);
    for (std::uint32_t t = 0; t < s.tags(); ++t) {
      const auto i = s.pair_index({m, t});
      const auto& y2 = d.tamper[i];
      const auto& r = d.respond[i];
      if (y2 == WirePair{m, t} && r.kind == RespAction::Kind::Forward) continue;
      out += ";t" + std::to_string(t) + ">" + std::to_string(y2.m) + "." + std::to_string(y2.t);
      switch (r.kind) {
        case RespAction::Kind::Forward: out += "/fwd"; break;
        case RespAction::Kind::Bottom: out += "/bot"; break;
        case RespAction::Kind::Guess: out += "/k" + std::to_string(r.guess); break;
      }
    }
  }
  return out;
}

/// Maximizes the exact distance over the family: tamper maps are arbitrary
/// lookup tables (m, t) -> (m', t'); response rewrites are forward, Bottom, or
/// a guess k_hat in A_(m,t) = {k : h_k(m) = t}.
///
/// Outcomes carry (m, y), so the distance splits into independent blocks per
/// observed pair, weighted by P_X(m). Per-pair maxima therefore combine into
/// the family maximum, and a point mass on the best message maximizes over
/// message distributions. The assembled strategy is re-evaluated end to end.
inline SearchResult max_distance_search(const ExactKeyDistribution& keys, const Setup& s, SearchFamily family = {}) {
  check_setup(s);
  if (keys.key_space_size() != s.keys()) fail(ErrorCode::DimensionMismatch, "key distribution size");
  const detail::TagTable h(s);

  SearchResult result;
  DistinguisherStrategy identity = DistinguisherStrategy::identity(s);
  Rational best_message_value(-1);
  MsgIndex best_message = 0;
  std::vector<WirePair> best_tamper = identity.tamper;
  std::vector<RespAction> best_respond = identity.respond;

  for (MsgIndex m = 0; m < s.msg_space; ++m) {
    Rational message_value(0);
    for (std::uint32_t t = 0; t < s.tags(); ++t) {
      const WirePair y{m, t};
      std::vector<KeyIndex> consistent;
      for (KeyIndex k = 0; k < s.keys(); ++k) {
        if (h(m, k) == t && keys[k] != 0) consistent.push_back(k);
      }
      std::vector<RespAction> responses{RespAction::forward(), RespAction::bottom()};
      if (family.allow_guess) {
        for (KeyIndex k = 0; k < s.keys(); ++k) {
          if (h(m, k) == t) responses.push_back(RespAction::guess_key(k));
        }
      }
      std::vector<WirePair> targets;
      if (family.allow_tamper) {
        for (MsgIndex m2 = 0; m2 < s.msg_space; ++m2) {
          for (std::uint32_t t2 = 0; t2 < s.tags(); ++t2) targets.push_back({m2, t2});
        }
      } else {
        targets.push_back(y);
      }

      Rational best(-1);
      WirePair arg_tamper = y;
      RespAction arg_respond = RespAction::forward();
      for (const auto& y2 : targets) {
        for (const auto& r : responses) {
          std::map<JointOutcome, Rational> real, ideal;
          for (auto k : consistent) {
            real[detail::run_branch(World::Real, h, m, k, y2, r)] += keys[k];
            ideal[detail::run_branch(World::Ideal, h, m, k, y2, r)] += keys[k];
          }
          const Rational value = detail::table_distance(real, ideal);
          ++result.strategies_considered;
          if (value > best) {
            best = value;
            arg_tamper = y2;
            arg_respond = r;
          }
        }
      }
      message_value += best;
      best_tamper[s.pair_index(y)] = arg_tamper;
      best_respond[s.pair_index(y)] = arg_respond;
    }
    if (message_value > best_message_value) {
      best_message_value = message_value;
      best_message = m;
    }
  }

  DistinguisherStrategy best = identity;
  best.msg_dist.assign(s.msg_space, Rational(0));
  best.msg_dist[best_message] = 1;
  for (std::uint32_t t = 0; t < s.tags(); ++t) {
    const auto i = s.pair_index({best_message, t});
    best.tamper[i] = best_tamper[i];
    best.respond[i] = best_respond[i];
  }

  result.max_distance = exact_uc_distance(best, keys, s);
  if (result.max_distance != best_message_value) {
    fail(ErrorCode::InvalidState, "block decomposition disagrees with the full evaluation");
  }
  result.bound = theorem_bound(s, keys);
  result.slack = result.bound - result.max_distance;
  result.strategy_id = describe(best, s);
  result.best_strategy = std::move(best);
  return result;
}

inline constexpr std::string_view kSearchCsvHeader =
    "params,key_dist,strategy_id,distance_num,distance_den,bound_num,bound_den,slack";

inline void write_csv_row(std::ostream& out, const Setup& s, const std::string& key_dist, const SearchResult& r) {
  out << "tag_bits=" << s.params.tag_bits << ";max_blocks=" << s.params.max_blocks << ";msg_space=" << s.msg_space
      << ',' << key_dist << ',' << r.strategy_id << ',' << numerator_of(r.max_distance) << ','
      << denominator_of(r.max_distance) << ',' << numerator_of(r.bound) << ',' << denominator_of(r.bound) << ','
      << to_string(r.slack) << '\n';
}

}  // namespace awr::uc
