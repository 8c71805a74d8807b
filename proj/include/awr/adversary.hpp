#pragma once

// Attack strategies against the one-time MAC and the key-revealing response,
// with exhaustive (exact) and seeded Monte Carlo success-rate estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "awr/asu2.hpp"
#include "awr/error.hpp"
#include "awr/keys.hpp"
#include "awr/rational.hpp"
#include "awr/rng.hpp"

namespace awr {

enum class EstimateMode { Auto, Exhaustive, Sampled };

/// Monte Carlo acceptance band, in standard errors.
inline constexpr double kBandSigmas = 4.0;

/// Key spaces at or below this size are enumerated when mode is Auto.
inline constexpr std::uint64_t kExhaustiveKeyLimit = std::uint64_t{1} << 16;

struct RateEstimate {
  std::string attack;
  std::string params;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0;
  double stderr_ = 0;
  Rational bound;
  bool exhaustive = false;
  bool pass = false;

  Rational exact_rate() const { return Rational(BigInt(successes), BigInt(trials)); }
};

inline constexpr std::string_view kRateCsvHeader = "attack,params,trials,successes,rate,stderr,bound,pass";

inline void write_csv_row(std::ostream& out, const RateEstimate& e) {
  char rate[64], se[64], bound[64];
  std::snprintf(rate, sizeof rate, "%.12g", e.rate);
  std::snprintf(se, sizeof se, "%.12g", e.stderr_);
  std::snprintf(bound, sizeof bound, "%.12g", to_double(e.bound));
  out << e.attack << ',' << e.params << ',' << e.trials << ',' << e.successes << ',' << rate << ',' << se << ','
      << bound << ',' << (e.pass ? "true" : "false") << '\n';
}

namespace detail {

inline std::string describe(const FamilyParams& p) {
  return "tag_bits=" + std::to_string(p.tag_bits) + ";max_blocks=" + std::to_string(p.max_blocks);
}

inline bool use_exhaustive(const FamilyParams& p, EstimateMode mode) {
  if (mode == EstimateMode::Exhaustive) {
    if (p.tag_bits > 8) fail(ErrorCode::SpaceTooLarge, "exhaustive mode needs |K| <= 2^16");
    return true;
  }
  if (mode == EstimateMode::Sampled) return false;
  return p.tag_bits <= 8;
}

/// Key for trial i: two consecutive counters of the key stream.
inline AuthKey trial_key(const FamilyParams& p, const CounterRng& rng, std::uint64_t trial) {
  auto draw = [&](std::uint64_t c) {
    auto b = rng.block(c);
    Word w = (Word{b[3]} << 96) | (Word{b[2]} << 64) | (Word{b[1]} << 32) | Word{b[0]};
    return w & p.field.mask();
  };
  return AuthKey{draw(2 * trial), draw(2 * trial + 1)};
}

inline Word trial_word(const FamilyParams& p, const CounterRng& rng, std::uint64_t trial) {
  auto b = rng.block(trial);
  Word w = (Word{b[3]} << 96) | (Word{b[2]} << 64) | (Word{b[1]} << 32) | Word{b[0]};
  return w & p.field.mask();
}

/// Runs `count_range(begin, end)` over [0, trials) split across workers and
/// sums the success counts. Each trial's randomness depends only on its
/// index, so the total is independent of the split.
template <class Fn>
std::uint64_t parallel_count(std::uint64_t trials, Fn count_range) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t workers = std::min<std::uint64_t>(hw, std::max<std::uint64_t>(1, trials / 65536));
  if (workers <= 1) return count_range(0, trials);
  std::vector<std::uint64_t> partial(workers, 0);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (trials + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk, hi = std::min(trials, lo + chunk);
    pool.emplace_back([&, w, lo, hi] { partial[w] = count_range(lo, hi); });
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (auto c : partial) total += c;
  return total;
}

inline void finish_sampled(RateEstimate& e, const Rational& target, bool upper_only) {
  e.rate = static_cast<double>(e.successes) / static_cast<double>(e.trials);
  e.stderr_ = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(e.trials));
  const double t = to_double(target);
  const double band = kBandSigmas * e.stderr_;
  e.pass = upper_only ? e.rate <= t + band : std::abs(e.rate - t) <= band;
}

inline void finish_exhaustive(RateEstimate& e, const Rational& target, bool upper_only) {
  e.exhaustive = true;
  e.rate = static_cast<double>(e.successes) / static_cast<double>(e.trials);
  e.stderr_ = 0;
  const Rational exact = e.exact_rate();
  e.pass = upper_only ? exact <= target : exact == target;
}

enum Stream : std::uint64_t { kKeyStream = 1, kEveStream = 2 };

}  // namespace detail

// ---------------------------------------------------------------------------
// Impersonation: Eve submits a fixed (m_E, t_E) without seeing any traffic.

inline RateEstimate estimate_impersonation(const FamilyParams& p, std::uint64_t trials, std::uint64_t seed,
                                           EstimateMode mode = EstimateMode::Auto,
                                           const MessageBlocks& forged = MessageBlocks{{1}}, Tag forged_tag = 0) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  RateEstimate e;
  e.attack = "impersonation";
  e.params = detail::describe(p);
  e.bound = Rational(BigInt(1), p.tag_space());
  if (detail::use_exhaustive(p, mode)) {
    e.trials = p.key_count();
    for (std::uint64_t k = 0; k < e.trials; ++k) {
      if (tag(p, key_from_index(p, k), forged) == forged_tag) ++e.successes;
    }
    detail::finish_exhaustive(e, e.bound, false);
    return e;
  }
  const CounterRng keys(seed, detail::kKeyStream);
  e.trials = trials;
  e.successes = detail::parallel_count(trials, [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) s += tag(p, detail::trial_key(p, keys, i), forged) == forged_tag;
    return s;
  });
  detail::finish_sampled(e, e.bound, false);
  return e;
}

// ---------------------------------------------------------------------------
// Substitution: Eve sees (m, h_k(m)) and replaces it with (m', t').

using SubstitutionRule = std::function<std::pair<MessageBlocks, Tag>(const MessageBlocks&, Tag)>;

/// Either a deterministic rule, or the randomized forgery that picks a key
/// uniformly from those consistent with the observed pair and tags `target`
/// under it.
struct SubstitutionStrategy {
  std::string name;
  SubstitutionRule rule;
  std::optional<MessageBlocks> consistent_key_target;

  static SubstitutionStrategy deterministic(std::string name, SubstitutionRule rule) {
    return {std::move(name), std::move(rule), std::nullopt};
  }
  static SubstitutionStrategy consistent_key_forgery(MessageBlocks target) {
    return {"consistent-key-forgery", {}, std::move(target)};
  }
  /// m' = m with 1 xored into the last block, t' = t.
  static SubstitutionStrategy bit_flip() {
    return deterministic("bit-flip", [](const MessageBlocks& m, Tag t) {
      MessageBlocks out = m;
      out.blocks.back() ^= 1;
      return std::pair{out, t};
    });
  }
};

/// Keys consistent with the observed pair: one b per a.
inline AuthKey consistent_key(const FamilyParams& p, const MessageBlocks& m, Tag t, Word a) {
  return AuthKey{a, t ^ evaluate_polynomial(p.field, a, m)};
}

inline RateEstimate estimate_substitution(const FamilyParams& p, const MessageBlocks& honest,
                                          const SubstitutionStrategy& strategy, std::uint64_t trials,
                                          std::uint64_t seed, EstimateMode mode = EstimateMode::Auto) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (!strategy.rule && !strategy.consistent_key_target) fail(ErrorCode::InvalidArgument, "empty strategy");
  if (strategy.consistent_key_target && *strategy.consistent_key_target == honest) {
    fail(ErrorCode::StrategyNotFiring, "forgery target equals the honest message");
  }
  RateEstimate e;
  e.attack = "substitution:" + strategy.name;
  e.params = detail::describe(p);
  e.bound = p.epsilon;

  auto deterministic_success = [&](const AuthKey& k) {
    const Tag t = tag(p, k, honest);
    auto [m2, t2] = strategy.rule(honest, t);
    if (m2 == honest && t2 == t) fail(ErrorCode::StrategyNotFiring, "rule returned the observed pair");
    return tag(p, k, m2) == t2;
  };
  auto forged_success = [&](const AuthKey& k, Word eve_a) {
    const Tag t = tag(p, k, honest);
    const AuthKey guess = consistent_key(p, honest, t, eve_a);
    const auto& target = *strategy.consistent_key_target;
    return tag(p, k, target) == tag(p, guess, target);
  };

  if (detail::use_exhaustive(p, mode)) {
    const std::uint64_t keys = p.key_count();
    if (strategy.rule) {
      e.trials = keys;
      for (std::uint64_t k = 0; k < keys; ++k) e.successes += deterministic_success(key_from_index(p, k));
    } else {
      // Average over Eve's uniform choice within the consistent set too.
      const std::uint64_t tags = p.tag_count();
      e.trials = keys * tags;
      for (std::uint64_t k = 0; k < keys; ++k) {
        const auto key = key_from_index(p, k);
        for (std::uint64_t a = 0; a < tags; ++a) e.successes += forged_success(key, Word{a});
      }
    }
    detail::finish_exhaustive(e, e.bound, true);
    return e;
  }
  const CounterRng keys(seed, detail::kKeyStream);
  const CounterRng eve(seed, detail::kEveStream);
  e.trials = trials;
  e.successes = detail::parallel_count(trials, [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const auto key = detail::trial_key(p, keys, i);
      s += strategy.rule ? deterministic_success(key) : forged_success(key, detail::trial_word(p, eve, i));
    }
    return s;
  });
  detail::finish_sampled(e, e.bound, true);
  return e;
}

/// Best deterministic substitution rule against a fixed honest message, over
/// every map t -> (m', t') with (m', t') != (m, t) and m' in the fixed-length
/// message space. The success probability is a sum over observed tags, so
/// the maximizing rule picks, per tag, the most likely (m', t').
struct SubstitutionOptimum {
  Rational probability;
  std::uint64_t honest_index = 0;
  std::vector<std::pair<std::uint64_t, Tag>> rule;  // per observed tag: (message index, forged tag)
};

namespace detail {

/// Tags of every fixed-length message under every key, plus the key
/// probabilities scaled to integers over a common denominator.
class SubstitutionTables {
 public:
  SubstitutionTables(const FamilyParams& p, const ExactKeyDistribution& keys) {
    msgs_ = message_space_size(p);
    if (msgs_ == 0 || p.tag_bits > 8) fail(ErrorCode::SpaceTooLarge, "message space not enumerable");
    if (keys.key_space_size() != p.key_count()) fail(ErrorCode::DimensionMismatch, "key distribution size");
    keys_ = p.key_count();
    tags_ = p.tag_count();
    table_.resize(msgs_ * keys_);
    for (std::uint64_t m = 0; m < msgs_; ++m) {
      const auto msg = message_from_index(p, m, p.max_blocks);
      for (std::uint64_t k = 0; k < keys_; ++k) {
        table_[m * keys_ + k] = static_cast<std::uint16_t>(tag(p, key_from_index(p, k), msg));
      }
    }
    BigInt den = 1;
    for (const auto& q : keys.probs()) den = boost::multiprecision::lcm(den, denominator_of(q));
    if (den > BigInt(std::numeric_limits<std::uint64_t>::max() / keys_)) {
      fail(ErrorCode::SpaceTooLarge, "key probabilities need too large a common denominator");
    }
    denominator_ = den.convert_to<std::uint64_t>();
    for (const auto& q : keys.probs()) {
      weight_.push_back((numerator_of(q) * (den / denominator_of(q))).convert_to<std::uint64_t>());
    }
  }

  std::uint64_t messages() const noexcept { return msgs_; }

  SubstitutionOptimum solve(std::uint64_t honest) const {
    std::vector<std::vector<std::uint64_t>> consistent(tags_);
    for (std::uint64_t k = 0; k < keys_; ++k) consistent[at(honest, k)].push_back(k);
    SubstitutionOptimum out;
    out.honest_index = honest;
    out.rule.resize(tags_);
    std::vector<std::uint64_t> weight(tags_);
    std::uint64_t total = 0;
    for (std::uint64_t t = 0; t < tags_; ++t) {
      std::uint64_t best = 0;
      bool found = false;
      for (std::uint64_t m2 = 0; m2 < msgs_; ++m2) {
        std::fill(weight.begin(), weight.end(), 0);
        for (auto k : consistent[t]) weight[at(m2, k)] += weight_[k];
        for (std::uint64_t t2 = 0; t2 < tags_; ++t2) {
          if (m2 == honest && t2 == t) continue;
          if (!found || weight[t2] > best) {
            found = true;
            best = weight[t2];
            out.rule[t] = {m2, Tag{t2}};
          }
        }
      }
      total += best;
    }
    out.probability = Rational(BigInt(total), BigInt(denominator_));
    return out;
  }

 private:
  std::uint16_t at(std::uint64_t m, std::uint64_t k) const { return table_[m * keys_ + k]; }

  std::uint64_t msgs_ = 0, keys_ = 0, tags_ = 0, denominator_ = 1;
  std::vector<std::uint16_t> table_;
  std::vector<std::uint64_t> weight_;
};

}  // namespace detail

inline SubstitutionOptimum max_substitution_probability(const FamilyParams& p, std::uint64_t honest_index,
                                                        const ExactKeyDistribution& keys) {
  const detail::SubstitutionTables tables(p, keys);
  if (honest_index >= tables.messages()) fail(ErrorCode::InvalidArgument, "honest message index out of range");
  return tables.solve(honest_index);
}

/// Maximum over every honest message as well.
inline SubstitutionOptimum max_substitution_probability(const FamilyParams& p, const ExactKeyDistribution& keys) {
  const detail::SubstitutionTables tables(p, keys);
  SubstitutionOptimum best = tables.solve(0);
  for (std::uint64_t m = 1; m < tables.messages(); ++m) {
    auto r = tables.solve(m);
    if (r.probability > best.probability) best = std::move(r);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Response forgery: Eve blocks Bob's response and sends Alice a key guess.

enum class ForgeGuess { ConsistentKey, Blind };

inline RateEstimate estimate_response_forge(const FamilyParams& p, std::uint64_t trials, std::uint64_t seed,
                                            EstimateMode mode = EstimateMode::Auto,
                                            ForgeGuess guess = ForgeGuess::ConsistentKey,
                                            const MessageBlocks& honest = MessageBlocks{{1}}) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  RateEstimate e;
  e.attack = guess == ForgeGuess::ConsistentKey ? "response-forge" : "response-forge:blind";
  e.params = detail::describe(p);
  e.bound = guess == ForgeGuess::ConsistentKey ? Rational(p.tag_space(), p.key_space())
                                               : Rational(BigInt(1), p.key_space());

  if (detail::use_exhaustive(p, mode)) {
    // Deterministic guesses: the consistent key with a = 0, or the fixed
    // key (0, 0) when Eve ignores the tag.
    e.trials = p.key_count();
    for (std::uint64_t k = 0; k < e.trials; ++k) {
      const auto key = key_from_index(p, k);
      const Tag t = tag(p, key, honest);
      const AuthKey g = guess == ForgeGuess::ConsistentKey ? consistent_key(p, honest, t, 0) : AuthKey{};
      e.successes += g == key;
    }
    detail::finish_exhaustive(e, e.bound, false);
    return e;
  }
  const CounterRng keys(seed, detail::kKeyStream);
  const CounterRng eve(seed, detail::kEveStream);
  e.trials = trials;
  e.successes = detail::parallel_count(trials, [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const auto key = detail::trial_key(p, keys, i);
      AuthKey g;
      if (guess == ForgeGuess::ConsistentKey) {
        g = consistent_key(p, honest, tag(p, key, honest), detail::trial_word(p, eve, i));
      } else {
        g = detail::trial_key(p, eve, i);
      }
      s += g == key;
    }
    return s;
  });
  detail::finish_sampled(e, e.bound, false);
  return e;
}

/// Exact optimum over all deterministic guess maps t -> k_hat:
/// sum_t max_k Pr[K = k, h_K(m) = t] (the best guess lies in A_(m,t)).
inline Rational optimal_response_forge_probability(const FamilyParams& p, const MessageBlocks& honest,
                                                   const ExactKeyDistribution& keys) {
  if (keys.key_space_size() != p.key_count()) fail(ErrorCode::DimensionMismatch, "key distribution size");
  std::vector<Rational> best(p.tag_count(), Rational(0));
  for (std::uint64_t k = 0; k < p.key_count(); ++k) {
    const auto t = static_cast<std::size_t>(tag(p, key_from_index(p, k), honest));
    if (keys[k] > best[t]) best[t] = keys[k];
  }
  Rational total(0);
  for (const auto& b : best) total += b;
  return total;
}

}  // namespace awr
