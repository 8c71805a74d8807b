#pragma once

// Key distributions, trace distance, and the one-time key pool.

#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "awr/asu2.hpp"
#include "awr/error.hpp"
#include "awr/rational.hpp"
#include "awr/rng.hpp"

namespace awr {

namespace detail {

template <class Scalar>
Scalar abs_value(const Scalar& x) {
  return x < 0 ? Scalar(-x) : x;
}

template <class Scalar>
bool sums_to_one(const Scalar& total) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return std::abs(total - 1.0) <= 1e-12;
  } else {
    return total == 1;
  }
}

}  // namespace detail

/// Probability distribution over key indices 0..|K|-1. Scalar is `Rational`
/// for exact work or `double` for sampled summaries.
template <class Scalar>
class KeyDistribution {
 public:
  explicit KeyDistribution(std::vector<Scalar> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) fail(ErrorCode::InvalidArgument, "empty key space");
    Scalar total(0);
    for (const auto& p : probs_) {
      if (p < 0) fail(ErrorCode::InvalidArgument, "negative probability");
      total += p;
    }
    if (!detail::sums_to_one(total)) fail(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
  }

  static KeyDistribution uniform(std::size_t size) {
    if (size == 0) fail(ErrorCode::InvalidArgument, "empty key space");
    return KeyDistribution(std::vector<Scalar>(size, Scalar(1) / Scalar(size)));
  }

  std::size_t key_space_size() const noexcept { return probs_.size(); }
  const Scalar& operator[](std::size_t k) const { return probs_.at(k); }
  const std::vector<Scalar>& probs() const noexcept { return probs_; }

 private:
  std::vector<Scalar> probs_;
};

using ExactKeyDistribution = KeyDistribution<Rational>;

template <class Scalar>
Scalar trace_distance(const KeyDistribution<Scalar>& p, const KeyDistribution<Scalar>& q) {
  if (p.key_space_size() != q.key_space_size()) {
    fail(ErrorCode::DimensionMismatch, "key spaces differ: " + std::to_string(p.key_space_size()) + " vs " +
                                           std::to_string(q.key_space_size()));
  }
  Scalar sum(0);
  for (std::size_t k = 0; k < p.key_space_size(); ++k) sum += detail::abs_value(Scalar(p[k] - q[k]));
  return sum / Scalar(2);
}

/// Trace distance to the uniform distribution on the same key space.
template <class Scalar>
Scalar epsilon_perfectness(const KeyDistribution<Scalar>& p) {
  return trace_distance(p, KeyDistribution<Scalar>::uniform(p.key_space_size()));
}

struct BiasSpec {
  enum class Kind { Uniform, PointShift, LeakBits };
  Kind kind = Kind::Uniform;
  Rational shift;         // PointShift: mass moved from key 1 to key 0
  unsigned leaked_bits = 0;  // LeakBits: support shrinks by 2^n

  static BiasSpec uniform() { return {}; }
  static BiasSpec point_shift(Rational delta) { return {Kind::PointShift, std::move(delta), 0}; }
  static BiasSpec leak_bits(unsigned n) { return {Kind::LeakBits, Rational(0), n}; }

  /// Parses "uniform", "point_shift:<num>[/<den>]" or "leak_bits:<n>".
  static BiasSpec parse(const std::string& text) {
    if (text == "uniform") return uniform();
    const auto colon = text.find(':');
    if (colon == std::string::npos) fail(ErrorCode::ParseError, "unknown key distribution '" + text + "'");
    const auto name = text.substr(0, colon);
    const auto arg = text.substr(colon + 1);
    try {
      if (name == "point_shift") {
        const auto slash = arg.find('/');
        if (slash == std::string::npos) {
          if (arg.find_first_of(".eE") != std::string::npos) return point_shift(rational_from_double(std::stod(arg)));
          return point_shift(Rational(BigInt(arg)));
        }
        return point_shift(Rational(BigInt(arg.substr(0, slash)), BigInt(arg.substr(slash + 1))));
      }
      if (name == "leak_bits") return leak_bits(static_cast<unsigned>(std::stoul(arg)));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::ParseError, "bad key distribution argument '" + arg + "': " + e.what());
    }
    fail(ErrorCode::ParseError, "unknown key distribution '" + text + "'");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Uniform: return "uniform";
      case Kind::PointShift: return "point_shift(" + to_string(shift) + ")";
      case Kind::LeakBits: return "leak_bits(" + std::to_string(leaked_bits) + ")";
    }
    return "?";
  }
};

/// Test fixture distributions for imperfect keys. The leaked-bit variant is
/// uniform over the keys whose top n index bits are zero.
inline ExactKeyDistribution biased_distribution(const BiasSpec& spec, std::size_t key_space_size) {
  if (key_space_size < 2 || (key_space_size & (key_space_size - 1)) != 0) {
    fail(ErrorCode::ParamOutOfRange, "key space size must be a power of two >= 2");
  }
  const Rational base(BigInt(1), BigInt(key_space_size));
  std::vector<Rational> probs(key_space_size, base);
  switch (spec.kind) {
    case BiasSpec::Kind::Uniform:
      break;
    case BiasSpec::Kind::PointShift: {
      if (spec.shift < 0 || spec.shift > 1 - base) fail(ErrorCode::ParamOutOfRange, "shift out of range");
      // Mass moves onto key 0, taken from the other keys in index order.
      probs[0] += spec.shift;
      Rational remaining = spec.shift;
      for (std::size_t k = 1; k < key_space_size && remaining > 0; ++k) {
        const Rational take = remaining < probs[k] ? remaining : probs[k];
        probs[k] -= take;
        remaining -= take;
      }
      break;
    }
    case BiasSpec::Kind::LeakBits: {
      const auto log2k = static_cast<unsigned>(std::countr_zero(key_space_size));
      if (spec.leaked_bits > log2k) fail(ErrorCode::ParamOutOfRange, "cannot leak more bits than the key has");
      const std::size_t support = key_space_size >> spec.leaked_bits;
      const Rational mass(BigInt(1), BigInt(support));
      for (std::size_t k = 0; k < key_space_size; ++k) probs[k] = k < support ? mass : Rational(0);
      break;
    }
  }
  return ExactKeyDistribution(std::move(probs));
}

inline KeyDistribution<double> to_double(const ExactKeyDistribution& d) {
  std::vector<double> probs;
  probs.reserve(d.key_space_size());
  for (const auto& p : d.probs()) probs.push_back(to_double(p));
  // Renormalize rounding drift so the float invariant holds.
  double total = 0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  return KeyDistribution<double>(std::move(probs));
}

// CSV: header `key_index,probability`, one row per key. Exact distributions
// write probabilities as num/den.
inline void write_csv(std::ostream& out, const ExactKeyDistribution& d) {
  out << "key_index,probability\n";
  for (std::size_t k = 0; k < d.key_space_size(); ++k) out << k << ',' << to_string(d[k]) << '\n';
}

inline ExactKeyDistribution read_key_distribution_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("key_index,probability", 0) != 0) {
    fail(ErrorCode::ParseError, "missing key_index,probability header");
  }
  std::vector<Rational> probs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::ParseError, "malformed row: " + line);
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(0, comma));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad key index: " + line);
    }
    if (index != row) fail(ErrorCode::ParseError, "key indices must be consecutive from 0");
    auto value = line.substr(comma + 1);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    try {
      const auto slash = value.find('/');
      if (slash != std::string::npos) {
        probs.emplace_back(BigInt(value.substr(0, slash)), BigInt(value.substr(slash + 1)));
      } else if (value.find_first_of(".eE") != std::string::npos) {
        probs.push_back(rational_from_double(std::stod(value)));
      } else {
        probs.emplace_back(BigInt(value));
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad probability: " + line);
    }
    ++row;
  }
  return ExactKeyDistribution(std::move(probs));
}

// ---------------------------------------------------------------------------

/// Ordered inventory of one-time keys. The pool never generates keys; the
/// owner pushes fresh material (modelling the key source) between rounds.
class KeyPool {
 public:
  explicit KeyPool(FamilyParams params, Rational epsilon_prime_per_key = Rational(0))
      : params_(std::move(params)), epsilon_prime_(std::move(epsilon_prime_per_key)) {}

  void push(const AuthKey& key) { available_.push_back(key); }

  /// Removes and returns the front key. Throws PoolExhausted when empty; a
  /// key is never handed out twice.
  AuthKey draw() {
    if (available_.empty()) fail(ErrorCode::PoolExhausted, "no one-time keys left");
    AuthKey key = available_.front();
    if (!issued_.insert(key).second) fail(ErrorCode::InvalidState, "key already consumed once");
    available_.pop_front();
    history_.push_back(key);
    ++consumed_;
    return key;
  }

  std::size_t available() const noexcept { return available_.size(); }
  std::uint64_t consumed_count() const noexcept { return consumed_; }
  const std::vector<AuthKey>& handout_log() const noexcept { return history_; }
  const Rational& epsilon_prime_per_key() const noexcept { return epsilon_prime_; }
  const FamilyParams& params() const noexcept { return params_; }

 private:
  FamilyParams params_;
  Rational epsilon_prime_;
  std::deque<AuthKey> available_;
  std::set<AuthKey> issued_;
  std::vector<AuthKey> history_;
  std::uint64_t consumed_ = 0;
};

/// Deterministic key stream standing in for the key source.
class SeededKeySource {
 public:
  SeededKeySource(const FamilyParams& params, std::uint64_t seed, std::uint64_t stream = 0)
      : mask_(params.field.mask()), rng_(seed, stream) {}

  AuthKey next() {
    const Word a = rng_.next_word(mask_);
    const Word b = rng_.next_word(mask_);
    return AuthKey{a, b};
  }

  void refill(KeyPool& pool, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) pool.push(next());
  }

 private:
  Word mask_;
  CounterRng rng_;
};

/// Binary key file: concatenated fixed-width keys (a || b, big-endian).
inline std::vector<AuthKey> read_key_file(const FamilyParams& p, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open key file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto width = 2 * p.block_bytes();
  if (bytes.size() % width != 0) fail(ErrorCode::ParseError, "key file size is not a multiple of the key width");
  std::vector<AuthKey> keys;
  for (std::size_t off = 0; off < bytes.size(); off += width) {
    keys.push_back(key_from_bytes(p, std::span(bytes).subspan(off, width)));
  }
  return keys;
}

inline void write_key_file(const FamilyParams& p, const std::filesystem::path& path, const std::vector<AuthKey>& keys) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write key file " + path.string());
  for (const auto& k : keys) {
    auto bytes = key_to_bytes(p, k);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

inline KeyPool pool_from_keys(const FamilyParams& p, const std::vector<AuthKey>& keys) {
  KeyPool pool(p);
  for (const auto& k : keys) pool.push(k);
  return pool;
}

}  // namespace awr
