#pragma once

// Multi-round in-process simulation with pool refills and a seeded
// tampering channel.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "awr/adversary.hpp"
#include "awr/asu2.hpp"
#include "awr/keys.hpp"
#include "awr/protocol.hpp"
#include "awr/rng.hpp"

namespace awr {

struct TamperSpec {
  enum class Kind { None, FlipTag, FlipTranscript, ForgeResponse, DropResponse };
  Kind kind = Kind::None;
  double probability = 0;

  /// "none" or "<kind>:<probability>" with kind one of flip-tag,
  /// flip-transcript, forge-response, drop-response.
  static TamperSpec parse(const std::string& text) {
    if (text == "none") return {};
    const auto colon = text.find(':');
    const auto name = text.substr(0, colon);
    double prob = 1.0;
    if (colon != std::string::npos) {
      try {
        prob = std::stod(text.substr(colon + 1));
      } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad tamper probability in '" + text + "'");
      }
    }
    if (!(prob >= 0 && prob <= 1)) fail(ErrorCode::ParseError, "tamper probability must lie in [0, 1]");
    if (name == "flip-tag") return {Kind::FlipTag, prob};
    if (name == "flip-transcript") return {Kind::FlipTranscript, prob};
    if (name == "forge-response") return {Kind::ForgeResponse, prob};
    if (name == "drop-response") return {Kind::DropResponse, prob};
    fail(ErrorCode::ParseError, "unknown tamper spec '" + text + "'");
  }
};

struct SimulationConfig {
  std::uint64_t rounds = 1000;
  Scheme scheme = Scheme::Awr;
  Mode mode = Mode::Plain;
  TamperSpec tamper;
  FamilyParams family = FamilyParams::polynomial(64, 1024);
  std::size_t transcript_bytes = 64;
  std::uint64_t seed = 1;
};

struct SimulationSummary {
  std::uint64_t rounds = 0;
  std::uint64_t tampered = 0;
  std::uint64_t alice_accepts = 0;
  std::uint64_t bob_accepts = 0;
  std::uint64_t tampered_accepts = 0;  // tampered rounds Alice still accepted
  std::uint64_t keys_consumed = 0;
  std::vector<AuthKey> handout_log;

  double keys_per_round() const { return rounds ? static_cast<double>(keys_consumed) / static_cast<double>(rounds) : 0; }
  double alice_accept_rate() const {
    return rounds ? static_cast<double>(alice_accepts) / static_cast<double>(rounds) : 0;
  }
};

/// Runs `rounds` rounds; each round refills the pool with exactly the keys it
/// needs from the seeded key source. `on_round` sees each outcome.
template <class OnRound>
SimulationSummary run_simulation(const SimulationConfig& c, OnRound on_round) {
  enum : std::uint64_t { kTranscripts = 11, kCoins = 12, kForgery = 13, kKeys = 14 };
  SeededKeySource source(c.family, c.seed, kKeys);
  KeyPool pool(c.family);
  CounterRng transcripts(c.seed, kTranscripts);
  CounterRng coins(c.seed, kCoins);
  CounterRng forgery(c.seed, kForgery);
  const std::size_t per_round = c.scheme == Scheme::Awr ? 1 : 2;

  SimulationSummary s;
  for (std::uint64_t i = 0; i < c.rounds; ++i) {
    std::vector<std::uint8_t> bytes(c.transcript_bytes);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(transcripts.next_u64());
    const bool tamper = c.tamper.kind != TamperSpec::Kind::None && coins.next_unit() < c.tamper.probability;

    std::vector<std::uint8_t> bob_bytes = bytes;
    Channel channel;
    if (tamper) {
      switch (c.tamper.kind) {
        case TamperSpec::Kind::FlipTag:
          channel.tamper_tag = [](Tag t) { return t ^ 1; };
          channel.tamper_return_tag = [](Tag t) { return t ^ 1; };
          break;
        case TamperSpec::Kind::FlipTranscript:
          if (bob_bytes.empty()) bob_bytes.push_back(0);
          bob_bytes[0] ^= 1;
          break;
        case TamperSpec::Kind::ForgeResponse: {
          const Word mask = c.family.field.mask();
          const AuthKey guess{forgery.next_word(mask), forgery.next_word(mask)};
          channel.tamper_response = [guess](Response) { return Response::reveal(guess); };
          channel.tamper_return_tag = [guess](Tag) { return guess.b; };
          break;
        }
        case TamperSpec::Kind::DropResponse:
          channel.tamper_response = [](Response) { return Response::bottom(); };
          channel.tamper_return_tag = [mask = c.family.field.mask()](Tag t) { return ~t & mask; };
          break;
        case TamperSpec::Kind::None:
          break;
      }
    }

    source.refill(pool, per_round);
    const auto m_a = pad_message(c.family, bytes);
    const auto m_b = pad_message(c.family, bob_bytes);
    const RoundOutcome o = run_round(c.family, m_a, m_b, pool, channel, c.mode, c.scheme);

    ++s.rounds;
    s.tampered += tamper;
    s.alice_accepts += o.alice == Verdict::Accepted;
    s.bob_accepts += o.bob == Verdict::Accepted;
    s.tampered_accepts += tamper && o.alice == Verdict::Accepted;
    s.keys_consumed += o.keys_consumed;
    on_round(i, o);
  }
  s.handout_log = pool.handout_log();
  return s;
}

}  // namespace awr
