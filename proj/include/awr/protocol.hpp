#pragma once

// Authentication-with-response state machines and a two-key baseline.
//
// AWR round:  Alice --t = h_k(m_A)--> Bob;  Bob --r--> Alice
//   r = k on accept; on reject r = Bottom (plain) or a second key k' with
//   h_k'(m_B) = t' (hidden), so both responses have the same shape.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "awr/asu2.hpp"
#include "awr/error.hpp"
#include "awr/keys.hpp"

namespace awr {

enum class Mode { Plain, Hidden };
enum class Scheme { Awr, Straightforward };
enum class Verdict { Pending, Accepted, Rejected };
enum class Reason { None, CounterpartReject, Tamper, TagMismatch, Timeout };

constexpr std::string_view to_string(Mode m) noexcept { return m == Mode::Plain ? "plain" : "hidden"; }
constexpr std::string_view to_string(Scheme s) noexcept { return s == Scheme::Awr ? "awr" : "straightforward"; }
constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pending: return "pending";
    case Verdict::Accepted: return "accepted";
    case Verdict::Rejected: return "rejected";
  }
  return "?";
}
constexpr std::string_view to_string(Reason r) noexcept {
  switch (r) {
    case Reason::None: return "none";
    case Reason::CounterpartReject: return "counterpart-reject";
    case Reason::Tamper: return "tamper";
    case Reason::TagMismatch: return "tag-mismatch";
    case Reason::Timeout: return "timeout";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "plain") return Mode::Plain;
  if (s == "hidden") return Mode::Hidden;
  fail(ErrorCode::ParseError, "unknown mode '" + std::string(s) + "'");
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "awr") return Scheme::Awr;
  if (s == "straightforward") return Scheme::Straightforward;
  fail(ErrorCode::ParseError, "unknown scheme '" + std::string(s) + "'");
}

/// Bob's response: a revealed key, or Bottom (plain-mode rejection).
struct Response {
  std::optional<AuthKey> key;

  static Response bottom() { return {}; }
  static Response reveal(const AuthKey& k) { return {k}; }
  bool is_bottom() const noexcept { return !key.has_value(); }

  friend bool operator==(const Response&, const Response&) = default;
};

/// Wire payload: the key bytes, or empty for Bottom.
inline std::vector<std::uint8_t> serialize(const FamilyParams& p, const Response& r) {
  if (r.is_bottom()) return {};
  return key_to_bytes(p, *r.key);
}

inline Response parse_response(const FamilyParams& p, std::span<const std::uint8_t> payload) {
  if (payload.empty()) return Response::bottom();
  return Response::reveal(key_from_bytes(p, payload));
}

struct FinalVerdict {
  Verdict verdict = Verdict::Pending;
  Reason reason = Reason::None;
};

class AliceSession {
 public:
  enum class State { Init, TagSent, Accepted, Rejected };

  AliceSession(FamilyParams params, AuthKey key, MessageBlocks transcript)
      : params_(std::move(params)), key_(key), transcript_(std::move(transcript)) {}

  Tag send_tag() {
    if (state_ != State::Init) fail(ErrorCode::InvalidState, "tag already sent");
    const Tag t = tag(params_, key_, transcript_);
    sent_ = t;
    state_ = State::TagSent;
    return t;
  }

  /// Any response other than the session key is a failure. Bottom is a
  /// signalled rejection; any other key means the response was tampered.
  FinalVerdict receive_response(const Response& r) {
    if (state_ != State::TagSent) fail(ErrorCode::InvalidState, "no tag outstanding");
    FinalVerdict v;
    if (r.key && *r.key == key_) {
      v = {Verdict::Accepted, Reason::None};
      state_ = State::Accepted;
    } else {
      v = {Verdict::Rejected, r.is_bottom() ? Reason::CounterpartReject : Reason::Tamper};
      state_ = State::Rejected;
    }
    final_ = v;
    return v;
  }

  /// Marks an outstanding round failed (e.g. the response never arrived).
  FinalVerdict abandon(Reason why) {
    if (state_ != State::TagSent) fail(ErrorCode::InvalidState, "no tag outstanding");
    state_ = State::Rejected;
    final_ = {Verdict::Rejected, why};
    return final_;
  }

  State state() const noexcept { return state_; }
  std::optional<Tag> sent_tag() const noexcept { return sent_; }
  const AuthKey& key() const noexcept { return key_; }
  const FinalVerdict& verdict() const noexcept { return final_; }

 private:
  FamilyParams params_;
  AuthKey key_;
  MessageBlocks transcript_;
  State state_ = State::Init;
  std::optional<Tag> sent_;
  FinalVerdict final_;
};

class BobSession {
 public:
  enum class State { Init, Responded, Done };

  BobSession(FamilyParams params, AuthKey key, MessageBlocks transcript)
      : params_(std::move(params)), key_(key), transcript_(std::move(transcript)) {}

  Response receive_tag(Tag received, Mode mode) {
    if (state_ != State::Init) fail(ErrorCode::InvalidState, "tag already processed");
    const bool ok = tag(params_, key_, transcript_) == received;
    Response r;
    if (ok) {
      r = Response::reveal(key_);
    } else if (mode == Mode::Hidden) {
      r = Response::reveal(failure_key(params_, key_, transcript_, received));
    } else {
      r = Response::bottom();
    }
    verdict_ = ok ? Verdict::Accepted : Verdict::Rejected;
    response_ = r;
    state_ = State::Responded;
    return r;
  }

  /// Closes the session once the peer's result (if any) has been seen.
  void finish() {
    if (state_ != State::Responded) fail(ErrorCode::InvalidState, "nothing to finish");
    state_ = State::Done;
  }

  State state() const noexcept { return state_; }
  Verdict verdict() const noexcept { return verdict_; }
  const std::optional<Response>& response() const noexcept { return response_; }
  const AuthKey& key() const noexcept { return key_; }

 private:
  FamilyParams params_;
  AuthKey key_;
  MessageBlocks transcript_;
  State state_ = State::Init;
  Verdict verdict_ = Verdict::Pending;
  std::optional<Response> response_;
};

/// The insecure channel between the parties. Each hook sees one message in
/// flight and returns what is delivered; empty hooks forward unchanged.
struct Channel {
  std::function<Tag(Tag)> tamper_tag;            // Alice -> Bob
  std::function<Response(Response)> tamper_response;  // Bob -> Alice (awr)
  std::function<Tag(Tag)> tamper_return_tag;     // Bob -> Alice (straightforward)

  static Channel identity() { return {}; }

  Tag forward_tag(Tag t) const { return tamper_tag ? tamper_tag(t) : t; }
  Response forward_response(Response r) const { return tamper_response ? tamper_response(std::move(r)) : r; }
  Tag forward_return_tag(Tag t) const { return tamper_return_tag ? tamper_return_tag(t) : t; }
};

struct RoundOutcome {
  Scheme scheme = Scheme::Awr;
  Mode mode = Mode::Plain;
  Verdict alice = Verdict::Pending;
  Verdict bob = Verdict::Pending;
  Reason reason = Reason::None;
  std::uint64_t keys_consumed = 0;
};

inline constexpr std::string_view kRoundCsvHeader =
    "round_index,scheme,mode,alice_verdict,bob_verdict,reason,keys_consumed";

inline void write_csv_row(std::ostream& out, std::uint64_t round_index, const RoundOutcome& o) {
  out << round_index << ',' << to_string(o.scheme) << ',' << to_string(o.mode) << ',' << to_string(o.alice) << ','
      << to_string(o.bob) << ',' << to_string(o.reason) << ',' << o.keys_consumed << '\n';
}

/// One in-process round. AWR draws one key; the straightforward baseline
/// draws two (Alice->Bob under k1, Bob->Alice under k2).
inline RoundOutcome run_round(const FamilyParams& p, const MessageBlocks& alice_transcript,
                              const MessageBlocks& bob_transcript, KeyPool& pool, const Channel& channel,
                              Mode mode, Scheme scheme) {
  const std::size_t needed = scheme == Scheme::Awr ? 1 : 2;
  if (pool.available() < needed) fail(ErrorCode::PoolExhausted, "round needs " + std::to_string(needed) + " keys");
  const auto before = pool.consumed_count();

  RoundOutcome out;
  out.scheme = scheme;
  out.mode = mode;

  if (scheme == Scheme::Awr) {
    const AuthKey k = pool.draw();
    AliceSession alice(p, k, alice_transcript);
    BobSession bob(p, k, bob_transcript);
    const Tag t = alice.send_tag();
    const Response r = bob.receive_tag(channel.forward_tag(t), mode);
    const FinalVerdict fv = alice.receive_response(channel.forward_response(r));
    bob.finish();
    out.alice = fv.verdict;
    out.bob = bob.verdict();
    out.reason = fv.reason;
  } else {
    const AuthKey k1 = pool.draw();
    const AuthKey k2 = pool.draw();
    const Tag to_bob = tag(p, k1, alice_transcript);
    out.bob = verify(p, k1, bob_transcript, channel.forward_tag(to_bob)) ? Verdict::Accepted : Verdict::Rejected;
    const Tag to_alice = tag(p, k2, bob_transcript);
    out.alice =
        verify(p, k2, alice_transcript, channel.forward_return_tag(to_alice)) ? Verdict::Accepted : Verdict::Rejected;
    out.reason = out.alice == Verdict::Accepted ? Reason::None : Reason::TagMismatch;
  }
  out.keys_consumed = pool.consumed_count() - before;
  return out;
}

}  // namespace awr
