#pragma once

// Framed TCP transport for one authentication round per connection.
//
// Frame: "AWR1" | type (1 byte) | payload length (4 bytes, big-endian) | payload
// HELLO payload: mode (1) | scheme (1) | tag_bits (2, BE) | max_blocks (4, BE)
// RESULT payload: 1 byte, 1 = accepted, 0 = rejected
//
// The channel is deliberately unprotected; authenticity comes only from the
// round itself.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "awr/asu2.hpp"
#include "awr/error.hpp"
#include "awr/keys.hpp"
#include "awr/protocol.hpp"
#include "awr/rng.hpp"

namespace awr::net {

enum class MsgType : std::uint8_t {
  TranscriptChunk = 0x01,
  Tag = 0x02,
  Response = 0x03,
  Result = 0x04,
  Hello = 0x05,
  Abort = 0x06,
};

inline constexpr std::array<std::uint8_t, 4> kMagic{'A', 'W', 'R', '1'};
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::uint32_t kMaxPayload = std::uint32_t{1} << 20;
inline constexpr std::size_t kChunkSize = 4096;
inline constexpr std::chrono::milliseconds kDefaultTimeout{10000};

struct Frame {
  MsgType type = MsgType::Abort;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x06; }

inline std::vector<std::uint8_t> encode(const Frame& f) {
  if (f.payload.size() > kMaxPayload) fail(ErrorCode::FrameMalformed, "payload exceeds 1 MiB");
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>(f.type));
  const auto n = static_cast<std::uint32_t>(f.payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

/// Validates a 9-byte header and returns (type, payload length).
inline std::pair<MsgType, std::uint32_t> parse_header(std::span<const std::uint8_t> header) {
  if (header.size() != kHeaderSize) fail(ErrorCode::FrameMalformed, "short header");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) fail(ErrorCode::FrameMalformed, "bad magic");
  if (!known_type(header[4])) fail(ErrorCode::FrameMalformed, "unknown message type");
  std::uint32_t n = 0;
  for (int i = 5; i < 9; ++i) n = (n << 8) | header[i];
  if (n > kMaxPayload) fail(ErrorCode::FrameMalformed, "payload exceeds 1 MiB");
  return {static_cast<MsgType>(header[4]), n};
}

/// Parses exactly one frame occupying all of `bytes`.
inline Frame decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) fail(ErrorCode::FrameMalformed, "short frame");
  auto [type, n] = parse_header(bytes.first(kHeaderSize));
  if (bytes.size() != kHeaderSize + n) fail(ErrorCode::FrameMalformed, "length field disagrees with frame size");
  return Frame{type, {bytes.begin() + kHeaderSize, bytes.end()}};
}

// ---------------------------------------------------------------------------
// Sockets.

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void close() noexcept {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  /// Unblocks readers on other threads.
  void shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void write_all(std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::TransportError, std::string("send: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Reads exactly `out.size()` bytes or throws Timeout / TransportError.
  void read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t off = 0;
    while (off < out.size()) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) fail(ErrorCode::Timeout, "no data before deadline");
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::TransportError, std::string("poll: ") + std::strerror(errno));
      }
      if (ready == 0) fail(ErrorCode::Timeout, "no data before deadline");
      const ssize_t n = ::recv(fd_, out.data() + off, out.size() - off, 0);
      if (n == 0) fail(ErrorCode::TransportError, "connection closed by peer");
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        fail(ErrorCode::TransportError, std::string("recv: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_ = -1;
};

inline void send_frame(Socket& s, const Frame& f) { s.write_all(encode(f)); }

inline Frame read_frame(Socket& s, std::chrono::milliseconds timeout) {
  std::array<std::uint8_t, kHeaderSize> header{};
  s.read_exact(header, timeout);
  auto [type, n] = parse_header(header);
  Frame f{type, std::vector<std::uint8_t>(n)};
  if (n > 0) s.read_exact(f.payload, timeout);
  return f;
}

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port" or ":port" / "port" (loopback).
  static Address parse(const std::string& text) {
    const auto colon = text.rfind(':');
    Address a;
    std::string port = text;
    if (colon != std::string::npos) {
      if (colon > 0) a.host = text.substr(0, colon);
      port = text.substr(colon + 1);
    }
    try {
      const auto v = std::stoul(port);
      if (v > 65535) throw std::out_of_range("port");
      a.port = static_cast<std::uint16_t>(v);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad address '" + text + "'");
    }
    return a;
  }

  std::string str() const { return host + ":" + std::to_string(port); }
};

inline Socket connect_to(const Address& addr, std::chrono::milliseconds timeout = kDefaultTimeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto port = std::to_string(addr.port);
  if (int rc = ::getaddrinfo(addr.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    fail(ErrorCode::TransportError, "resolve " + addr.host + ": " + ::gai_strerror(rc));
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error = "no addresses";
  // Retry briefly so a peer that is still binding can be reached.
  while (true) {
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!s.valid()) continue;
      if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
        int one = 1;
        ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        ::freeaddrinfo(res);
        return s;
      }
      last_error = std::strerror(errno);
    }
    if (std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::freeaddrinfo(res);
  fail(ErrorCode::TransportError, "connect " + addr.str() + ": " + last_error);
}

class Listener {
 public:
  /// Binds host:port; port 0 picks an ephemeral port (see `port()`).
  explicit Listener(const Address& addr) {
    sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock_.valid()) fail(ErrorCode::TransportError, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(addr.port);
    if (::inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1) {
      fail(ErrorCode::TransportError, "listen address must be IPv4: " + addr.host);
    }
    if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
      fail(ErrorCode::TransportError, "bind " + addr.str() + ": " + std::strerror(errno));
    }
    if (::listen(sock_.fd(), 16) != 0) fail(ErrorCode::TransportError, std::string("listen: ") + std::strerror(errno));
    socklen_t len = sizeof sa;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    host_ = addr.host;
  }

  std::uint16_t port() const noexcept { return port_; }
  Address address() const { return Address{host_, port_}; }

  Socket accept(std::chrono::milliseconds timeout = kDefaultTimeout) {
    pollfd pfd{sock_.fd(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (ready == 0) fail(ErrorCode::Timeout, "no incoming connection");
    if (ready < 0) fail(ErrorCode::TransportError, std::string("poll: ") + std::strerror(errno));
    Socket s(::accept(sock_.fd(), nullptr, nullptr));
    if (!s.valid()) fail(ErrorCode::TransportError, std::string("accept: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
  }

 private:
  Socket sock_;
  std::string host_;
  std::uint16_t port_ = 0;
};

// ---------------------------------------------------------------------------
// Session endpoints.

enum class Role { Initiator, Responder };

struct SessionConfig {
  Role role = Role::Initiator;
  Mode mode = Mode::Plain;
  Scheme scheme = Scheme::Awr;
  FamilyParams family = FamilyParams::polynomial(64, 1024);
  std::filesystem::path key_file;
  std::chrono::milliseconds timeout = kDefaultTimeout;
};

inline std::vector<std::uint8_t> hello_payload(const SessionConfig& c) {
  std::vector<std::uint8_t> p;
  p.push_back(c.mode == Mode::Plain ? 0 : 1);
  p.push_back(c.scheme == Scheme::Awr ? 0 : 1);
  p.push_back(static_cast<std::uint8_t>(c.family.tag_bits >> 8));
  p.push_back(static_cast<std::uint8_t>(c.family.tag_bits));
  for (int shift = 24; shift >= 0; shift -= 8) p.push_back(static_cast<std::uint8_t>(c.family.max_blocks >> shift));
  return p;
}

inline Frame result_frame(Verdict v) { return Frame{MsgType::Result, {static_cast<std::uint8_t>(v == Verdict::Accepted)}}; }

inline Verdict parse_result(const Frame& f) {
  if (f.type != MsgType::Result || f.payload.size() != 1) fail(ErrorCode::FrameMalformed, "bad RESULT frame");
  return f.payload[0] == 1 ? Verdict::Accepted : Verdict::Rejected;
}

inline KeyPool load_pool(const SessionConfig& c) { return pool_from_keys(c.family, read_key_file(c.family, c.key_file)); }

namespace detail {

inline void send_abort_quietly(Socket& s, std::string_view why) {
  try {
    send_frame(s, Frame{MsgType::Abort, {why.begin(), why.end()}});
  } catch (const Error&) {
  }
}

/// Reads the next frame; on a malformed frame tells the peer to abort.
inline Frame expect_frame(Socket& s, std::chrono::milliseconds timeout) {
  try {
    return read_frame(s, timeout);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FrameMalformed) send_abort_quietly(s, "malformed frame");
    throw;
  }
}

inline Verdict read_peer_result(Socket& s, std::chrono::milliseconds timeout) {
  try {
    const Frame f = read_frame(s, timeout);
    if (f.type == MsgType::Result) return parse_result(f);
  } catch (const Error&) {
  }
  return Verdict::Pending;
}

}  // namespace detail

/// Alice's side. Keys are drawn only after the HELLO exchange succeeds.
inline RoundOutcome run_initiator(const SessionConfig& config, KeyPool& pool, std::span<const std::uint8_t> transcript,
                                  Socket& conn) {
  const auto m_a = pad_message(config.family, transcript);
  send_frame(conn, Frame{MsgType::Hello, hello_payload(config)});
  const Frame hello = detail::expect_frame(conn, config.timeout);
  if (hello.type == MsgType::Abort) fail(ErrorCode::ConfigMismatch, "responder aborted the handshake");
  if (hello.type != MsgType::Hello) fail(ErrorCode::FrameMalformed, "expected HELLO");
  if (hello.payload != hello_payload(config)) {
    detail::send_abort_quietly(conn, "config mismatch");
    fail(ErrorCode::ConfigMismatch, "responder configuration differs");
  }

  RoundOutcome out;
  out.scheme = config.scheme;
  out.mode = config.mode;
  const std::size_t needed = config.scheme == Scheme::Awr ? 1 : 2;
  if (pool.available() < needed) {
    detail::send_abort_quietly(conn, "pool exhausted");
    fail(ErrorCode::PoolExhausted, "not enough keys for a round");
  }
  const auto before = pool.consumed_count();
  const AuthKey k1 = pool.draw();
  const std::optional<AuthKey> k2 = needed == 2 ? std::optional(pool.draw()) : std::nullopt;
  out.keys_consumed = pool.consumed_count() - before;

  for (std::size_t off = 0; off < transcript.size(); off += kChunkSize) {
    const auto piece = transcript.subspan(off, std::min(kChunkSize, transcript.size() - off));
    send_frame(conn, Frame{MsgType::TranscriptChunk, {piece.begin(), piece.end()}});
  }

  if (config.scheme == Scheme::Awr) {
    AliceSession alice(config.family, k1, m_a);
    send_frame(conn, Frame{MsgType::Tag, tag_to_bytes(config.family, alice.send_tag())});
    FinalVerdict v;
    try {
      const Frame r = detail::expect_frame(conn, config.timeout);
      if (r.type != MsgType::Response) fail(ErrorCode::FrameMalformed, "expected RESPONSE");
      Response resp;
      try {
        resp = parse_response(config.family, r.payload);
      } catch (const Error&) {
        resp = Response::reveal(AuthKey{~k1.a, ~k1.b});  // malformed key bytes never match
      }
      v = alice.receive_response(resp);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Timeout && e.code() != ErrorCode::FrameMalformed &&
          e.code() != ErrorCode::TransportError) {
        throw;
      }
      v = alice.abandon(e.code() == ErrorCode::Timeout ? Reason::Timeout : Reason::Tamper);
      out.alice = v.verdict;
      out.reason = v.reason;
      return out;
    }
    out.alice = v.verdict;
    out.reason = v.reason;
  } else {
    send_frame(conn, Frame{MsgType::Tag, tag_to_bytes(config.family, tag(config.family, k1, m_a))});
    try {
      const Frame r = detail::expect_frame(conn, config.timeout);
      if (r.type != MsgType::Tag) fail(ErrorCode::FrameMalformed, "expected TAG");
      bool ok = false;
      try {
        ok = verify(config.family, *k2, m_a, tag_from_bytes(config.family, r.payload));
      } catch (const Error&) {
      }
      out.alice = ok ? Verdict::Accepted : Verdict::Rejected;
      out.reason = ok ? Reason::None : Reason::TagMismatch;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Timeout && e.code() != ErrorCode::FrameMalformed &&
          e.code() != ErrorCode::TransportError) {
        throw;
      }
      out.alice = Verdict::Rejected;
      out.reason = e.code() == ErrorCode::Timeout ? Reason::Timeout : Reason::Tamper;
      return out;
    }
  }
  try {
    send_frame(conn, result_frame(out.alice));
  } catch (const Error&) {
  }
  out.bob = detail::read_peer_result(conn, config.timeout);
  return out;
}

inline RoundOutcome run_initiator(const SessionConfig& config, KeyPool& pool, std::span<const std::uint8_t> transcript,
                                  const Address& peer) {
  Socket conn = connect_to(peer, config.timeout);
  return run_initiator(config, pool, transcript, conn);
}

/// Bob's side on an accepted connection. m_B is the concatenation of the
/// transcript chunks as received.
inline RoundOutcome run_responder(const SessionConfig& config, KeyPool& pool, Socket& conn) {
  const Frame hello = detail::expect_frame(conn, config.timeout);
  if (hello.type != MsgType::Hello) {
    detail::send_abort_quietly(conn, "expected HELLO");
    fail(ErrorCode::FrameMalformed, "expected HELLO");
  }
  if (hello.payload != hello_payload(config)) {
    detail::send_abort_quietly(conn, "config mismatch");
    fail(ErrorCode::ConfigMismatch, "initiator configuration differs");
  }
  send_frame(conn, Frame{MsgType::Hello, hello_payload(config)});

  std::vector<std::uint8_t> received;
  std::optional<Tag> t_received;
  while (!t_received) {
    const Frame f = detail::expect_frame(conn, config.timeout);
    if (f.type == MsgType::TranscriptChunk) {
      received.insert(received.end(), f.payload.begin(), f.payload.end());
    } else if (f.type == MsgType::Tag) {
      try {
        t_received = tag_from_bytes(config.family, f.payload);
      } catch (const Error&) {
        detail::send_abort_quietly(conn, "bad tag width");
        throw;
      }
    } else if (f.type == MsgType::Abort) {
      fail(ErrorCode::ConfigMismatch, "initiator aborted");
    } else {
      detail::send_abort_quietly(conn, "unexpected frame");
      fail(ErrorCode::FrameMalformed, "unexpected frame before TAG");
    }
  }

  RoundOutcome out;
  out.scheme = config.scheme;
  out.mode = config.mode;
  const std::size_t needed = config.scheme == Scheme::Awr ? 1 : 2;
  if (pool.available() < needed) {
    detail::send_abort_quietly(conn, "pool exhausted");
    fail(ErrorCode::PoolExhausted, "not enough keys for a round");
  }
  const auto before = pool.consumed_count();
  const AuthKey k1 = pool.draw();
  const std::optional<AuthKey> k2 = needed == 2 ? std::optional(pool.draw()) : std::nullopt;
  out.keys_consumed = pool.consumed_count() - before;

  MessageBlocks m_b;
  try {
    m_b = pad_message(config.family, received);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OverlongMessage) throw;
    // A transcript the family cannot tag is an automatic reject; use an
    // unreachable empty message so the session still runs to completion.
    m_b = MessageBlocks{};
  }

  if (config.scheme == Scheme::Awr) {
    BobSession bob(config.family, k1, m_b);
    Response r;
    if (m_b.blocks.empty()) {
      r = config.mode == Mode::Hidden ? Response::reveal(failure_key(config.family, k1, m_b, *t_received))
                                      : Response::bottom();
      out.bob = Verdict::Rejected;
    } else {
      r = bob.receive_tag(*t_received, config.mode);
      out.bob = bob.verdict();
    }
    send_frame(conn, Frame{MsgType::Response, serialize(config.family, r)});
  } else {
    const bool ok = !m_b.blocks.empty() && verify(config.family, k1, m_b, *t_received);
    out.bob = ok ? Verdict::Accepted : Verdict::Rejected;
    const Tag back = m_b.blocks.empty() ? Tag{0} : tag(config.family, *k2, m_b);
    send_frame(conn, Frame{MsgType::Tag, tag_to_bytes(config.family, back)});
  }
  out.reason = out.bob == Verdict::Accepted ? Reason::None : Reason::TagMismatch;
  out.alice = detail::read_peer_result(conn, config.timeout);
  try {
    send_frame(conn, result_frame(out.bob));
  } catch (const Error&) {
  }
  return out;
}

inline RoundOutcome run_responder(const SessionConfig& config, KeyPool& pool, Listener& listener) {
  Socket conn = listener.accept(config.timeout);
  return run_responder(config, pool, conn);
}

// ---------------------------------------------------------------------------
// Man-in-the-middle relay.

enum class Direction { ToResponder, ToInitiator };

/// Returns the frames to deliver in place of `f` (empty drops it).
using FrameRule = std::function<std::vector<Frame>(const Frame& f, Direction d)>;

namespace rules {

inline FrameRule identity() {
  return [](const Frame& f, Direction) { return std::vector<Frame>{f}; };
}

/// Flips the lowest bit of the TAG payload sent towards the responder.
inline FrameRule flip_tag_bit() {
  return [](const Frame& f, Direction d) {
    Frame out = f;
    if (f.type == MsgType::Tag && d == Direction::ToResponder && !out.payload.empty()) out.payload.back() ^= 1;
    return std::vector<Frame>{out};
  };
}

inline FrameRule flip_transcript_bit() {
  return [](const Frame& f, Direction d) {
    Frame out = f;
    if (f.type == MsgType::TranscriptChunk && d == Direction::ToResponder && !out.payload.empty()) {
      out.payload.front() ^= 1;
    }
    return std::vector<Frame>{out};
  };
}

inline FrameRule drop_response() {
  return [](const Frame& f, Direction) {
    return f.type == MsgType::Response ? std::vector<Frame>{} : std::vector<Frame>{f};
  };
}

/// Replaces every RESPONSE with a fresh uniformly random key.
inline FrameRule replace_response_random_key(const FamilyParams& p, std::uint64_t seed) {
  struct State {
    explicit State(std::uint64_t s) : rng(s, 7) {}
    std::mutex mu;
    CounterRng rng;
  };
  auto state = std::make_shared<State>(seed);
  return [p, state](const Frame& f, Direction) {
    if (f.type != MsgType::Response) return std::vector<Frame>{f};
    std::lock_guard lock(state->mu);
    const AuthKey guess{state->rng.next_word(p.field.mask()), state->rng.next_word(p.field.mask())};
    return std::vector<Frame>{Frame{MsgType::Response, key_to_bytes(p, guess)}};
  };
}

}  // namespace rules

struct CapturedFrame {
  Direction direction;
  Frame frame;
};

/// Relays frames between one initiator and the responder at `forward`,
/// applying `rule` to each frame. Every frame seen (before rewriting) is
/// kept in the capture log.
class TamperProxy {
 public:
  TamperProxy(const Address& listen, Address forward, FrameRule rule)
      : listener_(listen), forward_(std::move(forward)), rule_(std::move(rule)) {}

  std::uint16_t port() const noexcept { return listener_.port(); }
  Address address() const { return listener_.address(); }

  /// Serves `connections` sessions one after another.
  void serve(std::size_t connections, std::chrono::milliseconds accept_timeout = kDefaultTimeout) {
    for (std::size_t i = 0; i < connections && !stopped_; ++i) relay_one(accept_timeout);
  }

  void stop() noexcept { stopped_ = true; }

  std::vector<CapturedFrame> captured() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  void clear_capture() {
    std::lock_guard lock(mu_);
    log_.clear();
  }

 private:
  void relay_one(std::chrono::milliseconds accept_timeout) {
    Socket client = listener_.accept(accept_timeout);
    Socket server = connect_to(forward_, accept_timeout);
    auto pump = [this](Socket& from, Socket& to, Direction d) {
      try {
        for (;;) {
          const Frame f = read_frame(from, std::chrono::hours(1));
          {
            std::lock_guard lock(mu_);
            log_.push_back({d, f});
          }
          for (const auto& out : rule_(f, d)) send_frame(to, out);
        }
      } catch (const Error&) {
      }
      from.shutdown();
      to.shutdown();
    };
    std::thread up([&] { pump(client, server, Direction::ToResponder); });
    pump(server, client, Direction::ToInitiator);
    up.join();
  }

  Listener listener_;
  Address forward_;
  FrameRule rule_;
  std::atomic<bool> stopped_{false};
  mutable std::mutex mu_;
  std::vector<CapturedFrame> log_;
};

}  // namespace awr::net
