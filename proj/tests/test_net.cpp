#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "net_fixture.hpp"

using namespace awr;
using awr::testing::bytes;
using awr::testing::config;
using awr::testing::run_pair;

TEST(Frame, RoundTripProperty) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 500; ++i) {
    net::Frame f{static_cast<net::MsgType>(1 + g() % 6), std::vector<std::uint8_t>(g() % 300)};
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(g());
    const auto wire = net::encode(f);
    ASSERT_EQ(wire.size(), net::kHeaderSize + f.payload.size());
    EXPECT_EQ(net::decode(wire), f);
  }
}

TEST(Frame, ExactLayout) {
  const auto wire = net::encode({net::MsgType::Result, {1}});
  EXPECT_EQ(wire, (std::vector<std::uint8_t>{'A', 'W', 'R', '1', 0x04, 0, 0, 0, 1, 1}));
  const auto c = config(net::Role::Initiator, 64, 1024, Mode::Hidden, Scheme::Straightforward);
  EXPECT_EQ(net::hello_payload(c), (std::vector<std::uint8_t>{1, 1, 0, 64, 0, 0, 4, 0}));
}

TEST(Frame, MalformedHeadersRejected) {
  auto wire = net::encode({net::MsgType::Tag, {1, 2}});
  auto bad = wire;
  bad[0] = 'X';
  EXPECT_THROW(net::decode(bad), Error);
  bad = wire;
  bad[4] = 0x07;
  EXPECT_THROW(net::decode(bad), Error);
  bad = wire;
  bad[5] = 0x01;  // 16 MiB length
  EXPECT_THROW(net::decode(bad), Error);
  bad = wire;
  bad.pop_back();
  EXPECT_THROW(net::decode(bad), Error);
  EXPECT_THROW(net::encode({net::MsgType::TranscriptChunk, std::vector<std::uint8_t>(net::kMaxPayload + 1)}), Error);
}

TEST(Net, HonestAwrRoundAcceptsBothSides) {
  const auto r = run_pair(config(net::Role::Initiator), config(net::Role::Responder), bytes("shared transcript"));
  EXPECT_EQ(r.alice.alice, Verdict::Accepted);
  EXPECT_EQ(r.alice.bob, Verdict::Accepted);
  EXPECT_EQ(r.bob.bob, Verdict::Accepted);
  EXPECT_EQ(r.bob.alice, Verdict::Accepted);
  EXPECT_EQ(r.alice.keys_consumed, 1u);
}

TEST(Net, HonestStraightforwardRoundUsesTwoKeys) {
  auto ca = config(net::Role::Initiator, 64, 1024, Mode::Plain, Scheme::Straightforward);
  auto cb = config(net::Role::Responder, 64, 1024, Mode::Plain, Scheme::Straightforward);
  const auto r = run_pair(ca, cb, bytes("abc"));
  EXPECT_EQ(r.alice.alice, Verdict::Accepted);
  EXPECT_EQ(r.bob.bob, Verdict::Accepted);
  EXPECT_EQ(r.alice.keys_consumed, 2u);
  EXPECT_EQ(r.bob.keys_consumed, 2u);
}

TEST(Net, LongTranscriptSpansChunks) {
  std::vector<std::uint8_t> big(3 * net::kChunkSize + 17);
  std::iota(big.begin(), big.end(), 0);
  const auto r = run_pair(config(net::Role::Initiator, 64, 4096), config(net::Role::Responder, 64, 4096), big,
                          net::rules::identity());
  EXPECT_EQ(r.alice.alice, Verdict::Accepted);
  EXPECT_EQ(std::count_if(r.frames.begin(), r.frames.end(),
                          [](const auto& c) { return c.frame.type == net::MsgType::TranscriptChunk; }),
            4);
}

TEST(Net, ConfigMismatchAborts) {
  auto pool_a = awr::testing::shared_pool(FamilyParams::polynomial(64, 1024), 1);
  auto pool_b = awr::testing::shared_pool(FamilyParams::polynomial(32, 1024), 1);
  net::Listener listener(net::Address{"127.0.0.1", 0});
  auto cb = config(net::Role::Responder, 32);
  auto bob = std::async(std::launch::async, [&] { net::run_responder(cb, pool_b, listener); });
  try {
    net::run_initiator(config(net::Role::Initiator), pool_a, bytes("x"), listener.address());
    FAIL() << "expected ConfigMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigMismatch);
  }
  try {
    bob.get();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigMismatch);
  }
  EXPECT_EQ(pool_a.consumed_count(), 0u);
  EXPECT_EQ(pool_b.consumed_count(), 0u);
}

TEST(Net, TagBitFlipRejectsBothSides) {
  const auto r = run_pair(config(net::Role::Initiator), config(net::Role::Responder), bytes("hello"),
                          net::rules::flip_tag_bit());
  EXPECT_EQ(r.alice.alice, Verdict::Rejected);
  EXPECT_EQ(r.alice.reason, Reason::CounterpartReject);
  EXPECT_EQ(r.bob.bob, Verdict::Rejected);
}

TEST(Net, TranscriptFlipRejectsBothSides) {
  for (auto mode : {Mode::Plain, Mode::Hidden}) {
    const auto r = run_pair(config(net::Role::Initiator, 64, 1024, mode), config(net::Role::Responder, 64, 1024, mode),
                            bytes("hello"), net::rules::flip_transcript_bit());
    EXPECT_EQ(r.alice.alice, Verdict::Rejected);
    EXPECT_EQ(r.bob.bob, Verdict::Rejected);
    EXPECT_EQ(r.alice.reason, mode == Mode::Plain ? Reason::CounterpartReject : Reason::Tamper);
  }
}

TEST(Net, DroppedResponseTimesOut) {
  auto ca = config(net::Role::Initiator);
  auto cb = config(net::Role::Responder);
  ca.timeout = cb.timeout = std::chrono::milliseconds(300);
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_pair(ca, cb, bytes("t"), net::rules::drop_response());
  EXPECT_EQ(r.alice.alice, Verdict::Rejected);
  EXPECT_EQ(r.alice.reason, Reason::Timeout);
  EXPECT_EQ(r.bob.bob, Verdict::Accepted);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(3));
}

TEST(Net, HiddenModeResponsesIndistinguishableByLength) {
  const auto ca = config(net::Role::Initiator, 8, 64, Mode::Hidden);
  const auto cb = config(net::Role::Responder, 8, 64, Mode::Hidden);
  const auto p = ca.family;
  auto response_of = [](const std::vector<net::CapturedFrame>& frames) {
    for (const auto& c : frames) {
      if (c.frame.type == net::MsgType::Response) return c.frame.payload;
    }
    return std::vector<std::uint8_t>{};
  };
  auto tag_of = [](const std::vector<net::CapturedFrame>& frames) {
    for (const auto& c : frames) {
      if (c.frame.type == net::MsgType::Tag && c.direction == net::Direction::ToResponder) return c.frame.payload;
    }
    return std::vector<std::uint8_t>{};
  };
  const auto accept = run_pair(ca, cb, bytes("transcript"), net::rules::identity());
  const auto reject = run_pair(ca, cb, bytes("transcript"), net::rules::flip_tag_bit());
  ASSERT_EQ(accept.bob.bob, Verdict::Accepted);
  ASSERT_EQ(reject.bob.bob, Verdict::Rejected);
  const auto ra = response_of(accept.frames), rr = response_of(reject.frames);
  EXPECT_EQ(ra.size(), 2 * p.block_bytes());
  EXPECT_EQ(ra.size(), rr.size());
  // The received tag is the captured one with the proxy's flip applied.
  auto t = tag_of(reject.frames);
  t.back() ^= 1;
  const auto reject_key = key_from_bytes(p, rr);
  EXPECT_TRUE(verify(p, reject_key, pad_message(p, "transcript"), tag_from_bytes(p, t)));
}

TEST(Net, NoKeyMaterialOnTheWireBeforeResponse) {
  const auto ca = config(net::Role::Initiator);
  const auto p = ca.family;
  const auto key = awr::testing::shared_pool(p, 1).draw();
  const auto kb = key_to_bytes(p, key);
  const std::vector<std::uint8_t> a(kb.begin(), kb.begin() + 8), b(kb.begin() + 8, kb.end());
  const auto r = run_pair(ca, config(net::Role::Responder), bytes("no leaks please"), net::rules::identity());
  bool before_response = true;
  for (const auto& c : r.frames) {
    if (c.frame.type == net::MsgType::Response) {
      before_response = false;
      EXPECT_EQ(c.frame.payload, kb);
    }
    if (!before_response) continue;
    const auto& pl = c.frame.payload;
    EXPECT_EQ(std::search(pl.begin(), pl.end(), a.begin(), a.end()), pl.end());
    EXPECT_EQ(std::search(pl.begin(), pl.end(), b.begin(), b.end()), pl.end());
  }
  EXPECT_FALSE(before_response);
}

TEST(Net, BadMagicGetsAbort) {
  auto pool = awr::testing::shared_pool(FamilyParams::polynomial(64, 1024), 1);
  net::Listener listener(net::Address{"127.0.0.1", 0});
  const auto cb = config(net::Role::Responder);
  auto bob = std::async(std::launch::async, [&] { net::run_responder(cb, pool, listener); });
  auto s = net::connect_to(listener.address());
  s.write_all(std::vector<std::uint8_t>{'B', 'A', 'D', '!', 0x05, 0, 0, 0, 0});
  const auto reply = net::read_frame(s, std::chrono::milliseconds(2000));
  EXPECT_EQ(reply.type, net::MsgType::Abort);
  try {
    bob.get();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameMalformed);
  }
}

TEST(Net, RandomResponseForgeryRate) {
  // Alice accepts a random key with probability 1/|K| = 2^-16 per round.
  const auto ca = config(net::Role::Initiator, 8, 64);
  const auto cb = config(net::Role::Responder, 8, 64);
  const auto rule = net::rules::replace_response_random_key(ca.family, 99);
  const int rounds = 40;
  int accepted = 0;
  for (int i = 0; i < rounds; ++i) {
    const auto r = run_pair(ca, cb, bytes("m"), rule, static_cast<std::uint64_t>(i + 1));
    EXPECT_EQ(r.bob.bob, Verdict::Accepted);
    if (r.alice.alice == Verdict::Accepted) {
      ++accepted;
    } else {
      EXPECT_EQ(r.alice.reason, Reason::Tamper);
    }
  }
  // Mean 40 / 65536; four standard errors above it is still below one.
  const double mean = rounds / 65536.0;
  EXPECT_LE(accepted, mean + 4 * std::sqrt(mean) + 1);
}
