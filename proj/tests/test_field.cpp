#include <gtest/gtest.h>

#include <bitset>
#include <map>
#include <random>
#include <set>

#include "awr/asu2.hpp"
#include "awr/rng.hpp"

namespace {

using awr::Word;
using Poly = std::bitset<260>;

Poly to_poly(Word w) {
  Poly p;
  for (unsigned i = 0; i < 128; ++i) p[i] = ((w >> i) & 1) != 0;
  return p;
}

Word from_poly(const Poly& p) {
  Word w = 0;
  for (unsigned i = 0; i < 128; ++i) {
    if (p[i]) w |= Word{1} << i;
  }
  return w;
}

int degree(const Poly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
    if (p[i]) return i;
  }
  return -1;
}

Poly poly_mul(const Poly& x, const Poly& y) {
  Poly r;
  for (std::size_t i = 0; i < 130; ++i) {
    if (x[i]) r ^= y << i;
  }
  return r;
}

Poly poly_mod(Poly x, const Poly& f) {
  const int df = degree(f);
  for (int d = degree(x); d >= df; d = degree(x)) x ^= f << (d - df);
  return x;
}

Poly poly_gcd(Poly a, Poly b) {
  while (b.any()) {
    Poly r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return a;
}

Poly modulus(unsigned bits) {
  Poly f = to_poly(awr::reduction_polynomial(bits)->low_terms);
  f[bits] = true;
  return f;
}

// Schoolbook product followed by long division.
Word oracle_mul(unsigned bits, Word x, Word y) { return from_poly(poly_mod(poly_mul(to_poly(x), to_poly(y)), modulus(bits))); }

Word random_word(std::mt19937_64& g, Word mask) { return ((Word{g()} << 64) | g()) & mask; }

}  // namespace

TEST(Field, AesReferenceProducts) {
  awr::GaloisField f(8);
  EXPECT_EQ(f.mul(0x57, 0x83), Word{0xc1});
  EXPECT_EQ(f.mul(0x57, 0x13), Word{0xfe});
  EXPECT_EQ(f.mul(0x53, 0xca), Word{0x01});
  EXPECT_EQ(f.inverse(0x53), Word{0xca});
}

TEST(Field, Gf16HandTable) {
  // x^4 + x + 1: (x^2+1)(x+1) = x^3+x^2+x+1, and x^3 * x = x^4 = x+1.
  awr::GaloisField f(4);
  EXPECT_EQ(f.mul(5, 3), Word{15});
  EXPECT_EQ(f.mul(8, 2), Word{3});
  EXPECT_EQ(f.mul(9, 9), Word{13});
}

TEST(Field, MatchesSchoolbookOracle) {
  std::mt19937_64 g(42);
  for (unsigned bits : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 16u, 32u, 64u, 128u}) {
    awr::GaloisField f(bits);
    for (int i = 0; i < 200; ++i) {
      const Word x = random_word(g, f.mask()), y = random_word(g, f.mask());
      ASSERT_EQ(f.mul(x, y), oracle_mul(bits, x, y)) << "bits=" << bits;
    }
  }
}

TEST(Field, FieldAxiomsOnRandomTriples) {
  std::mt19937_64 g(7);
  for (unsigned bits : {8u, 32u, 64u, 128u}) {
    awr::GaloisField f(bits);
    for (int i = 0; i < 100; ++i) {
      const Word x = random_word(g, f.mask()), y = random_word(g, f.mask()), z = random_word(g, f.mask());
      EXPECT_EQ(f.mul(x, y), f.mul(y, x));
      EXPECT_EQ(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
      EXPECT_EQ(f.mul(x, y ^ z), f.mul(x, y) ^ f.mul(x, z));
      EXPECT_TRUE(f.contains(f.mul(x, y)));
      if (x != 0) {
        EXPECT_EQ(f.mul(x, f.inverse(x)), Word{1});
      }
    }
  }
}

TEST(Field, SmallModuliAreIrreducibleByTrialDivision) {
  for (unsigned bits : {2u, 3u, 4u, 5u, 6u, 7u, 8u, 16u}) {
    const Poly f = modulus(bits);
    for (std::uint32_t d = 2; d < (1u << (bits / 2 + 1)); ++d) {
      Poly div;
      for (unsigned i = 0; i < 32; ++i) div[i] = ((d >> i) & 1) != 0;
      if (degree(div) < 1 || 2 * degree(div) > static_cast<int>(bits)) continue;
      ASSERT_TRUE(poly_mod(f, div).any()) << "bits=" << bits << " divisor=" << d;
    }
  }
}

TEST(Field, WideModuliPassRabinTest) {
  // n is a power of two, so the only prime divisor to check is 2.
  for (unsigned bits : {32u, 64u, 128u}) {
    const Poly f = modulus(bits);
    Poly x;
    x[1] = true;
    Poly r = x;
    Poly half;
    for (unsigned i = 1; i <= bits; ++i) {
      r = poly_mod(poly_mul(r, r), f);
      if (i == bits / 2) half = r;
    }
    EXPECT_EQ(r, x) << "x^(2^n) != x for bits=" << bits;
    EXPECT_EQ(degree(poly_gcd(f, half ^ x)), 0) << "bits=" << bits;
  }
}

TEST(Field, UnsupportedWidthThrows) {
  EXPECT_FALSE(awr::reduction_polynomial(9).has_value());
  EXPECT_THROW(awr::GaloisField(9), awr::Error);
}

TEST(Philox, KnownAnswers) {
  using B = awr::PhiloxBlock;
  EXPECT_EQ(awr::philox4x32_10({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(awr::philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(awr::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, RandomAccessMatchesSequential) {
  awr::CounterRng seq(99, 3);
  const awr::CounterRng ra(99, 3);
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(seq.next_block(), ra.block(i));
  awr::CounterRng other(99, 4);
  EXPECT_NE(other.next_block(), ra.block(0));
}

TEST(Asu2, HandComputedTag) {
  const auto p = awr::FamilyParams::polynomial(4, 1);
  EXPECT_EQ(awr::tag(p, {3, 7}, {{5}}), Word{8});
  EXPECT_TRUE(awr::verify(p, {3, 7}, {{5}}, 8));
  EXPECT_FALSE(awr::verify(p, {3, 7}, {{5}}, 9));
}

TEST(Asu2, EpsilonAndSpaces) {
  const auto p = awr::FamilyParams::polynomial(2, 3);
  EXPECT_EQ(p.epsilon, awr::make_rational(3, 4));
  EXPECT_EQ(p.tag_count(), 4u);
  EXPECT_EQ(p.key_count(), 16u);
  EXPECT_THROW(awr::FamilyParams::polynomial(2, 5), awr::Error);
  EXPECT_THROW(awr::FamilyParams::polynomial(0, 1), awr::Error);
}

TEST(Asu2, OverlongMessageThrows) {
  const auto p = awr::FamilyParams::polynomial(8, 2);
  EXPECT_THROW(awr::tag(p, {1, 1}, {{1, 2, 3}}), awr::Error);
  try {
    awr::tag(p, {1, 1}, {{1, 2, 3}});
  } catch (const awr::Error& e) {
    EXPECT_EQ(e.code(), awr::ErrorCode::OverlongMessage);
  }
}

// Independent condition checker: maps keyed by tag pairs, no shared tables.
struct OracleReport {
  bool cond1 = true;
  awr::Rational cond2 = 0;
};

OracleReport oracle_check(unsigned bits, std::uint32_t blocks) {
  const auto p = awr::FamilyParams::polynomial(bits, blocks);
  const std::uint64_t t = 1ull << bits;
  std::uint64_t msgs = 1;
  for (std::uint32_t i = 0; i < blocks; ++i) msgs *= t;
  std::vector<std::vector<std::uint64_t>> tags(msgs);
  for (std::uint64_t m = 0; m < msgs; ++m) {
    const auto msg = awr::message_from_index(p, m, blocks);
    for (std::uint64_t a = 0; a < t; ++a) {
      for (std::uint64_t b = 0; b < t; ++b) {
        tags[m].push_back(static_cast<std::uint64_t>(awr::tag(p, {a, b}, msg)));
      }
    }
  }
  OracleReport r;
  for (std::uint64_t m1 = 0; m1 < msgs; ++m1) {
    std::map<std::uint64_t, std::uint64_t> marg;
    for (auto v : tags[m1]) ++marg[v];
    for (std::uint64_t v = 0; v < t; ++v) r.cond1 = r.cond1 && marg[v] == t;
    for (std::uint64_t m2 = 0; m2 < msgs; ++m2) {
      if (m1 == m2) continue;
      std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> joint;
      for (std::size_t k = 0; k < tags[m1].size(); ++k) ++joint[{tags[m1][k], tags[m2][k]}];
      for (const auto& [key, c] : joint) r.cond2 = std::max(r.cond2, awr::make_rational(c, marg[key.first]));
    }
  }
  return r;
}

TEST(Asu2, CheckerAgreesWithOracle) {
  for (auto [bits, blocks] : std::vector<std::pair<unsigned, std::uint32_t>>{{1, 1}, {2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
    const auto report = awr::check_asu2(awr::FamilyParams::polynomial(bits, blocks));
    const auto oracle = oracle_check(bits, blocks);
    EXPECT_EQ(report.condition1_exact, oracle.cond1) << bits << "," << blocks;
    EXPECT_EQ(report.condition2_max, oracle.cond2) << bits << "," << blocks;
    EXPECT_TRUE(report.passes());
  }
}

TEST(Asu2, SpecExamples) {
  const auto r1 = awr::check_asu2(awr::FamilyParams::polynomial(2, 1));
  EXPECT_TRUE(r1.passes());
  EXPECT_EQ(r1.epsilon, awr::make_rational(1, 4));
  EXPECT_EQ(r1.condition2_max, awr::make_rational(1, 4));
  const auto r2 = awr::check_asu2(awr::FamilyParams::polynomial(2, 2));
  EXPECT_TRUE(r2.passes());
  EXPECT_LE(r2.condition2_max, awr::make_rational(1, 2));
  try {
    awr::check_asu2(awr::FamilyParams::polynomial(16, 4096));
    FAIL() << "expected SpaceTooLarge";
  } catch (const awr::Error& e) {
    EXPECT_EQ(e.code(), awr::ErrorCode::SpaceTooLarge);
  }
}

TEST(Asu2, FailureKeyVerifiesAndDiffers) {
  std::mt19937_64 g(5);
  for (unsigned bits : {1u, 2u, 4u, 8u, 64u, 128u}) {
    const auto p = awr::FamilyParams::polynomial(bits, 1);
    for (int i = 0; i < 100; ++i) {
      const awr::AuthKey k{random_word(g, p.field.mask()), random_word(g, p.field.mask())};
      const awr::MessageBlocks m{{random_word(g, p.field.mask())}};
      const Word t = random_word(g, p.field.mask());
      const auto alt = awr::failure_key(p, k, m, t);
      EXPECT_FALSE(alt == k);
      EXPECT_TRUE(awr::verify(p, alt, m, t));
    }
  }
}

TEST(Asu2, PaddingIsInjective) {
  const auto p = awr::FamilyParams::polynomial(32, 64);
  std::mt19937_64 g(11);
  std::map<std::vector<Word>, std::string> seen;
  std::set<std::string> inputs{"", std::string(1, '\0'), std::string(2, '\0'), std::string(3, '\0'), std::string(4, '\0'),
                               "a", std::string("a\0", 2), std::string("a\x80", 2)};
  for (int i = 0; i < 300; ++i) {
    std::string s(g() % 20, '\0');
    for (auto& c : s) c = static_cast<char>(g() % 3 == 0 ? 0 : g());
    inputs.insert(s);
  }
  for (const auto& s : inputs) {
    const auto blocks = awr::pad_message(p, s).blocks;
    EXPECT_EQ(blocks.size(), awr::padded_block_count(p, s.size()));
    auto [it, inserted] = seen.emplace(blocks, s);
    EXPECT_TRUE(inserted || it->second == s);
  }
}

TEST(Asu2, HeaderOverflowAndBlockLimit) {
  const auto p8 = awr::FamilyParams::polynomial(8, 64);
  EXPECT_NO_THROW(awr::pad_message(p8, std::string(31, 'x')));
  EXPECT_THROW(awr::pad_message(p8, std::string(32, 'x')), awr::Error);
  const auto p64 = awr::FamilyParams::polynomial(64, 3);
  EXPECT_NO_THROW(awr::pad_message(p64, std::string(15, 'x')));
  EXPECT_THROW(awr::pad_message(p64, std::string(16, 'x')), awr::Error);
}

TEST(Asu2, ByteRoundTrips) {
  const auto p = awr::FamilyParams::polynomial(64, 1);
  const awr::AuthKey k{0x0123456789abcdefull, 0xfedcba9876543210ull};
  const auto kb = awr::key_to_bytes(p, k);
  ASSERT_EQ(kb.size(), 16u);
  EXPECT_EQ(kb[0], 0x01);
  EXPECT_TRUE(awr::key_from_bytes(p, kb) == k);
  const auto tb = awr::tag_to_bytes(p, 0xabcdu);
  EXPECT_EQ(awr::tag_from_bytes(p, tb), Word{0xabcd});
  const auto p4 = awr::FamilyParams::polynomial(4, 1);
  EXPECT_TRUE(awr::key_from_index(p4, 37) == (awr::AuthKey{2, 5}));
  for (std::uint64_t i = 0; i < p4.key_count(); ++i) EXPECT_EQ(awr::key_index(p4, awr::key_from_index(p4, i)), i);
}
