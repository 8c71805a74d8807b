#include <gtest/gtest.h>

#include <sstream>

#include "awr/adversary.hpp"

using awr::EstimateMode;
using awr::FamilyParams;
using awr::make_rational;
using awr::Rational;

TEST(Impersonation, ExhaustiveIsExactlyOneOverT) {
  for (unsigned bits : {1u, 2u, 3u, 4u, 8u}) {
    const auto p = FamilyParams::polynomial(bits, 1);
    const auto e = awr::estimate_impersonation(p, 1, 0, EstimateMode::Exhaustive);
    EXPECT_TRUE(e.exhaustive);
    EXPECT_EQ(e.exact_rate(), Rational(awr::BigInt(1), p.tag_space()));
    EXPECT_TRUE(e.pass);
  }
}

TEST(Impersonation, SampledIsSeededAndWithinBand) {
  const auto p = FamilyParams::polynomial(8, 1);
  const auto a = awr::estimate_impersonation(p, 200000, 77, EstimateMode::Sampled);
  const auto b = awr::estimate_impersonation(p, 200000, 77, EstimateMode::Sampled);
  const auto c = awr::estimate_impersonation(p, 200000, 78, EstimateMode::Sampled);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_NE(a.successes, c.successes);
  EXPECT_FALSE(a.exhaustive);
  EXPECT_TRUE(a.pass) << a.rate << " +- " << a.stderr_;
  EXPECT_NEAR(a.stderr_, std::sqrt(a.rate * (1 - a.rate) / 200000.0), 1e-15);
}

TEST(Impersonation, ZeroTrialsRejected) {
  EXPECT_THROW(awr::estimate_impersonation(FamilyParams::polynomial(32, 1), 0, 1, EstimateMode::Sampled), awr::Error);
}

TEST(Substitution, StrategiesStayBelowEpsilon) {
  const auto p = FamilyParams::polynomial(4, 2);
  const awr::MessageBlocks honest{{3, 9}};
  const auto flip = awr::estimate_substitution(p, honest, awr::SubstitutionStrategy::bit_flip(), 1, 0);
  EXPECT_TRUE(flip.exhaustive);
  EXPECT_LE(flip.exact_rate(), p.epsilon);
  const auto ck = awr::estimate_substitution(
      p, honest, awr::SubstitutionStrategy::consistent_key_forgery({{3, 8}}), 1, 0);
  EXPECT_LE(ck.exact_rate(), p.epsilon);
  EXPECT_TRUE(ck.pass);
}

TEST(Substitution, NonFiringRuleIsAnError) {
  const auto p = FamilyParams::polynomial(4, 2);
  const auto same = awr::SubstitutionStrategy::deterministic(
      "noop", [](const awr::MessageBlocks& m, awr::Tag t) { return std::pair{m, t}; });
  try {
    awr::estimate_substitution(p, {{1}}, same, 1, 0);
    FAIL();
  } catch (const awr::Error& e) {
    EXPECT_EQ(e.code(), awr::ErrorCode::StrategyNotFiring);
  }
  EXPECT_THROW(awr::estimate_substitution(p, {{1}}, awr::SubstitutionStrategy::consistent_key_forgery({{1}}), 1, 0),
               awr::Error);
}

// Every map t -> (m', t') with (m', t') != (m, t), evaluated directly.
TEST(Substitution, OptimumMatchesFullRuleEnumeration) {
  const auto p = FamilyParams::polynomial(2, 1);
  const auto keys = awr::ExactKeyDistribution::uniform(16);
  const auto biased = awr::biased_distribution(awr::BiasSpec::point_shift(make_rational(1, 8)), 16);
  for (const auto* dist : {&keys, &biased}) {
    for (std::uint64_t honest = 0; honest < 4; ++honest) {
      Rational best = -1;
      std::vector<std::pair<std::uint64_t, std::uint64_t>> choice(4);
      // 15 admissible (m', t') per observed tag, 15^4 rules.
      for (std::uint64_t code = 0; code < 15ull * 15 * 15 * 15; ++code) {
        std::uint64_t c = code;
        for (std::uint64_t t = 0; t < 4; ++t) {
          std::uint64_t idx = c % 15;
          c /= 15;
          if (idx >= honest * 4 + t) ++idx;
          choice[t] = {idx / 4, idx % 4};
        }
        Rational pr = 0;
        for (std::uint64_t a = 0; a < 4; ++a) {
          for (std::uint64_t b = 0; b < 4; ++b) {
            const awr::AuthKey k{a, b};
            const auto t = static_cast<std::uint64_t>(awr::tag(p, k, {{honest}}));
            const auto [m2, t2] = choice[t];
            if (awr::tag(p, k, {{m2}}) == t2) pr += (*dist)[a * 4 + b];
          }
        }
        best = std::max(best, pr);
      }
      EXPECT_EQ(awr::max_substitution_probability(p, honest, *dist).probability, best) << honest;
    }
  }
}

TEST(Substitution, OptimumEqualsEpsilonForUniformKeys) {
  for (auto [bits, blocks] : std::vector<std::pair<unsigned, std::uint32_t>>{{2, 1}, {2, 2}, {3, 2}, {4, 1}, {4, 2}}) {
    const auto p = FamilyParams::polynomial(bits, blocks);
    const auto r = awr::max_substitution_probability(p, awr::ExactKeyDistribution::uniform(p.key_count()));
    EXPECT_EQ(r.probability, p.epsilon) << bits << "," << blocks;
  }
}

TEST(Substitution, SampledConsistentKeyReproducible) {
  const auto p = FamilyParams::polynomial(16, 4);
  const auto s = awr::SubstitutionStrategy::consistent_key_forgery({{1, 2, 3, 5}});
  const auto a = awr::estimate_substitution(p, {{1, 2, 3, 4}}, s, 50000, 9, EstimateMode::Sampled);
  const auto b = awr::estimate_substitution(p, {{1, 2, 3, 4}}, s, 50000, 9, EstimateMode::Sampled);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_TRUE(a.pass);
}

TEST(ResponseForge, ExhaustiveAtTwoBits) {
  const auto p = FamilyParams::polynomial(2, 1);
  const auto e = awr::estimate_response_forge(p, 1, 0, EstimateMode::Exhaustive, awr::ForgeGuess::ConsistentKey);
  EXPECT_EQ(e.exact_rate(), make_rational(1, 4));
  EXPECT_TRUE(e.pass);
  const auto blind = awr::estimate_response_forge(p, 1, 0, EstimateMode::Exhaustive, awr::ForgeGuess::Blind);
  EXPECT_EQ(blind.exact_rate(), make_rational(1, 16));
  EXPECT_EQ(awr::optimal_response_forge_probability(p, {{1}}, awr::ExactKeyDistribution::uniform(16)),
            make_rational(1, 4));
}

TEST(ResponseForge, OptimumMatchesGuessMapEnumeration) {
  const auto p = FamilyParams::polynomial(1, 1);
  const auto dists = {awr::ExactKeyDistribution::uniform(4),
                      awr::biased_distribution(awr::BiasSpec::point_shift(make_rational(1, 8)), 4),
                      awr::ExactKeyDistribution({make_rational(1, 2), make_rational(1, 3), make_rational(1, 6), 0})};
  for (const auto& d : dists) {
    for (awr::Word m : {awr::Word{0}, awr::Word{1}}) {
      Rational best = 0;
      for (std::uint64_t g0 = 0; g0 < 4; ++g0) {
        for (std::uint64_t g1 = 0; g1 < 4; ++g1) {
          Rational pr = 0;
          for (std::uint64_t k = 0; k < 4; ++k) {
            const auto key = awr::key_from_index(p, k);
            const auto guess = awr::tag(p, key, {{m}}) == 0 ? g0 : g1;
            if (guess == k) pr += d[k];
          }
          best = std::max(best, pr);
        }
      }
      EXPECT_EQ(awr::optimal_response_forge_probability(p, {{m}}, d), best);
    }
  }
}

TEST(ResponseForge, SampledWithinBand) {
  const auto p = FamilyParams::polynomial(8, 1);
  const auto e = awr::estimate_response_forge(p, 400000, 3, EstimateMode::Sampled);
  EXPECT_TRUE(e.pass) << e.rate;
}

TEST(RateEstimate, CsvRow) {
  const auto p = FamilyParams::polynomial(2, 1);
  std::ostringstream out;
  awr::write_csv_row(out, awr::estimate_impersonation(p, 1, 0));
  EXPECT_EQ(out.str(), "impersonation,tag_bits=2;max_blocks=1,16,4,0.25,0,0.25,true\n");
}
