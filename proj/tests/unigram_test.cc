#include "morphotok/unigram.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "morphotok/error.h"
#include "oracles.h"

namespace morphotok {
namespace {

std::unordered_map<std::string, double> LogTable(const std::map<std::string, double>& probs) {
  std::unordered_map<std::string, double> out;
  for (const auto& [piece, p] : probs) out[piece] = std::log(p);
  return out;
}

TEST(ViterbiSegment, PrefersProductOfSinglesWhenLarger) {
  const auto r = ViterbiSegment("ab", LogTable({{"a", 0.5}, {"b", 0.4}, {"ab", 0.1}}), 16, -20);
  EXPECT_EQ(r.pieces, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(r.log_prob, std::log(0.5 * 0.4), 1e-12);
}

TEST(ViterbiSegment, PrefersWholePieceWhenLarger) {
  const auto r = ViterbiSegment("ab", LogTable({{"a", 0.4}, {"b", 0.35}, {"ab", 0.25}}), 16, -20);
  EXPECT_EQ(r.pieces, (std::vector<std::string>{"ab"}));
  EXPECT_TRUE(r.unknown.empty());
}

TEST(ViterbiSegment, UnknownCodePointsFallBackSingly) {
  const auto r = ViterbiSegment("axb", LogTable({{"a", 0.5}, {"b", 0.5}}), 16, -20);
  EXPECT_EQ(r.pieces, (std::vector<std::string>{"a", "x", "b"}));
  EXPECT_EQ(r.unknown, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(r.log_prob, 2 * std::log(0.5) - 20, 1e-12);
}

TEST(ViterbiSegmentProperty, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(8);
  const std::vector<std::string> letters = {"a", "b", "c", "ఆ"};
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<std::string, double> pieces;
    const std::size_t n_pieces = 1 + rng() % 50;
    while (pieces.size() < n_pieces) {
      std::string p;
      for (std::size_t j = 0, n = 1 + rng() % 4; j < n; ++j) p += letters[rng() % letters.size()];
      pieces[p] = std::log(unit(rng));
    }
    std::string word;
    for (std::size_t j = 0, n = 1 + rng() % 12; j < n; ++j) word += letters[rng() % letters.size()];
    const double unk = -30.0;
    std::unordered_map<std::string, double> table(pieces.begin(), pieces.end());
    const auto got = ViterbiSegment(word, table, 4, unk);
    const double best = oracle::BestSegmentationLogProb(word, pieces, unk);
    ASSERT_NEAR(got.log_prob, best, 1e-9) << word;
    // The reported pieces must realize the reported score.
    double realized = 0.0;
    std::string joined;
    for (const auto& p : got.pieces) {
      joined += p;
      realized += table.count(p) ? table.at(p) : unk;
    }
    EXPECT_EQ(joined, word);
    EXPECT_NEAR(realized, got.log_prob, 1e-9);
  }
}

TEST(LearnUnigram, CoversAlphabetAndHitsSize) {
  const PreTokenCounts counts = {{"hello", 5}, {"help", 3}, {"yellow", 2}, {"low", 7}};
  std::set<std::string> alphabet;
  for (const auto& [w, c] : counts) {
    for (const auto& cp : oracle::CodePoints(w)) alphabet.insert(cp);
  }
  for (std::size_t target : {alphabet.size(), alphabet.size() + 1, alphabet.size() + 6}) {
    const auto pieces = LearnUnigram(counts, target, UnigramConfig{});
    ASSERT_EQ(pieces.size(), target);
    std::set<std::string> got;
    double mass = 0.0;
    for (const auto& p : pieces) {
      got.insert(p.piece);
      EXPECT_TRUE(std::isfinite(p.log_prob));
      EXPECT_LE(p.log_prob, 0.0);
      mass += std::exp(p.log_prob);
    }
    EXPECT_EQ(got.size(), target);
    for (const auto& cp : alphabet) EXPECT_TRUE(got.count(cp)) << cp;
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(LearnUnigram, TargetBelowAlphabetIsAnError) {
  EXPECT_THROW(LearnUnigram({{"abc", 1}}, 2, UnigramConfig{}), Error);
}

// With one extra slot over the alphabet, the surviving multi-code-point
// piece must be one that maximizes the fitted corpus likelihood among all
// inventories {a, b, X}.
TEST(LearnUnigram, SurvivorMaximizesLikelihoodOnRepeatedWord) {
  const PreTokenCounts counts = {{"abab", 200}};
  const auto pieces = LearnUnigram(counts, 3, UnigramConfig{});
  ASSERT_EQ(pieces.size(), 3u);
  std::string survivor;
  for (const auto& p : pieces) {
    if (p.piece != "a" && p.piece != "b") survivor = p.piece;
  }
  ASSERT_FALSE(survivor.empty());

  std::map<std::string, double> fitted;
  for (const char* x : {"ab", "ba", "aba", "bab", "abab"}) {
    fitted[x] = oracle::UnigramFitLogLikelihood(counts, {"a", "b", x}, 3000);
  }
  double best = -INFINITY;
  for (const auto& [x, ll] : fitted) best = std::max(best, ll);
  ASSERT_TRUE(fitted.count(survivor));
  EXPECT_NEAR(fitted[survivor], best, 1e-3);
  // "ab" and "abab" both explain the word exactly; the others cannot.
  EXPECT_NEAR(fitted["ab"], fitted["abab"], 1e-3);
  EXPECT_LT(fitted["aba"], best - 100);
  // Frozen behavior of this trainer between the two tied optima.
  EXPECT_EQ(survivor, "abab");
}

TEST(LearnUnigram, Deterministic) {
  const PreTokenCounts counts = {{"banana", 4}, {"bandana", 2}, {"ban", 3}, {"nab", 1}};
  const auto a = LearnUnigram(counts, 9, UnigramConfig{});
  const auto b = LearnUnigram(counts, 9, UnigramConfig{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].piece, b[i].piece);
    EXPECT_EQ(a[i].log_prob, b[i].log_prob);
  }
}

}  // namespace
}  // namespace morphotok
