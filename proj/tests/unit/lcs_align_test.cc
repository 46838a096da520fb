#include <gtest/gtest.h>

#include <random>

#include "lcsctc/errors.h"
#include "lcsctc/lcs_align.h"
#include "oracles.h"

namespace lcsctc {
namespace {

const SimilarityTable &Sim() {
  static const SimilarityTable sim =
      PhonemeInventory::Default().BuildSimilarityTable();
  return sim;
}

ValidMatchSet Set(int n, int m, std::initializer_list<MatchPair> pairs) {
  ValidMatchSet v(n, m);
  for (auto p : pairs) v.Insert(p.phoneme, p.frame);
  return v;
}

std::vector<MatchPair> Bits(const BitMatrix &b) {
  std::vector<MatchPair> out;
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      if (b(i, j)) out.push_back({i, j});
  return out;
}

ValidMatchSet RandomSet(std::mt19937_64 &rng, int n, int m, double density) {
  std::bernoulli_distribution coin(density);
  ValidMatchSet v(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (coin(rng)) v.Insert(i, j);
  return v;
}

void ExpectMonotoneSubset(const BitMatrix &bits, const ValidMatchSet &valid) {
  int last_phoneme = 0;
  for (int j = 0; j < bits.cols(); ++j) {
    int set = 0;
    for (int i = 0; i < bits.rows(); ++i) {
      if (!bits(i, j)) continue;
      ++set;
      EXPECT_TRUE(valid.Contains(i, j));
      EXPECT_GE(i, last_phoneme);
      last_phoneme = i;
    }
    EXPECT_LE(set, 1);
  }
}

TEST(ValidMatches, PerfectSegmentationAnchorsOwnSpans) {
  const Segmentation seg{{{"IH", 0, 3}, {"N", 3, 5}, {"S", 5, 9}}};
  const std::vector<std::string> labels = seg.Labels();
  const CostMatrix c = BuildRawTargetCost(seg, labels, Sim(), 9);
  const ValidMatchSet v = FindValidMatches(c, Sim(), {1.0, 0.05});
  for (int i = 0; i < 3; ++i)
    for (int j = seg.spans[i].onset; j < seg.spans[i].offset; ++j)
      EXPECT_TRUE(v.Contains(i, j));
}

TEST(ValidMatches, SelfMatchNeedsCostFloor) {
  CostMatrix c{{"IH"}, Matrix(1, 1, 0.9)};
  EXPECT_EQ(FindValidMatches(c, Sim(), {1.0, 0.05}).size(), 0);
  c.values(0, 0) = 0.05;
  EXPECT_EQ(FindValidMatches(c, Sim(), {1.0, 0.05}).size(), 1);
}

TEST(ValidMatches, ThresholdScalesWithDissimilarity) {
  // Frame best matches Z; S is 0.875 similar so its threshold is 0.125 * tol.
  CostMatrix c{{"Z", "S"}, Matrix(2, 1)};
  c.values(0, 0) = 0.0;
  c.values(1, 0) = 0.125;
  EXPECT_TRUE(FindValidMatches(c, Sim(), {1.0, 0.05}).Contains(1, 0));
  EXPECT_FALSE(FindValidMatches(c, Sim(), {0.99, 0.05}).Contains(1, 0));
}

TEST(ValidMatches, ArgminTiesGoToFirstRow) {
  // Both rows tie at 0.02; k = 0 so row 0 uses the floor and row 1 uses
  // (1 - s(IH, B)) * tol.
  CostMatrix c{{"IH", "B"}, Matrix(2, 1, 0.02)};
  const ValidMatchSet v = FindValidMatches(c, Sim(), {0.01, 0.05});
  EXPECT_TRUE(v.Contains(0, 0));
  EXPECT_FALSE(v.Contains(1, 0));
}

TEST(ValidMatches, Errors) {
  CostMatrix c{{"IH"}, Matrix(1, 2, 0.0)};
  EXPECT_THROW(FindValidMatches(c, Sim(), {0.0, 0.05}), DomainError);
  EXPECT_THROW(FindValidMatches(c, Sim(), {-1.0, 0.05}), DomainError);
  CostMatrix wrong{{"IH", "N"}, Matrix(1, 2, 0.0)};
  EXPECT_THROW(FindValidMatches(wrong, Sim()), DomainError);
  CostMatrix unknown{{"QQ"}, Matrix(1, 2, 0.0)};
  EXPECT_THROW(FindValidMatches(unknown, Sim()), DomainError);
}

TEST(ValidMatchSet, RejectsOutOfRange) {
  ValidMatchSet v(2, 3);
  EXPECT_THROW(v.Insert(2, 0), DomainError);
  EXPECT_THROW(v.Insert(0, 3), DomainError);
  EXPECT_THROW(v.Insert(-1, 0), DomainError);
  v.Insert(1, 1);
  v.Insert(1, 1);
  EXPECT_EQ(v.size(), 1);
}

TEST(LcsAlign, Examples) {
  EXPECT_EQ(Bits(LcsAlign(Set(2, 3, {{0, 0}, {0, 1}, {1, 2}}))),
            (std::vector<MatchPair>{{0, 0}, {0, 1}, {1, 2}}));
  EXPECT_TRUE(Bits(LcsAlign(ValidMatchSet(3, 4))).empty());
  EXPECT_EQ(Bits(LcsAlign(Set(2, 2, {{1, 0}, {0, 1}}))),
            (std::vector<MatchPair>{{0, 1}}));
}

TEST(LcsAlign, PhonemeAbsorbsNonContiguousFrames) {
  const ValidMatchSet v = Set(2, 5, {{0, 0}, {0, 2}, {0, 4}, {1, 1}});
  const auto got = Bits(LcsAlign(v));
  EXPECT_EQ(got.size(), 3u);
  EXPECT_EQ(oracle::BruteForceAlign(v).cardinality, 3);
}

TEST(LcsAlign, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim_n(1, 6);
  std::uniform_int_distribution<int> dim_m(1, 8);
  std::uniform_real_distribution<double> density(0.05, 0.7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = dim_n(rng);
    const int m = dim_m(rng);
    const ValidMatchSet v = RandomSet(rng, n, m, density(rng));
    Matrix cost(n, m);
    for (double &c : cost.data()) c = unit(rng);
    const auto oracle = oracle::BruteForceAlign(v, &cost);

    const BitMatrix plain = LcsAlign(v);
    ExpectMonotoneSubset(plain, v);
    ASSERT_EQ(static_cast<int>(Bits(plain).size()), oracle.cardinality);

    const BitMatrix cheap = LcsAlign(v, cost);
    ExpectMonotoneSubset(cheap, v);
    ASSERT_EQ(static_cast<int>(Bits(cheap).size()), oracle.cardinality);
    double total = 0.0;
    for (auto [i, j] : Bits(cheap)) total += cost(i, j);
    ASSERT_NEAR(total, oracle.min_cost, 1e-12);
  }
}

TEST(LcsAlign, CostAwareRejectsShapeMismatch) {
  EXPECT_THROW(LcsAlign(ValidMatchSet(2, 3), Matrix(3, 2)), DomainError);
}

TEST(LcsAlign, Deterministic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const ValidMatchSet v = RandomSet(rng, 5, 8, 0.4);
    EXPECT_EQ(LcsAlign(v), LcsAlign(v));
  }
}

TEST(LcsAlign, LargerTolNeverShrinks) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  const std::vector<std::string> pool = {"IH", "N", "S", "Z", "ER", "T"};
  for (int trial = 0; trial < 300; ++trial) {
    CostMatrix c{pool, Matrix(6, 8)};
    for (double &v : c.values.data()) v = u(rng);
    ValidMatchSet prev(6, 8);
    int prev_card = 0;
    for (double tol : {0.5, 0.9, 1.0, 1.1, 1.3, 2.0}) {
      const ValidMatchSet v = FindValidMatches(c, Sim(), {tol, 0.05});
      for (auto [i, j] : prev.Pairs()) EXPECT_TRUE(v.Contains(i, j));
      const int card = static_cast<int>(Bits(LcsAlign(v)).size());
      EXPECT_GE(card, prev_card);
      prev = v;
      prev_card = card;
    }
  }
}

TEST(AlignCostMatrix, EndToEnd) {
  const Segmentation seg{{{"IH", 0, 4}, {"N", 4, 8}}};
  const std::vector<std::string> labels = seg.Labels();
  const CostMatrix c = BuildRawTargetCost(seg, labels, Sim(), 8);
  const AlignmentMask m = AlignCostMatrix(c, Sim());
  EXPECT_EQ(m.labels, labels);
  EXPECT_EQ(m.Cardinality(), 8);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(m.bits(j < 4 ? 0 : 1, j), 1);
}

TEST(ExpandMask, Examples) {
  const std::vector<std::string> symbols = {"IH", "N", "S"};
  const Vocabulary vocab(symbols);

  AlignmentMask single{{"IH"}, BitMatrix(1, 3, 0)};
  single.bits(0, 0) = 1;
  BitMatrix want(4, 3, 0);
  want(vocab.Id("IH"), 0) = 1;
  EXPECT_EQ(ExpandMask(single, vocab), want);

  AlignmentMask repeated{{"IH", "N", "IH"}, BitMatrix(3, 4, 0)};
  repeated.bits(0, 0) = 1;
  repeated.bits(1, 1) = 1;
  repeated.bits(2, 3) = 1;
  const BitMatrix out = ExpandMask(repeated, vocab);
  EXPECT_EQ(out(vocab.Id("IH"), 0), 1);
  EXPECT_EQ(out(vocab.Id("N"), 1), 1);
  EXPECT_EQ(out(vocab.Id("IH"), 3), 1);
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(out(vocab.blank_id(), j), 0);
    int set = 0;
    for (int k = 0; k < 4; ++k) set += out(k, j);
    EXPECT_EQ(set, j == 2 ? 0 : 1);
  }

  AlignmentMask unknown{{"ZH"}, BitMatrix(1, 1, 1)};
  EXPECT_THROW(ExpandMask(unknown, vocab), DomainError);
}

TEST(BruteForce, SizeGuard) {
  EXPECT_THROW(oracle::BruteForceAlign(ValidMatchSet(9, 3)), std::length_error);
  EXPECT_THROW(oracle::BruteForceAlign(ValidMatchSet(3, 13)), std::length_error);
}

}  // namespace
}  // namespace lcsctc
