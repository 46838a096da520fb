#include <gtest/gtest.h>

#include <random>

#include "lcsctc/errors.h"
#include "lcsctc/metrics.h"

namespace lcsctc {
namespace {

using Seq = std::vector<std::string>;

const SimilarityTable &Sim() {
  static const SimilarityTable sim =
      PhonemeInventory::Default().BuildSimilarityTable();
  return sim;
}

// Memoized recursion over suffixes; unrelated to the library's DP.
double EditDistance(const Seq &a, const Seq &b,
                    const std::function<double(const std::string &,
                                               const std::string &)> &sub) {
  std::vector<std::vector<double>> memo(a.size() + 1,
                                        std::vector<double>(b.size() + 1, -1));
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i,
                                                           std::size_t j) {
    if (i == a.size()) return static_cast<double>(b.size() - j);
    if (j == b.size()) return static_cast<double>(a.size() - i);
    double &m = memo[i][j];
    if (m >= 0) return m;
    m = std::min({go(i + 1, j + 1) + sub(a[i], b[j]), go(i + 1, j) + 1.0,
                  go(i, j + 1) + 1.0});
    return m;
  };
  return go(0, 0);
}

Seq RandomSeq(std::mt19937_64 &rng, const Seq &pool, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  Seq s(len(rng));
  for (auto &p : s) p = pool[pick(rng)];
  return s;
}

TEST(Per, Examples) {
  EXPECT_EQ(Per(Seq{"IH", "N"}, Seq{"IH", "N"}), 0.0);
  const Seq ref = {"IH", "N", "S", "ER", "T"};
  const Seq hyp = {"IH", "S", "N", "S", "ER", "AH", "T"};
  EXPECT_EQ(Per(ref, hyp), 0.4);
  const EditOps ops = AlignUnit(ref, hyp);
  EXPECT_EQ(ops.insertions, 2);
  EXPECT_EQ(ops.deletions, 0);
  EXPECT_TRUE(ops.substitutions.empty());
  EXPECT_EQ(ops.matches, 5);
  EXPECT_EQ(Per(Seq{"IH"}, Seq{}), 1.0);
  EXPECT_THROW(Per(Seq{}, Seq{"IH"}), DomainError);
}

TEST(Per, AlignmentIsConsistent) {
  const EditOps ops = AlignUnit(Seq{"IH", "N", "S"}, Seq{"IH", "T"});
  int subs = 0;
  for (const EditOp &op : ops.alignment)
    if (op.type == EditOpType::kSubstitution) ++subs;
  EXPECT_EQ(subs, static_cast<int>(ops.substitutions.size()));
  EXPECT_EQ(ops.cost, subs + ops.deletions + ops.insertions);
  EXPECT_EQ(ops.cost, 2.0);
}

TEST(Wper, Examples) {
  EXPECT_EQ(Wper(Seq{"S", "Z"}, Seq{"S", "Z"}, Sim()), 0.0);
  EXPECT_EQ(Wper(Seq{"S"}, Seq{"Z"}, Sim()), 0.125);
  const EditOps ops = AlignWeighted(Seq{"S"}, Seq{"Z"}, Sim());
  ASSERT_EQ(ops.substitutions.size(), 1u);
  EXPECT_EQ(ops.substitutions[0], std::make_pair(std::string("S"), std::string("Z")));
  EXPECT_THROW(Wper(Seq{"S"}, Seq{"QQ"}, Sim()), DomainError);
  EXPECT_THROW(Wper(Seq{}, Seq{"S"}, Sim()), DomainError);
}

TEST(Metrics, AgreeWithIndependentEditDistance) {
  std::mt19937_64 rng(21);
  const Seq pool = {"IH", "N", "S", "Z", "ER", "T", "AH", "D"};
  for (int trial = 0; trial < 2000; ++trial) {
    const Seq ref = RandomSeq(rng, pool, 1, 8);
    const Seq hyp = RandomSeq(rng, pool, 0, 8);
    const double unit = EditDistance(ref, hyp, [](auto &a, auto &b) {
      return a == b ? 0.0 : 1.0;
    });
    const double weighted = EditDistance(ref, hyp, [](auto &a, auto &b) {
      return a == b ? 0.0 : 1.0 - Sim().at(a, b);
    });
    ASSERT_EQ(AlignUnit(ref, hyp).cost, unit);
    ASSERT_NEAR(AlignWeighted(ref, hyp, Sim()).cost, weighted, 1e-12);
    ASSERT_LE(Wper(ref, hyp, Sim()), Per(ref, hyp));
    // Symmetric up to the insertion/deletion swap.
    ASSERT_EQ(AlignUnit(hyp, ref).cost, AlignUnit(ref, hyp).cost);
  }
}

TEST(Wper, EqualsPerWhenNothingIsSimilar) {
  std::mt19937_64 rng(22);
  const Seq vowels = {"IH", "AH", "ER", "UW"};
  const Seq consonants = {"N", "S", "T", "B"};
  for (int trial = 0; trial < 500; ++trial) {
    const Seq ref = RandomSeq(rng, vowels, 1, 6);
    const Seq hyp = RandomSeq(rng, consonants, 0, 6);
    ASSERT_EQ(Wper(ref, hyp, Sim()), Per(ref, hyp));
  }
}

TEST(BoundaryLoss, Examples) {
  const Segmentation ref{{{"IH", 0, 4}, {"N", 4, 8}}};
  EXPECT_EQ(BoundaryLoss(ref, ref, 20.0).mean_ms, 0.0);

  const Segmentation one{{{"IH", 0, 4}}};
  const Segmentation shifted{{{"IH", 2, 6}}};
  EXPECT_EQ(BoundaryLoss(shifted, one, 20.0).mean_ms, 40.0);

  const Segmentation missing{{{"N", 5, 8}}};
  const BoundaryReport r = BoundaryLoss(missing, ref, 10.0);
  EXPECT_EQ(r.matched, 1);
  EXPECT_EQ(r.unmatched_ref, 1);
  EXPECT_EQ(r.unmatched_pred, 0);
  EXPECT_EQ(r.mean_ms, 5.0);

  const Segmentation other{{{"S", 0, 3}}};
  EXPECT_FALSE(BoundaryLoss(other, one, 10.0).mean_ms.has_value());
  EXPECT_THROW(BoundaryLoss(one, one, 0.0), DomainError);
  EXPECT_THROW(BoundaryLoss(Segmentation{}, Segmentation{}, 10.0), DomainError);
}

TEST(BoundaryLoss, SymmetricForEqualLabels) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> len(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    Segmentation a, b;
    int fa = 0, fb = 0;
    for (const char *p : {"IH", "N", "S", "N"}) {
      const int la = len(rng), lb = len(rng);
      a.spans.push_back({p, fa, fa + la});
      b.spans.push_back({p, fb, fb + lb});
      fa += la + len(rng) - 1;
      fb += lb + len(rng) - 1;
    }
    EXPECT_EQ(BoundaryLoss(a, b, 20.0).mean_ms, BoundaryLoss(b, a, 20.0).mean_ms);
  }
}

TEST(Peakiness, Examples) {
  const std::vector<std::string> symbols = {"IH", "N", "S"};
  const Vocabulary v(symbols);
  const PeakinessStats uniform = ComputePeakiness(
      EmissionMatrix::FromProbabilities(v, Matrix(4, 5, 0.25)));
  EXPECT_DOUBLE_EQ(uniform.mean_max_prob, 0.25);

  Matrix blank(4, 5, 0.0);
  for (int t = 0; t < 5; ++t) blank(0, t) = 1.0;
  const PeakinessStats all_blank =
      ComputePeakiness(EmissionMatrix::FromProbabilities(v, blank));
  EXPECT_EQ(all_blank.blank_frame_fraction, 1.0);
  EXPECT_EQ(all_blank.mean_nonblank_run_length, 0.0);

  Matrix alt(4, 6, 0.0);
  for (int t = 0; t < 6; ++t) alt(t % 2 ? 0 : 2, t) = 1.0;
  const PeakinessStats a = ComputePeakiness(EmissionMatrix::FromProbabilities(v, alt));
  EXPECT_EQ(a.mean_nonblank_run_length, 1.0);
  EXPECT_EQ(a.blank_frame_fraction, 0.5);

  Matrix runs(4, 6, 0.0);
  const int ids[6] = {1, 1, 1, 2, 0, 2};
  for (int t = 0; t < 6; ++t) runs(ids[t], t) = 1.0;
  EXPECT_EQ(ComputePeakiness(EmissionMatrix::FromProbabilities(v, runs))
                .mean_nonblank_run_length,
            5.0 / 3.0);
}

TEST(CorpusScores, MicroAverage) {
  CorpusScores s;
  const Seq r1 = {"IH"}, h1 = {};
  const Seq r2 = {"IH", "N", "S"}, h2 = {"IH", "N", "S"};
  s.Add(AlignUnit(r1, h1), AlignWeighted(r1, h1, Sim()), r1.size());
  s.Add(AlignUnit(r2, h2), AlignWeighted(r2, h2, Sim()), r2.size());
  EXPECT_EQ(s.per(), 0.25);  // not the macro mean 0.5
  EXPECT_EQ(s.utterances, 2);
  EXPECT_FALSE(s.boundary_ms().has_value());
  const Segmentation a{{{"IH", 0, 2}}}, b{{{"IH", 1, 3}}};
  s.AddBoundary(BoundaryLoss(a, b, 10.0));
  s.AddBoundary(BoundaryLoss(a, a, 10.0));
  EXPECT_EQ(s.boundary_ms(), 5.0);
}

}  // namespace
}  // namespace lcsctc
