// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lcsctc/ctc.h"
#include "lcsctc/io.h"
#include "lcsctc/lcs_align.h"
#include "lcsctc/metrics.h"
#include "lcsctc/toy_trainer.h"
#include "oracles.h"

namespace {

using namespace lcsctc;
using Clock = std::chrono::steady_clock;

constexpr int kCtcInstances = 1000;
constexpr double kCtcRelTol = 1e-10;
constexpr int kLcsInstances = 10000;
constexpr int kGradInstances = 100;
constexpr double kGradRelTol = 1e-5;
constexpr int kReductionInstances = 1000;
constexpr int kMetricPairs = 10000;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr double kTrainerBudgetSeconds = 300.0;
constexpr int kSeeds = 5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

const SimilarityTable &Sim() {
  static const SimilarityTable sim =
      PhonemeInventory::Default().BuildSimilarityTable();
  return sim;
}

BitMatrix RandomMask(std::mt19937_64 &rng, int vocab_size, int num_frames,
                     int blank_id) {
  std::bernoulli_distribution anchor(0.4);
  std::uniform_int_distribution<int> cls(0, vocab_size - 1);
  BitMatrix m(vocab_size, num_frames, 0);
  for (int t = 0; t < num_frames; ++t) {
    if (!anchor(rng)) continue;
    int c = cls(rng);
    if (c == blank_id) c = (c + 1) % vocab_size;
    m(c, t) = 1;
  }
  return m;
}

bool SameBits(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    if (std::bit_cast<std::uint64_t>(a.data()[k]) !=
        std::bit_cast<std::uint64_t>(b.data()[k]))
      return false;
  return true;
}

Outcome CtcOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> vocab_dist(2, 4);
  std::uniform_int_distribution<int> frame_dist(1, 8);
  double worst = 0.0;
  int loss_mismatch = 0;
  int path_mismatch = 0;
  for (int n = 0; n < kCtcInstances; ++n) {
    const int vocab_size = vocab_dist(rng);
    const int num_frames = frame_dist(rng);
    const Vocabulary v = oracle::SmallVocabulary(vocab_size);
    Matrix z = oracle::RandomLogits(rng, vocab_size, num_frames, 3.0);
    if (n % 4 == 0)
      for (double &x : z.data()) x = std::round(x);  // exact ties
    const EmissionMatrix p = EmissionMatrix::FromLogits(v, z);
    const auto y = oracle::RandomTarget(rng, vocab_size, 3, num_frames);
    const auto e = oracle::EnumeratePaths(p, y);
    const double loss = CtcLoss(p, y).loss;
    const double rel = std::abs(loss - e.loss) / std::max(1.0, std::abs(e.loss));
    worst = std::max(worst, rel);
    if (rel > kCtcRelTol) ++loss_mismatch;
    const BestPath best = ViterbiAlign(p, y);
    if (best.frame_ids != e.best_path ||
        std::abs(best.log_prob - e.best_log_prob) >
            kCtcRelTol * std::max(1.0, std::abs(e.best_log_prob)))
      ++path_mismatch;
  }
  const double secs = Seconds(start);
  return {loss_mismatch == 0 && path_mismatch == 0 && secs < kOracleBudgetSeconds,
          Fmt("%d instances, max rel err %.2e, %d loss / %d path mismatches, %.1f s",
              kCtcInstances, worst, loss_mismatch, path_mismatch, secs)};
}

Outcome LcsOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> n_dist(1, 6);
  std::uniform_int_distribution<int> m_dist(1, 8);
  std::uniform_real_distribution<double> density(0.05, 0.8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  for (int n = 0; n < kLcsInstances; ++n) {
    const int rows = n_dist(rng);
    const int cols = m_dist(rng);
    std::bernoulli_distribution coin(density(rng));
    ValidMatchSet valid(rows, cols);
    Matrix cost(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        if (coin(rng)) valid.Insert(i, j);
        cost(i, j) = unit(rng);
      }
    const int want = oracle::BruteForceAlign(valid).cardinality;
    auto count = [](const BitMatrix &b) {
      return static_cast<int>(std::count(b.data().begin(), b.data().end(), 1));
    };
    if (count(LcsAlign(valid)) != want || count(LcsAlign(valid, cost)) != want)
      ++mismatches;
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < kOracleBudgetSeconds,
          Fmt("%d instances, %d cardinality mismatches, %.1f s", kLcsInstances,
              mismatches, secs)};
}

Outcome Gradients() {
  std::mt19937_64 rng(303);
  double worst_ctc = 0.0, worst_ce = 0.0, worst_lcs = 0.0;
  auto check = [](const Vocabulary &v, const Matrix &z,
                  const std::function<LossAndGradient(const EmissionMatrix &)> &fn) {
    const Matrix analytic = fn(EmissionMatrix::FromLogits(v, z)).grad;
    const Matrix numeric = oracle::NumericGradient(
        [&](const Matrix &x) { return fn(EmissionMatrix::FromLogits(v, x)).loss; }, z);
    return oracle::MaxRelativeError(analytic, numeric);
  };
  for (int n = 0; n < kGradInstances; ++n) {
    const int vocab_size = 3 + n % 3;
    const int num_frames = 2 + n % 7;
    const Vocabulary v = oracle::SmallVocabulary(vocab_size);
    const Matrix z = oracle::RandomLogits(rng, vocab_size, num_frames);
    const BitMatrix mask = RandomMask(rng, vocab_size, num_frames, 0);
    const auto y = oracle::RandomTarget(rng, vocab_size, 3, num_frames);
    HybridOptions o;
    o.lambda = 0.5;
    o.epsilon = 1e-3;
    worst_ctc = std::max(worst_ctc, check(v, z, [&](const EmissionMatrix &p) {
      return CtcLoss(p, y);
    }));
    worst_ce = std::max(worst_ce, check(v, z, [&](const EmissionMatrix &p) {
      return CeAnchored(p, mask);
    }));
    worst_lcs = std::max(worst_lcs, check(v, z, [&](const EmissionMatrix &p) {
      const HybridResult h = LcsCtcLoss(p, mask, y, o);
      return LossAndGradient{h.breakdown.total, h.grad};
    }));
  }
  const double worst = std::max({worst_ctc, worst_ce, worst_lcs});
  return {worst <= kGradRelTol,
          Fmt("%d instances per loss, max rel err ctc %.1e, ce %.1e, lcs_ctc %.1e",
              kGradInstances, worst_ctc, worst_ce, worst_lcs)};
}

Outcome Reductions() {
  std::mt19937_64 rng(404);
  int value_diff = 0, grad_diff = 0, mask_diff = 0;
  for (int n = 0; n < kReductionInstances; ++n) {
    const int vocab_size = 2 + n % 5;
    const int num_frames = 1 + n % 12;
    const Vocabulary v = oracle::SmallVocabulary(vocab_size);
    const EmissionMatrix p =
        EmissionMatrix::FromLogits(v, oracle::RandomLogits(rng, vocab_size, num_frames, 4.0));
    const auto y = oracle::RandomTarget(rng, vocab_size, 4, num_frames);
    const BitMatrix empty(vocab_size, num_frames, 0);
    HybridOptions o;
    o.lambda = 0.0;
    const HybridResult h = LcsCtcLoss(p, empty, y, o);
    const LossAndGradient c = CtcLoss(p, y);
    if (std::bit_cast<std::uint64_t>(h.breakdown.total) !=
        std::bit_cast<std::uint64_t>(c.loss))
      ++value_diff;
    if (h.grad != c.grad) ++grad_diff;
    const EmissionMatrix m = MaskEmissions(p, empty, 1e-8);
    if (!(m == p) || !SameBits(m.probs(), p.probs())) ++mask_diff;
  }

  // The same identity one level up: a trainer run without anchors.
  SyntheticConfig dc;
  dc.num_utts = 40;
  dc.heldout_utts = 0;
  dc.dysfluency_rate = 0.3;
  const SyntheticDataset d = GenerateSynthetic(dc, Sim());
  TrainConfig lcs;
  lcs.lambda = 0.0;
  lcs.tol = 1e-9;
  lcs.cost_floor = -1.0;
  lcs.epochs = 5;
  TrainConfig vanilla = lcs;
  vanilla.objective = Objective::kVanillaCtc;
  const TrainResult a = Train(d, Sim(), lcs);
  const TrainResult b = Train(d, Sim(), vanilla);
  const bool trainer_same = a.log.epoch_loss == b.log.epoch_loss &&
                            SameBits(a.model.weights, b.model.weights) &&
                            a.model.bias == b.model.bias;

  return {value_diff == 0 && grad_diff == 0 && mask_diff == 0 && trainer_same,
          Fmt("%d instances, %d value / %d gradient / %d mask differences, "
              "trainer %s",
              kReductionInstances, value_diff, grad_diff, mask_diff,
              trainer_same ? "identical" : "differs")};
}

Outcome Metrics() {
  std::mt19937_64 rng(505);
  const std::vector<std::string> pool = {"IH", "N", "S", "Z", "ER", "T",
                                         "AH", "D", "IY", "M"};
  std::uniform_int_distribution<int> len(0, 10);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  int violations = 0;
  for (int n = 0; n < kMetricPairs; ++n) {
    std::vector<std::string> ref(1 + len(rng)), hyp(len(rng));
    for (auto &p : ref) p = pool[pick(rng)];
    for (auto &p : hyp) p = pool[pick(rng)];
    if (Wper(ref, hyp, Sim()) > Per(ref, hyp)) ++violations;
  }
  const std::vector<std::string> ref = {"IH", "N", "S", "ER", "T"};
  const std::vector<std::string> hyp = {"IH", "S", "N", "S", "ER", "AH", "T"};
  const double per = Per(ref, hyp);
  const Segmentation a{{{"IH", 0, 5}}};
  const Segmentation b{{{"IH", 2, 7}}};
  const auto bl = BoundaryLoss(b, a, 20.0).mean_ms;
  const bool ok = violations == 0 && per == 0.4 && bl && *bl == 40.0;
  return {ok, Fmt("%d pairs, %d wper > per, dysfluency PER %.17g, BL %.17g ms",
                  kMetricPairs, violations, per, bl.value_or(-1.0))};
}

Outcome TolSweep() {
  const std::vector<double> tols = {0.9, 1.0, 1.1, 1.2, 1.3};
  bool ok = true;
  std::string detail = "cost_noise 0.3, dysfluency 0.3;";
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticConfig dc;
    dc.seed = seed;
    dc.dysfluency_rate = 0.3;
    dc.cost_noise = 0.3;
    const auto sweep = SweepTolerance(GenerateSynthetic(dc, Sim()), Sim(), tols, 0.05);
    for (std::size_t k = 1; k < sweep.size(); ++k)
      if (sweep[k].constrained_ratio < sweep[k - 1].constrained_ratio ||
          sweep[k].precision > sweep[k - 1].precision)
        ok = false;
    if (seed == 1) {
      detail += " seed 1 (tol ratio precision)";
      for (const auto &pt : sweep)
        detail += Fmt(" %.1f %.3f %.3f,", pt.tol, pt.constrained_ratio, pt.precision);
      detail.pop_back();
    }
  }
  detail += Fmt("; seeds 1-%d %s", kSeeds, ok ? "monotone" : "NOT monotone");
  return {ok, detail};
}

Outcome ToyTrainer() {
  const auto start = Clock::now();
  double per[2] = {0, 0}, blank[2] = {0, 0};
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticConfig dc;
    dc.seed = seed;
    dc.dysfluency_rate = 0.3;
    const SyntheticDataset d = GenerateSynthetic(dc, Sim());
    int k = 0;
    for (Objective o : {Objective::kVanillaCtc, Objective::kLcsCtc}) {
      TrainConfig tc;
      tc.objective = o;
      tc.seed = seed;
      const EvalReport e = Evaluate(Train(d, Sim(), tc).model, d.heldout, Sim());
      per[k] += e.per / kSeeds;
      blank[k] += e.peakiness.blank_frame_fraction / kSeeds;
      ++k;
    }
  }
  const double secs = Seconds(start);
  return {per[1] <= per[0] && blank[1] <= blank[0] && secs < kTrainerBudgetSeconds,
          Fmt("held-out PER vanilla %.4f lcs %.4f, blank fraction vanilla %.4f "
              "lcs %.4f, %d seeds, %.1f s",
              per[0], per[1], blank[0], blank[1], kSeeds, secs)};
}

Outcome RoundTrip() {
  std::mt19937_64 rng(808);
  int failures = 0;
  for (int n = 0; n < 200; ++n) {
    CostMatrix c{{"IH", "N", "S"}, Matrix(3, 9)};
    for (double &v : c.values.data()) {
      do v = std::bit_cast<double>(rng() >> 1);
      while (!std::isfinite(v));
    }
    if (!SameBits(ParseCostMatrix(CostMatrixJson(c)).values, c.values)) ++failures;

    const Vocabulary v = oracle::SmallVocabulary(4);
    const EmissionMatrix p =
        EmissionMatrix::FromLogits(v, oracle::RandomLogits(rng, 4, 9, 6.0));
    const EmissionMatrix q = ParseEmissions(EmissionsJson(p));
    if (!(q.vocab() == p.vocab()) || !SameBits(q.probs(), p.probs())) ++failures;

    AlignmentMask m{{"IH", "N", "S"}, RandomMask(rng, 3, 9, -1)};
    if (!(ParseMask(MaskJson(m)) == m)) ++failures;
  }

  // Full pipeline twice from the same seeds.
  auto pipeline = [] {
    SyntheticConfig dc;
    dc.num_utts = 60;
    dc.heldout_utts = 20;
    dc.dysfluency_rate = 0.3;
    dc.seed = 7;
    const SyntheticDataset d = GenerateSynthetic(dc, Sim());
    TrainConfig tc;
    tc.epochs = 10;
    tc.seed = 7;
    const TrainResult r = Train(d, Sim(), tc);
    const EvalReport e = Evaluate(r.model, d.heldout, Sim());
    std::string out = ModelJson(r.model, dc, tc, r.log);
    for (const auto &u : d.utterances) out += CostMatrixJson(u.cost);
    out += Fmt("%a %a %a %a", e.per, e.wper, e.bl_frames.value_or(-1.0),
               e.peakiness.blank_frame_fraction);
    return out;
  };
  const bool deterministic = pipeline() == pipeline();
  return {failures == 0 && deterministic,
          Fmt("600 matrix round trips, %d not bit-exact; pipeline %s", failures,
              deterministic ? "deterministic" : "NOT deterministic")};
}

}  // namespace

int main() {
  struct Criterion {
    const char *name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"ctc oracle equivalence", CtcOracle},
      {"lcs oracle equivalence", LcsOracle},
      {"gradient correctness", Gradients},
      {"reduction identities", Reductions},
      {"metric invariants", Metrics},
      {"tol monotonicity", TolSweep},
      {"toy trainer comparison", ToyTrainer},
      {"round trips and determinism", RoundTrip},
  };
  int failed = 0;
  int index = 0;
  for (const auto &c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", index,
                c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed ? 1 : 0;
}
