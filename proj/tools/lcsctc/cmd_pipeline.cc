// target, align, loss, grad-check, decode, emissions-dump.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <random>

#include <json.hpp>

#include "common.h"
#include "lcsctc/cost_matrix.h"
#include "lcsctc/ctc.h"
#include "lcsctc/errors.h"
#include "lcsctc/io.h"
#include "lcsctc/lcs_align.h"

namespace lcsctc::cli {
namespace {

using json = nlohmann::ordered_json;

std::string Shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json SpansJson(const Segmentation &seg, double frame_ms) {
  json spans = json::array();
  for (const Span &s : seg.spans)
    spans.push_back({{"phoneme", s.phoneme},
                     {"onset", s.onset},
                     {"offset", s.offset},
                     {"onset_ms", s.onset * frame_ms},
                     {"offset_ms", s.offset * frame_ms}});
  return spans;
}

// Label-space masks are expanded; vocabulary-space masks are used as is.
BitMatrix VocabMask(const AlignmentMask &mask, const Vocabulary &vocab) {
  if (mask.labels == vocab.symbols()) return mask.bits;
  return ExpandMask(mask, vocab);
}

}  // namespace

Handler AddTarget(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    std::string segmentation, out;
    LabelSource labels;
    int frames = 0;
    double edge_sigma = 1.0;
    bool no_attenuate = false, normalize = false;
    double noise = 0.0;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand("target", "Build a target cost matrix from a segmentation");
  sub->add_option("--segmentation", o->segmentation, "Segmentation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  AddLabelOptions(sub, o->labels, false);
  sub->add_option("--frames", o->frames, "Number of frames (default: end of the last span)")
      ->check(kPositive);
  auto *sigma = sub->add_option("--edge-sigma", o->edge_sigma,
                                "Fixed edge attenuation width (default scales with span length)")
                    ->check(kPositive);
  auto *no_att = sub->add_flag("--no-attenuate", o->no_attenuate);
  sigma->excludes(no_att);
  sub->add_flag("--normalize", o->normalize, "Softmax-normalize each row over time");
  sub->add_option("--noise", o->noise, "Uniform noise level, floored at 0")
      ->check(kNonNegative);
  sub->add_option("--seed", o->seed)->capture_default_str();
  sub->add_option("--out", o->out, "Output path (default stdout)");

  return [o, sigma, &g] {
    const SimilarityTable sim = Similarity(g);
    const Segmentation seg = ParseSegmentation(ReadFile(o->segmentation));
    std::vector<std::string> labels = ReadLabels(o->labels);
    if (labels.empty()) labels = seg.Labels();
    const int frames = o->frames > 0 ? o->frames : seg.end_frame();
    TargetCostOptions opts;
    opts.attenuate = !o->no_attenuate;
    opts.normalize = o->normalize;
    if (sigma->count() > 0) opts.edge_sigma = o->edge_sigma;
    const CostMatrix c =
        SynthesizePredictedCost(seg, labels, sim, frames, o->noise, o->seed, opts);
    Emit(o->out, CostMatrixJson(c));
  };
}

Handler AddAlign(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    std::string cost, out;
    LabelSource labels;
    LcsOptions lcs;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand("align", "Compute the LCS alignment mask of a cost matrix");
  sub->add_option("--cost", o->cost, "Cost matrix JSON")->required()->check(CLI::ExistingFile);
  AddLabelOptions(sub, o->labels, false);
  sub->add_option("--tol", o->lcs.tol, "Match tolerance")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--cost-floor", o->lcs.cost_floor, "Self-match cost ceiling")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output path (default stdout)");

  return [o, &g] {
    const SimilarityTable sim = Similarity(g);
    const CostMatrix cost = ParseCostMatrix(ReadFile(o->cost));
    const std::vector<std::string> labels = ReadLabels(o->labels);
    if (!labels.empty() && labels != cost.labels)
      throw DomainError("labels '" + JoinLabels(labels) +
                        "' do not match the cost matrix rows '" +
                        JoinLabels(cost.labels) + "'");
    Emit(o->out, MaskJson(AlignCostMatrix(cost, sim, o->lcs)));
  };
}

Handler AddLoss(CLI::App &app, const GlobalOptions &) {
  struct Opts {
    std::string emissions, mask, reduction = "sum";
    LabelSource labels;
    HybridOptions hybrid;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand("loss", "Evaluate the LCS-CTC loss");
  sub->add_option("--emissions", o->emissions, "Emission JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--mask", o->mask, "Mask JSON, label or vocabulary space")
      ->required()
      ->check(CLI::ExistingFile);
  AddLabelOptions(sub, o->labels, true);
  sub->add_option("--lambda", o->hybrid.lambda, "Weight of the CE term")
      ->check(kUnitInterval)
      ->capture_default_str();
  sub->add_option("--epsilon", o->hybrid.epsilon, "Mask smoothing")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--reduction", o->reduction, "CTC reduction")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();

  return [o] {
    const EmissionMatrix p = ParseEmissions(ReadFile(o->emissions));
    const BitMatrix mask = VocabMask(ParseMask(ReadFile(o->mask)), p.vocab());
    const std::vector<int> target = p.vocab().Ids(ReadLabels(o->labels));
    HybridOptions opts = o->hybrid;
    opts.reduction = o->reduction == "mean" ? CtcReduction::kMeanByTargetLength
                                            : CtcReduction::kSum;
    const LossBreakdown b = LcsCtcLoss(p, mask, target, opts).breakdown;
    const json out = {{"ctc_loss", b.ctc_loss},
                      {"ce_loss", b.ce_loss},
                      {"total", b.total},
                      {"lambda", b.lambda},
                      {"num_anchored_frames", b.num_anchored_frames}};
    Emit("", out.dump(2));
  };
}

Handler AddGradCheck(CLI::App &app, const GlobalOptions &) {
  struct Opts {
    int instances = 100;
    std::uint64_t seed = 1;
    double step = 1e-5, tolerance = 1e-5, lambda = 0.5, epsilon = 1e-3;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand(
      "grad-check", "Compare analytic gradients with central differences");
  sub->add_option("--instances", o->instances)->check(kPositive)->capture_default_str();
  sub->add_option("--seed", o->seed)->capture_default_str();
  sub->add_option("--step", o->step, "Finite-difference step")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--tolerance", o->tolerance, "Largest acceptable relative error")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--lambda", o->lambda)->check(kUnitInterval)->capture_default_str();
  sub->add_option("--epsilon", o->epsilon)->check(kPositive)->capture_default_str();

  return [o] {
    static const std::vector<std::string> kSymbols = {"IH", "N", "S"};
    std::mt19937_64 rng(o->seed);
    std::uniform_real_distribution<double> logit(-2.0, 2.0);
    std::bernoulli_distribution anchor(0.4);

    auto rel_error = [&](const Vocabulary &v, const Matrix &z, auto fn) {
      const Matrix analytic = fn(EmissionMatrix::FromLogits(v, z)).grad;
      Matrix probe = z;
      double worst = 0.0;
      for (std::size_t k = 0; k < z.data().size(); ++k) {
        probe.data()[k] = z.data()[k] + o->step;
        const double up = fn(EmissionMatrix::FromLogits(v, probe)).loss;
        probe.data()[k] = z.data()[k] - o->step;
        const double down = fn(EmissionMatrix::FromLogits(v, probe)).loss;
        probe.data()[k] = z.data()[k];
        const double numeric = (up - down) / (2.0 * o->step);
        const double a = analytic.data()[k];
        worst = std::max(worst, std::abs(a - numeric) /
                                    std::max({1.0, std::abs(a), std::abs(numeric)}));
      }
      return worst;
    };

    double ctc = 0.0, ce = 0.0, lcs = 0.0;
    for (int n = 0; n < o->instances; ++n) {
      const int vocab_size = 2 + n % 3;
      const int frames = 2 + n % 7;
      const Vocabulary v(std::span<const std::string>(kSymbols.data(), vocab_size - 1));
      Matrix z(vocab_size, frames);
      for (double &x : z.data()) x = logit(rng);
      BitMatrix mask(vocab_size, frames, 0);
      std::uniform_int_distribution<int> cls(1, vocab_size - 1);
      for (int t = 0; t < frames; ++t)
        if (anchor(rng)) mask(cls(rng), t) = 1;
      std::vector<int> target;
      std::uniform_int_distribution<int> len(1, 3);
      do {
        target.assign(len(rng), 0);
        for (int &id : target) id = cls(rng);
      } while (MinimumFrames(target) > frames);

      HybridOptions h;
      h.lambda = o->lambda;
      h.epsilon = o->epsilon;
      ctc = std::max(ctc, rel_error(v, z, [&](const EmissionMatrix &p) {
        return CtcLoss(p, target);
      }));
      ce = std::max(ce, rel_error(v, z, [&](const EmissionMatrix &p) {
        return CeAnchored(p, mask);
      }));
      lcs = std::max(lcs, rel_error(v, z, [&](const EmissionMatrix &p) {
        const HybridResult r = LcsCtcLoss(p, mask, target, h);
        return LossAndGradient{r.breakdown.total, r.grad};
      }));
    }
    const double worst = std::max({ctc, ce, lcs});
    const json out = {{"instances", o->instances},
                      {"ctc", ctc},
                      {"ce_anchored", ce},
                      {"lcs_ctc", lcs},
                      {"max_relative_error", worst},
                      {"tolerance", o->tolerance}};
    Emit("", out.dump(2));
    if (!(worst <= o->tolerance))
      throw Error("max relative error " + Shortest(worst) + " exceeds " +
                  Shortest(o->tolerance));
  };
}

Handler AddDecode(CLI::App &app, const GlobalOptions &) {
  struct Opts {
    std::string emissions, out;
    LabelSource labels;
    double frame_ms = 20.0;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand(
      "decode", "Greedy decoding, plus Viterbi alignment when labels are given");
  sub->add_option("--emissions", o->emissions, "Emission JSON")
      ->required()
      ->check(CLI::ExistingFile);
  AddLabelOptions(sub, o->labels, false);
  sub->add_option("--frame-ms", o->frame_ms, "Frame duration in milliseconds")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output path (default stdout)");

  return [o] {
    const EmissionMatrix p = ParseEmissions(ReadFile(o->emissions));
    json out = {{"greedy", GreedyDecodeSymbols(p)}};
    const std::vector<std::string> labels = ReadLabels(o->labels);
    if (!labels.empty()) {
      const BestPath best = ViterbiAlign(p, p.vocab().Ids(labels));
      out["viterbi"] = {{"log_prob", best.log_prob},
                        {"spans", SpansJson(best.segmentation, o->frame_ms)}};
    }
    Emit(o->out, out.dump(2));
  };
}

Handler AddEmissionsDump(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    std::string emissions, model, utt, split = "heldout", format = "csv", out;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand(
      "emissions-dump", "Write per-frame probabilities as CSV or emission JSON");
  auto *em = sub->add_option("--emissions", o->emissions, "Emission JSON")
                 ->check(CLI::ExistingFile);
  auto *model = sub->add_option("--model", o->model, "Saved toy model")
                    ->check(CLI::ExistingFile);
  auto *utt = sub->add_option("--utt", o->utt, "Utterance id or index within --split");
  sub->add_option("--split", o->split)
      ->check(CLI::IsMember({"train", "heldout"}))
      ->capture_default_str();
  em->excludes(model);
  model->excludes(em);
  utt->needs(model);
  auto *source = sub->add_option_group("source");
  source->add_option(em);
  source->add_option(model);
  source->require_option(1);
  sub->add_option("--format", o->format)
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output path (default stdout)");

  return [o, &g] {
    std::optional<EmissionMatrix> p;
    if (!o->emissions.empty()) {
      p = ParseEmissions(ReadFile(o->emissions));
    } else {
      const SavedModel saved = ParseModel(ReadFile(o->model));
      const SyntheticDataset data = GenerateSynthetic(saved.data, Similarity(g));
      const auto &set = o->split == "train" ? data.utterances : data.heldout;
      if (set.empty()) throw DomainError("the " + o->split + " split is empty");
      std::size_t index = 0;
      if (!o->utt.empty()) {
        auto it = std::find_if(set.begin(), set.end(),
                               [&](const auto &u) { return u.id == o->utt; });
        if (it != set.end()) {
          index = static_cast<std::size_t>(it - set.begin());
        } else {
          auto [ptr, ec] = std::from_chars(o->utt.data(), o->utt.data() + o->utt.size(), index);
          if (ec != std::errc() || ptr != o->utt.data() + o->utt.size() ||
              index >= set.size())
            throw DomainError("no utterance '" + o->utt + "' in the " + o->split + " split");
        }
      }
      p = saved.model.Emit(set[index].features);
    }
    if (o->format == "json") {
      Emit(o->out, EmissionsJson(*p));
      return;
    }

    std::string csv = "frame";
    for (const auto &s : p->vocab().symbols()) csv += "," + s;
    csv += '\n';
    for (int t = 0; t < p->num_frames(); ++t) {
      csv += std::to_string(t);
      for (int k = 0; k < p->vocab_size(); ++k) csv += "," + Shortest((*p)(k, t));
      csv += '\n';
    }
    Emit(o->out, csv);
  };
}

}  // namespace lcsctc::cli
