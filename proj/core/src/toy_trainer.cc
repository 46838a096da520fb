// lcsctc/toy_trainer.cc

#include "lcsctc/toy_trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "lcsctc/errors.h"

namespace lcsctc {

namespace {

int SampleSpanLength(std::mt19937_64 &rng, double mean) {
  const int lo = std::max(2, static_cast<int>(std::lround(mean / 2.0)));
  const int hi = std::max(lo, static_cast<int>(std::lround(1.5 * mean)));
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Uniform pick from `choices` avoiding the given neighbours.
int SampleAvoiding(std::mt19937_64 &rng, int choices, int avoid_a,
                   int avoid_b) {
  std::vector<int> allowed;
  for (int k = 0; k < choices; ++k)
    if (k != avoid_a && k != avoid_b) allowed.push_back(k);
  return allowed[std::uniform_int_distribution<std::size_t>(
      0, allowed.size() - 1)(rng)];
}

BitMatrix FrameLabelMask(const SyntheticUtterance &u, const Vocabulary &vocab) {
  BitMatrix m(vocab.size(), u.num_frames(), 0);
  for (const Span &s : u.segmentation.spans) {
    const int id = vocab.Id(s.phoneme);
    for (int t = s.onset; t < s.offset; ++t) m(id, t) = 1;
  }
  return m;
}

// Cost of matching each target phoneme to each frame read off the model's
// own emissions: 1 - P[label, t].
CostMatrix EmissionCost(const EmissionMatrix &p,
                        const std::vector<std::string> &labels) {
  CostMatrix c{labels, Matrix(static_cast<int>(labels.size()), p.num_frames())};
  for (int i = 0; i < c.num_labels(); ++i) {
    const int id = p.vocab().Id(labels[i]);
    for (int t = 0; t < p.num_frames(); ++t)
      c.values(i, t) = std::max(0.0, 1.0 - p(id, t));
  }
  return c;
}

}  // namespace

void ValidateSyntheticConfig(const SyntheticConfig &c) {
  if (c.num_utts < 1) throw DomainError("num_utts must be >= 1");
  if (c.heldout_utts < 0) throw DomainError("heldout_utts must be >= 0");
  if (c.vocab_subset.size() < 3)
    throw DomainError("vocab_subset needs at least 3 phonemes");
  if (c.min_phonemes < 1 || c.max_phonemes < c.min_phonemes)
    throw DomainError("phoneme count range is empty");
  if (!(c.mean_span_frames >= 2.0))
    throw DomainError("mean_span_frames must be >= 2");
  if (c.feature_dim < 1) throw DomainError("feature_dim must be >= 1");
  if (!(c.feature_noise >= 0.0))
    throw DomainError("feature_noise must be >= 0");
  if (!(c.dysfluency_rate >= 0.0 && c.dysfluency_rate <= 1.0))
    throw DomainError("dysfluency_rate must lie in [0, 1]");
  if (!(c.cost_noise >= 0.0)) throw DomainError("cost_noise must be >= 0");
  if (c.edge_sigma && !(*c.edge_sigma > 0.0))
    throw DomainError("edge_sigma must be positive");
}

SyntheticDataset GenerateSynthetic(const SyntheticConfig &config,
                                   const SimilarityTable &sim) {
  ValidateSyntheticConfig(config);
  for (const auto &s : config.vocab_subset) sim.Index(s);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int num_classes = static_cast<int>(config.vocab_subset.size());
  const int dim = config.feature_dim;

  SyntheticDataset data{config, Vocabulary(config.vocab_subset),
                        Matrix(num_classes, dim), {}, {}};
  for (double &v : data.prototypes.data()) v = gauss(rng);

  std::uniform_int_distribution<int> length_dist(config.min_phonemes,
                                                 config.max_phonemes);
  std::bernoulli_distribution insert_dist(config.dysfluency_rate);

  auto make = [&](const char *prefix, int u) {
    SyntheticUtterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "%s%04d", prefix, u);
    utt.id = id;

    const int length = length_dist(rng);
    std::vector<int> target(length);
    for (int i = 0; i < length; ++i)
      target[i] = SampleAvoiding(rng, num_classes, i > 0 ? target[i - 1] : -1, -1);

    // Insert before target position `insert_at`, or nowhere (-1).
    int insert_at = -1;
    int inserted = -1;
    if (insert_dist(rng)) {
      insert_at = std::uniform_int_distribution<int>(0, length)(rng);
      inserted = SampleAvoiding(rng, num_classes,
                                insert_at > 0 ? target[insert_at - 1] : -1,
                                insert_at < length ? target[insert_at] : -1);
    }

    int frame = 0;
    auto push_span = [&](int cls, int label_index) {
      const int len = SampleSpanLength(rng, config.mean_span_frames);
      utt.segmentation.spans.push_back(
          {config.vocab_subset[cls], frame, frame + len});
      utt.frame_label.insert(utt.frame_label.end(), len, label_index);
      frame += len;
    };
    for (int i = 0; i <= length; ++i) {
      if (i == insert_at) push_span(inserted, -1);
      if (i < length) push_span(target[i], i);
    }
    for (int cls : target) utt.target.push_back(config.vocab_subset[cls]);

    const int num_frames = frame;
    utt.features = Matrix(num_frames, dim);
    for (const Span &s : utt.segmentation.spans) {
      const int cls = data.vocab.Id(s.phoneme) - 1;
      for (int t = s.onset; t < s.offset; ++t)
        for (int f = 0; f < dim; ++f)
          utt.features(t, f) =
              data.prototypes(cls, f) + config.feature_noise * gauss(rng);
    }

    TargetCostOptions cost_options;
    cost_options.edge_sigma = config.edge_sigma;
    utt.cost = SynthesizePredictedCost(utt.segmentation, utt.target, sim,
                                       num_frames, config.cost_noise, rng(),
                                       cost_options);
    return utt;
  };

  data.utterances.reserve(config.num_utts);
  for (int u = 0; u < config.num_utts; ++u) data.utterances.push_back(make("utt", u));
  data.heldout.reserve(config.heldout_utts);
  for (int u = 0; u < config.heldout_utts; ++u) data.heldout.push_back(make("dev", u));
  return data;
}

std::string_view ObjectiveName(Objective o) {
  switch (o) {
    case Objective::kVanillaCtc: return "vanilla_ctc";
    case Objective::kLcsCtc: return "lcs_ctc";
    case Objective::kCeCtc: return "ce_ctc";
  }
  return "unknown";
}

Objective ParseObjective(std::string_view name) {
  if (name == "vanilla_ctc") return Objective::kVanillaCtc;
  if (name == "lcs_ctc") return Objective::kLcsCtc;
  if (name == "ce_ctc") return Objective::kCeCtc;
  throw DomainError("unknown objective '" + std::string(name) +
                    "' (expected vanilla_ctc, lcs_ctc or ce_ctc)");
}

void ValidateTrainConfig(const TrainConfig &c) {
  if (c.epochs < 0) throw DomainError("epochs must be >= 0");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
    throw DomainError("learning rate must be finite and >= 0");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0))
    throw DomainError("lambda must lie in [0, 1]");
  if (!(c.tol > 0.0)) throw DomainError("tol must be positive");
  if (!(c.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(c.init_scale >= 0.0)) throw DomainError("init_scale must be >= 0");
}

Matrix LinearModel::Logits(const Matrix &features) const {
  if (features.cols() != feature_dim())
    throw DomainError("feature dimension " + std::to_string(features.cols()) +
                      " does not match the model (" +
                      std::to_string(feature_dim()) + ")");
  const int vocab_size = weights.cols();
  Matrix z(vocab_size, features.rows());
  for (int t = 0; t < features.rows(); ++t) {
    for (int v = 0; v < vocab_size; ++v) {
      double acc = bias[v];
      for (int f = 0; f < feature_dim(); ++f)
        acc += features(t, f) * weights(f, v);
      z(v, t) = acc;
    }
  }
  return z;
}

EmissionMatrix LinearModel::Emit(const Matrix &features) const {
  return EmissionMatrix::FromLogits(vocab, Logits(features));
}

std::vector<BitMatrix> StaticMasks(const SyntheticDataset &data,
                                   const SimilarityTable &sim,
                                   const LcsOptions &options) {
  std::vector<BitMatrix> masks;
  masks.reserve(data.utterances.size());
  for (const auto &u : data.utterances)
    masks.push_back(ExpandMask(AlignCostMatrix(u.cost, sim, options), data.vocab));
  return masks;
}

TrainResult Train(const SyntheticDataset &data, const SimilarityTable &sim,
                  const TrainConfig &config) {
  ValidateTrainConfig(config);
  if (data.utterances.empty()) throw DomainError("training set is empty");

  const int vocab_size = data.vocab.size();
  const int dim = data.config.feature_dim;
  const LcsOptions lcs{config.tol, config.cost_floor};

  TrainResult result;
  LinearModel &model = result.model;
  model.vocab = data.vocab;
  model.weights = Matrix(dim, vocab_size);
  model.bias.assign(vocab_size, 0.0);
  {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double &w : model.weights.data()) w = config.init_scale * gauss(rng);
  }

  std::vector<std::vector<int>> targets;
  for (const auto &u : data.utterances) targets.push_back(data.vocab.Ids(u.target));

  std::vector<BitMatrix> masks;
  if (config.objective == Objective::kLcsCtc && !config.refresh_masks)
    masks = StaticMasks(data, sim, lcs);
  if (config.objective == Objective::kCeCtc)
    for (const auto &u : data.utterances) masks.push_back(FrameLabelMask(u, data.vocab));

  HybridOptions hybrid;
  hybrid.lambda = config.lambda;
  hybrid.epsilon = config.epsilon;
  hybrid.reduction = CtcReduction::kMeanByTargetLength;

  const double inv_utts = 1.0 / static_cast<double>(data.utterances.size());

  // Mean objective over the dataset; accumulates parameter gradients when
  // the output pointers are non-null.
  auto evaluate = [&](Matrix *grad_w, std::vector<double> *grad_b,
                      int *anchored) {
    double total = 0.0;
    for (std::size_t n = 0; n < data.utterances.size(); ++n) {
      const SyntheticUtterance &u = data.utterances[n];
      const EmissionMatrix p = model.Emit(u.features);

      double loss = 0.0;
      Matrix grad;
      switch (config.objective) {
        case Objective::kVanillaCtc: {
          LossAndGradient r = CtcLoss(p, targets[n]);
          const double scale = 1.0 / static_cast<double>(targets[n].size());
          loss = r.loss * scale;
          for (double &g : r.grad.data()) g *= scale;
          grad = std::move(r.grad);
          break;
        }
        case Objective::kLcsCtc: {
          BitMatrix refreshed;
          if (config.refresh_masks)
            refreshed = ExpandMask(
                AlignCostMatrix(EmissionCost(p, u.target), sim, lcs), data.vocab);
          const BitMatrix &mask = config.refresh_masks ? refreshed : masks[n];
          HybridResult r = LcsCtcLoss(p, mask, targets[n], hybrid);
          loss = r.breakdown.total;
          if (anchored) *anchored += r.breakdown.num_anchored_frames;
          grad = std::move(r.grad);
          break;
        }
        case Objective::kCeCtc: {
          HybridResult r = CeCtcLoss(p, masks[n], targets[n], hybrid);
          loss = r.breakdown.total;
          if (anchored) *anchored += r.breakdown.num_anchored_frames;
          grad = std::move(r.grad);
          break;
        }
      }
      if (!std::isfinite(loss))
        throw Error("training diverged: non-finite loss on " + u.id);
      total += loss;

      if (!grad_w) continue;
      for (int t = 0; t < u.num_frames(); ++t) {
        for (int v = 0; v < vocab_size; ++v) {
          const double g = grad(v, t) * inv_utts;
          (*grad_b)[v] += g;
          for (int f = 0; f < dim; ++f) (*grad_w)(f, v) += u.features(t, f) * g;
        }
      }
    }
    return total * inv_utts;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Matrix grad_w(dim, vocab_size, 0.0);
    std::vector<double> grad_b(vocab_size, 0.0);
    int anchored = 0;
    const double loss = evaluate(&grad_w, &grad_b, &anchored);
    result.log.epoch_loss.push_back(loss);
    result.log.anchored_frames.push_back(anchored);
    for (std::size_t i = 0; i < grad_w.data().size(); ++i)
      model.weights.data()[i] -= config.learning_rate * grad_w.data()[i];
    for (int v = 0; v < vocab_size; ++v)
      model.bias[v] -= config.learning_rate * grad_b[v];
  }
  result.log.final_loss = evaluate(nullptr, nullptr, nullptr);
  return result;
}

EvalReport Evaluate(const LinearModel &model,
                    const std::vector<SyntheticUtterance> &utterances,
                    const SimilarityTable &sim) {
  if (utterances.empty()) throw DomainError("evaluation set is empty");
  EvalReport report;
  CorpusScores scores;
  PeakinessStats peak;
  for (const auto &u : utterances) {
    const EmissionMatrix p = model.Emit(u.features);
    const std::vector<std::string> ref = u.Spoken();
    const std::vector<std::string> hyp = GreedyDecodeSymbols(p);
    scores.Add(AlignUnit(ref, hyp), AlignWeighted(ref, hyp, sim), ref.size());

    const BestPath best = ViterbiAlign(p, model.vocab.Ids(ref));
    scores.AddBoundary(BoundaryLoss(best.segmentation, u.segmentation, 1.0));

    const PeakinessStats s = ComputePeakiness(p);
    peak.blank_frame_fraction += s.blank_frame_fraction;
    peak.mean_nonblank_run_length += s.mean_nonblank_run_length;
    peak.mean_max_prob += s.mean_max_prob;
  }
  const double n = static_cast<double>(utterances.size());
  report.per = scores.per();
  report.wper = scores.wper();
  report.bl_frames = scores.boundary_ms();
  report.peakiness = {peak.blank_frame_fraction / n,
                      peak.mean_nonblank_run_length / n,
                      peak.mean_max_prob / n};
  report.utterances = scores.utterances;
  return report;
}

double AnchorAgreement(const LinearModel &model, const SyntheticDataset &data,
                       const std::vector<BitMatrix> &masks) {
  long anchored = 0;
  long agree = 0;
  for (std::size_t n = 0; n < data.utterances.size(); ++n) {
    const EmissionMatrix p = model.Emit(data.utterances[n].features);
    for (int t = 0; t < p.num_frames(); ++t) {
      int best = 0;
      for (int k = 1; k < p.vocab_size(); ++k)
        if (p(k, t) > p(best, t)) best = k;
      for (int k = 0; k < p.vocab_size(); ++k) {
        if (!masks[n](k, t)) continue;
        ++anchored;
        if (k == best) ++agree;
      }
    }
  }
  return anchored ? static_cast<double>(agree) / anchored : 1.0;
}

std::vector<TolSweepPoint> SweepTolerance(const SyntheticDataset &data,
                                          const SimilarityTable &sim,
                                          const std::vector<double> &tols,
                                          double cost_floor) {
  std::vector<TolSweepPoint> out;
  long total_frames = 0;
  for (const auto &u : data.utterances) total_frames += u.num_frames();
  for (double tol : tols) {
    long anchors = 0;
    long correct = 0;
    for (const auto &u : data.utterances) {
      const AlignmentMask m = AlignCostMatrix(u.cost, sim, {tol, cost_floor});
      for (int i = 0; i < m.num_labels(); ++i) {
        for (int j = 0; j < m.num_frames(); ++j) {
          if (!m.bits(i, j)) continue;
          ++anchors;
          if (u.frame_label[j] == i) ++correct;
        }
      }
    }
    TolSweepPoint point;
    point.tol = tol;
    point.constrained_ratio =
        total_frames ? static_cast<double>(anchors) / total_frames : 0.0;
    point.precision = anchors ? static_cast<double>(correct) / anchors : 1.0;
    out.push_back(point);
  }
  return out;
}

}  // namespace lcsctc
