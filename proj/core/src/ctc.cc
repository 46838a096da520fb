// lcsctc/ctc.cc

#include "lcsctc/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcsctc/errors.h"

namespace lcsctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double SafeLog(double p) { return std::log(std::max(p, kProbabilityFloor)); }

void CheckTarget(std::span<const int> target, int vocab_size, int blank_id) {
  if (target.empty()) throw DomainError("CTC target is empty");
  for (int id : target) {
    if (id < 0 || id >= vocab_size)
      throw DomainError("target id " + std::to_string(id) +
                        " is outside the vocabulary");
    if (id == blank_id)
      throw DomainError("the blank cannot appear in a CTC target");
  }
}

void CheckMaskShape(const EmissionMatrix &p, const BitMatrix &mask) {
  if (mask.rows() != p.vocab_size() || mask.cols() != p.num_frames())
    throw DomainError("mask shape " + std::to_string(mask.rows()) + "x" +
                      std::to_string(mask.cols()) +
                      " does not match emissions " +
                      std::to_string(p.vocab_size()) + "x" +
                      std::to_string(p.num_frames()));
}

bool ColumnConstrained(const BitMatrix &mask, int t) {
  for (int k = 0; k < mask.rows(); ++k)
    if (mask(k, t)) return true;
  return false;
}

// Extended label sequence: blank, y1, blank, y2, ..., yL, blank.
std::vector<int> ExtendTarget(std::span<const int> target, int blank_id) {
  std::vector<int> ext(2 * target.size() + 1, blank_id);
  for (std::size_t u = 0; u < target.size(); ++u) ext[2 * u + 1] = target[u];
  return ext;
}

bool CanSkip(const std::vector<int> &ext, int s, int blank_id) {
  return s >= 2 && ext[s] != blank_id && ext[s] != ext[s - 2];
}

void CheckHybridOptions(const HybridOptions &o) {
  if (!(o.lambda >= 0.0 && o.lambda <= 1.0))
    throw DomainError("lambda must lie in [0, 1]");
  if (!(o.epsilon > 0.0)) throw DomainError("epsilon must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// EmissionMatrix

EmissionMatrix EmissionMatrix::FromProbabilities(Vocabulary vocab,
                                                 Matrix probs) {
  if (probs.rows() != vocab.size())
    throw DomainError("emission matrix has " + std::to_string(probs.rows()) +
                      " rows but the vocabulary has " +
                      std::to_string(vocab.size()) + " entries");
  if (probs.cols() < 1) throw DomainError("emission matrix has no frames");
  for (int t = 0; t < probs.cols(); ++t) {
    double sum = 0.0;
    for (int k = 0; k < probs.rows(); ++k) {
      const double v = probs(k, t);
      if (!std::isfinite(v) || v < 0.0)
        throw DomainError("emission probabilities must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kColumnSumTolerance)
      throw DomainError("emission column " + std::to_string(t) +
                        " sums to " + std::to_string(sum) + ", not 1");
  }
  for (double &v : probs.data()) v = std::max(v, kProbabilityFloor);
  return EmissionMatrix(std::move(vocab), std::move(probs));
}

EmissionMatrix EmissionMatrix::FromLogits(Vocabulary vocab,
                                          const Matrix &logits) {
  if (logits.rows() != vocab.size())
    throw DomainError("logit matrix does not match the vocabulary size");
  if (logits.cols() < 1) throw DomainError("emission matrix has no frames");
  Matrix probs(logits.rows(), logits.cols());
  for (int t = 0; t < logits.cols(); ++t) {
    double max_logit = kNegInf;
    for (int k = 0; k < logits.rows(); ++k)
      max_logit = std::max(max_logit, logits(k, t));
    if (!std::isfinite(max_logit)) throw DomainError("non-finite logits");
    double sum = 0.0;
    for (int k = 0; k < logits.rows(); ++k) {
      probs(k, t) = std::exp(logits(k, t) - max_logit);
      sum += probs(k, t);
    }
    for (int k = 0; k < logits.rows(); ++k)
      probs(k, t) = std::max(probs(k, t) / sum, kProbabilityFloor);
  }
  return EmissionMatrix(std::move(vocab), std::move(probs));
}

Matrix EmissionMatrix::LogProbs() const {
  Matrix out(probs_.rows(), probs_.cols());
  for (std::size_t i = 0; i < probs_.data().size(); ++i)
    out.data()[i] = SafeLog(probs_.data()[i]);
  return out;
}

// ---------------------------------------------------------------------------
// CTC

int MinimumFrames(std::span<const int> target) {
  int frames = static_cast<int>(target.size());
  for (std::size_t u = 1; u < target.size(); ++u)
    if (target[u] == target[u - 1]) ++frames;
  return frames;
}

CtcPosteriors CtcForwardBackward(const Matrix &log_probs,
                                 std::span<const int> target, int blank_id) {
  const int vocab_size = log_probs.rows();
  const int num_frames = log_probs.cols();
  CheckTarget(target, vocab_size, blank_id);
  if (const int need = MinimumFrames(target); num_frames < need)
    throw InfeasibleError(need, num_frames);

  const std::vector<int> ext = ExtendTarget(target, blank_id);
  const int num_states = static_cast<int>(ext.size());

  // Frame-major copies keep the inner loops over states contiguous.
  Matrix lp(num_frames, num_states);
  for (int t = 0; t < num_frames; ++t)
    for (int s = 0; s < num_states; ++s) lp(t, s) = log_probs(ext[s], t);

  Matrix alpha(num_frames, num_states, kNegInf);
  alpha(0, 0) = lp(0, 0);
  alpha(0, 1) = lp(0, 1);
  for (int t = 1; t < num_frames; ++t) {
    // States that cannot still reach the end are left at -inf implicitly by
    // the final sum; the recursion itself runs over all states.
    for (int s = 0; s < num_states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (CanSkip(ext, s, blank_id)) a = LogAdd(a, alpha(t - 1, s - 2));
      if (a != kNegInf) alpha(t, s) = a + lp(t, s);
    }
  }

  Matrix beta(num_frames, num_states, kNegInf);
  const int last = num_frames - 1;
  beta(last, num_states - 1) = lp(last, num_states - 1);
  beta(last, num_states - 2) = lp(last, num_states - 2);
  for (int t = last - 1; t >= 0; --t) {
    for (int s = 0; s < num_states; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < num_states) b = LogAdd(b, beta(t + 1, s + 1));
      if (s + 2 < num_states && CanSkip(ext, s + 2, blank_id))
        b = LogAdd(b, beta(t + 1, s + 2));
      if (b != kNegInf) beta(t, s) = b + lp(t, s);
    }
  }

  const double log_likelihood =
      LogAdd(alpha(last, num_states - 1), alpha(last, num_states - 2));
  if (!std::isfinite(log_likelihood))
    throw InfeasibleError(MinimumFrames(target), num_frames);

  CtcPosteriors out{-log_likelihood, Matrix(vocab_size, num_frames, 0.0)};
  for (int t = 0; t < num_frames; ++t) {
    for (int s = 0; s < num_states; ++s) {
      const double lg = alpha(t, s) + beta(t, s) - lp(t, s) - log_likelihood;
      if (lg != kNegInf) out.occupancy(ext[s], t) += std::exp(lg);
    }
  }
  return out;
}

LossAndGradient CtcLoss(const EmissionMatrix &p, std::span<const int> target) {
  CtcPosteriors post =
      CtcForwardBackward(p.LogProbs(), target, p.vocab().blank_id());
  LossAndGradient out{post.loss, Matrix(p.vocab_size(), p.num_frames())};
  for (int k = 0; k < p.vocab_size(); ++k)
    for (int t = 0; t < p.num_frames(); ++t)
      out.grad(k, t) = p(k, t) - post.occupancy(k, t);
  return out;
}

// ---------------------------------------------------------------------------
// Masking and anchored cross-entropy

EmissionMatrix MaskEmissions(const EmissionMatrix &p, const BitMatrix &mask,
                             double epsilon) {
  CheckMaskShape(p, mask);
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");

  const int vocab_size = p.vocab_size();
  Matrix out = p.probs();
  bool any = false;
  for (int t = 0; t < p.num_frames(); ++t) {
    if (!ColumnConstrained(mask, t)) continue;
    any = true;
    double anchored = 0.0;
    for (int k = 0; k < vocab_size; ++k)
      if (mask(k, t)) anchored += p(k, t);
    // Dividing by S + V eps keeps the column summing to one.
    const double denom = anchored + vocab_size * epsilon;
    for (int k = 0; k < vocab_size; ++k)
      out(k, t) = ((mask(k, t) ? p(k, t) : 0.0) + epsilon) / denom;
  }
  if (!any) return p;
  return EmissionMatrix::FromProbabilities(p.vocab(), std::move(out));
}

LossAndGradient CeAnchored(const EmissionMatrix &p, const BitMatrix &mask) {
  CheckMaskShape(p, mask);
  LossAndGradient out{0.0, Matrix(p.vocab_size(), p.num_frames(), 0.0)};
  int anchored_frames = 0;
  for (int t = 0; t < p.num_frames(); ++t)
    if (ColumnConstrained(mask, t)) ++anchored_frames;
  if (anchored_frames == 0) return out;

  const double scale = 1.0 / anchored_frames;
  for (int t = 0; t < p.num_frames(); ++t) {
    if (!ColumnConstrained(mask, t)) continue;
    double mass = 0.0;
    for (int k = 0; k < p.vocab_size(); ++k)
      if (mask(k, t)) mass += p(k, t);
    out.loss -= SafeLog(mass);
    for (int k = 0; k < p.vocab_size(); ++k) {
      const double g = p(k, t) - (mask(k, t) ? p(k, t) / mass : 0.0);
      out.grad(k, t) = scale * g;
    }
  }
  out.loss *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Hybrid objectives

namespace {

HybridResult Hybrid(const EmissionMatrix &p, const BitMatrix &ce_mask,
                    const BitMatrix *ctc_mask, std::span<const int> target,
                    const HybridOptions &options) {
  CheckHybridOptions(options);
  CheckMaskShape(p, ce_mask);

  LossAndGradient ce = CeAnchored(p, ce_mask);
  const EmissionMatrix masked =
      ctc_mask ? MaskEmissions(p, *ctc_mask, options.epsilon) : p;
  CtcPosteriors post =
      CtcForwardBackward(masked.LogProbs(), target, p.vocab().blank_id());

  const int vocab_size = p.vocab_size();
  const int num_frames = p.num_frames();
  const double scale = options.reduction == CtcReduction::kMeanByTargetLength
                           ? 1.0 / static_cast<double>(target.size())
                           : 1.0;

  Matrix ctc_grad(vocab_size, num_frames);
  std::vector<double> dl_dp(vocab_size);
  for (int t = 0; t < num_frames; ++t) {
    if (!ctc_mask || !ColumnConstrained(*ctc_mask, t)) {
      for (int k = 0; k < vocab_size; ++k)
        ctc_grad(k, t) = masked(k, t) - post.occupancy(k, t);
    } else {
      // dL/dP_m = M_m (1 - gamma_m / Pm~) / D with D = S + V eps, using
      // sum_m gamma_m = 1; then back through the column softmax.
      double anchored = 0.0;
      for (int k = 0; k < vocab_size; ++k)
        if ((*ctc_mask)(k, t)) anchored += p(k, t);
      const double denom = anchored + vocab_size * options.epsilon;
      double weighted = 0.0;
      for (int k = 0; k < vocab_size; ++k) {
        dl_dp[k] = (*ctc_mask)(k, t)
                       ? (1.0 - post.occupancy(k, t) / masked(k, t)) / denom
                       : 0.0;
        weighted += p(k, t) * dl_dp[k];
      }
      for (int k = 0; k < vocab_size; ++k)
        ctc_grad(k, t) = p(k, t) * (dl_dp[k] - weighted);
    }
  }
  if (scale != 1.0)
    for (double &g : ctc_grad.data()) g *= scale;

  HybridResult out;
  out.breakdown.ctc_loss = post.loss * scale;
  out.breakdown.ce_loss = ce.loss;
  out.breakdown.lambda = options.lambda;
  out.breakdown.total = options.lambda * out.breakdown.ce_loss +
                        (1.0 - options.lambda) * out.breakdown.ctc_loss;
  for (int t = 0; t < num_frames; ++t)
    if (ColumnConstrained(ce_mask, t)) ++out.breakdown.num_anchored_frames;

  out.grad = Matrix(vocab_size, num_frames);
  for (std::size_t i = 0; i < out.grad.data().size(); ++i)
    out.grad.data()[i] = options.lambda * ce.grad.data()[i] +
                         (1.0 - options.lambda) * ctc_grad.data()[i];
  return out;
}

}  // namespace

HybridResult LcsCtcLoss(const EmissionMatrix &p, const BitMatrix &mask,
                        std::span<const int> target,
                        const HybridOptions &options) {
  CheckMaskShape(p, mask);
  return Hybrid(p, mask, &mask, target, options);
}

HybridResult CeCtcLoss(const EmissionMatrix &p, const BitMatrix &frame_labels,
                       std::span<const int> target,
                       const HybridOptions &options) {
  return Hybrid(p, frame_labels, nullptr, target, options);
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

// Scores this close are treated as tied; summation order alone can separate
// paths whose log-probabilities are equal.
bool Beats(double candidate, double incumbent) {
  if (incumbent == kNegInf) return candidate > incumbent;
  return candidate - incumbent >
         kViterbiTieTolerance *
             std::max({1.0, std::abs(candidate), std::abs(incumbent)});
}

}  // namespace

BestPath ViterbiAlign(const EmissionMatrix &p, std::span<const int> target) {
  const int blank = p.vocab().blank_id();
  CheckTarget(target, p.vocab_size(), blank);
  const int num_frames = p.num_frames();
  if (const int need = MinimumFrames(target); num_frames < need)
    throw InfeasibleError(need, num_frames);

  const Matrix lp = p.LogProbs();
  const std::vector<int> ext = ExtendTarget(target, blank);
  const int num_states = static_cast<int>(ext.size());

  Matrix score(num_frames, num_states, kNegInf);
  Grid<int> from(num_frames, num_states, -1);
  score(0, 0) = lp(ext[0], 0);
  score(0, 1) = lp(ext[1], 0);
  for (int t = 1; t < num_frames; ++t) {
    for (int s = 0; s < num_states; ++s) {
      // Candidates in preference order: stay, previous, skip. Staying keeps
      // earlier labels emitted earlier.
      double best = score(t - 1, s);
      int arg = s;
      if (s >= 1 && Beats(score(t - 1, s - 1), best)) {
        best = score(t - 1, s - 1);
        arg = s - 1;
      }
      if (CanSkip(ext, s, blank) && Beats(score(t - 1, s - 2), best)) {
        best = score(t - 1, s - 2);
        arg = s - 2;
      }
      if (best == kNegInf) continue;
      score(t, s) = best + lp(ext[s], t);
      from(t, s) = arg;
    }
  }

  const int last = num_frames - 1;
  int state = num_states - 1;
  if (Beats(score(last, num_states - 2), score(last, state)))
    state = num_states - 2;

  BestPath out;
  out.log_prob = score(last, state);
  std::vector<int> states(num_frames);
  for (int t = last; t >= 0; --t) {
    states[t] = state;
    if (t > 0) state = from(t, state);
  }
  out.frame_ids.reserve(num_frames);
  for (int s : states) out.frame_ids.push_back(ext[s]);

  for (int t = 0; t < num_frames;) {
    const int s = states[t];
    int end = t + 1;
    while (end < num_frames && states[end] == s) ++end;
    if (ext[s] != blank)
      out.segmentation.spans.push_back({p.vocab().symbol(ext[s]), t, end});
    t = end;
  }
  return out;
}

std::vector<int> GreedyDecode(const EmissionMatrix &p) {
  std::vector<int> out;
  int prev = -1;
  for (int t = 0; t < p.num_frames(); ++t) {
    int best = 0;
    for (int k = 1; k < p.vocab_size(); ++k)
      if (p(k, t) > p(best, t)) best = k;
    if (best != prev && best != p.vocab().blank_id()) out.push_back(best);
    prev = best;
  }
  return out;
}

std::vector<std::string> GreedyDecodeSymbols(const EmissionMatrix &p) {
  std::vector<std::string> out;
  for (int id : GreedyDecode(p)) out.push_back(p.vocab().symbol(id));
  return out;
}

}  // namespace lcsctc
