// lcsctc/ctc.h
//
// CTC loss with analytic gradients, masked emissions, anchored
// cross-entropy, the hybrid LCS-CTC objective and CTC decoding.
//
// All gradients are taken with respect to the per-frame log-probabilities
// treated as logits, i.e. the loss is viewed as a function of z with
// P[:, t] = softmax(z[:, t]). A trainer can feed these gradients straight
// into its output layer.

#ifndef LCSCTC_CTC_H_
#define LCSCTC_CTC_H_

#include <span>
#include <string>
#include <vector>

#include "lcsctc/cost_matrix.h"
#include "lcsctc/matrix.h"
#include "lcsctc/phoneme.h"

namespace lcsctc {

// Probabilities are clamped to at least this value before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;
// Tolerance on column sums accepted by EmissionMatrix::FromProbabilities.
inline constexpr double kColumnSumTolerance = 1e-9;

// V x T frame posteriors over a vocabulary that includes the blank.
class EmissionMatrix {
 public:
  // Validates that every column sums to 1 within kColumnSumTolerance, then
  // clamps entries to kProbabilityFloor.
  static EmissionMatrix FromProbabilities(Vocabulary vocab, Matrix probs);
  // Column-wise softmax of unnormalized log-probabilities.
  static EmissionMatrix FromLogits(Vocabulary vocab, const Matrix &logits);

  const Vocabulary &vocab() const { return vocab_; }
  const Matrix &probs() const { return probs_; }
  int vocab_size() const { return probs_.rows(); }
  int num_frames() const { return probs_.cols(); }
  double operator()(int k, int t) const { return probs_(k, t); }

  Matrix LogProbs() const;

  friend bool operator==(const EmissionMatrix &,
                         const EmissionMatrix &) = default;

 private:
  EmissionMatrix(Vocabulary vocab, Matrix probs)
      : vocab_(std::move(vocab)), probs_(std::move(probs)) {}

  Vocabulary vocab_;
  Matrix probs_;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix grad;  // V x T, d loss / d logits
};

// Frames needed to emit `target`: its length plus one blank between each
// pair of equal neighbours.
int MinimumFrames(std::span<const int> target);

// -log sum over all alignments collapsing to `target` (vocabulary ids).
// Throws DomainError for an empty target or ids out of range (including the
// blank), InfeasibleError when the target does not fit.
LossAndGradient CtcLoss(const EmissionMatrix &p, std::span<const int> target);

// Per-frame occupancy posteriors gamma (V x T) alongside the loss. Column t
// sums to 1.
struct CtcPosteriors {
  double loss = 0.0;
  Matrix occupancy;
};
CtcPosteriors CtcForwardBackward(const Matrix &log_probs,
                                 std::span<const int> target, int blank_id);

// Constrained columns (any mask bit set) become
//   (P[i,j] * M[i,j] + eps) / (sum_l P[l,j] * M[l,j] + eps)
// and are then renormalized to sum to exactly 1, which reduces to
// (P*M + eps) / (sum P*M + V*eps). Unconstrained columns are copied as is.
// Throws DomainError on a shape mismatch or eps <= 0.
EmissionMatrix MaskEmissions(const EmissionMatrix &p, const BitMatrix &mask,
                             double epsilon);

// Mean over constrained frames of -log sum_{c anchored at j} P[c, j].
// Returns zero loss and gradient when nothing is anchored.
LossAndGradient CeAnchored(const EmissionMatrix &p, const BitMatrix &mask);

enum class CtcReduction {
  kSum,                   // plain -log likelihood
  kMeanByTargetLength,    // divided by |Y|
};

struct HybridOptions {
  double lambda = 0.5;
  double epsilon = 1e-8;
  CtcReduction reduction = CtcReduction::kSum;
};

struct LossBreakdown {
  double ctc_loss = 0.0;
  double ce_loss = 0.0;
  double total = 0.0;
  double lambda = 0.5;
  int num_anchored_frames = 0;
};

struct HybridResult {
  LossBreakdown breakdown;
  Matrix grad;
};

// lambda * CE(P, M) + (1 - lambda) * CTC(MaskEmissions(P, M, eps), Y), with
// the CTC gradient carried back through the mask transform.
HybridResult LcsCtcLoss(const EmissionMatrix &p, const BitMatrix &mask,
                        std::span<const int> target,
                        const HybridOptions &options = {});

// Baseline: lambda * CE on every labelled frame of `frame_labels` plus
// (1 - lambda) * vanilla CTC on the unmasked emissions.
HybridResult CeCtcLoss(const EmissionMatrix &p, const BitMatrix &frame_labels,
                       std::span<const int> target,
                       const HybridOptions &options = {});

struct BestPath {
  std::vector<int> frame_ids;  // vocabulary id emitted at each frame
  double log_prob = 0.0;
  Segmentation segmentation;   // one span per target position, blanks as gaps
};

// Relative gap below which two Viterbi path scores count as tied.
inline constexpr double kViterbiTieTolerance = 1e-12;

// Single most probable alignment collapsing to `target`. Ties prefer the
// path that emits labels earlier.
BestPath ViterbiAlign(const EmissionMatrix &p, std::span<const int> target);

// Frame-wise argmax (ties to the lowest id), repeats merged, blanks dropped.
std::vector<int> GreedyDecode(const EmissionMatrix &p);
std::vector<std::string> GreedyDecodeSymbols(const EmissionMatrix &p);

}  // namespace lcsctc

#endif  // LCSCTC_CTC_H_
