// lcsctc/cost_matrix.h
//
// Frame-phoneme cost matrices: construction of supervision targets from a
// ground-truth segmentation, Gaussian edge attenuation, time-axis softmax
// normalization, and noisy synthesis standing in for a learned predictor.

#ifndef LCSCTC_COST_MATRIX_H_
#define LCSCTC_COST_MATRIX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcsctc/matrix.h"
#include "lcsctc/phoneme.h"

namespace lcsctc {

// Frames [onset, offset) of one phoneme.
struct Span {
  std::string phoneme;
  int onset = 0;
  int offset = 0;

  int length() const { return offset - onset; }
  friend bool operator==(const Span &, const Span &) = default;
};

// Ordered, non-overlapping spans. Frames not covered by any span are silence.
struct Segmentation {
  std::vector<Span> spans;

  // One past the last covered frame (0 when empty).
  int end_frame() const { return spans.empty() ? 0 : spans.back().offset; }
  std::vector<std::string> Labels() const;
  // Phoneme at every frame of [0, num_frames); empty string for silence.
  std::vector<std::string> FramePhonemes(int num_frames) const;

  friend bool operator==(const Segmentation &, const Segmentation &) = default;
};

// Throws DomainError unless spans satisfy onset < offset, are strictly
// increasing and non-overlapping, and start at frame >= 0.
void ValidateSegmentation(const Segmentation &seg);

// n phonemes x T frames, all values finite and >= 0.
struct CostMatrix {
  std::vector<std::string> labels;
  Matrix values;

  int num_labels() const { return values.rows(); }
  int num_frames() const { return values.cols(); }

  friend bool operator==(const CostMatrix &, const CostMatrix &) = default;
};

void ValidateCostMatrix(const CostMatrix &c);

// Two-case target: 0 where the label equals the frame's ground-truth phoneme,
// 1 - s(label, phoneme) elsewhere, 1 on silence frames.
CostMatrix BuildRawTargetCost(const Segmentation &seg,
                              std::span<const std::string> labels,
                              const SimilarityTable &sim, int num_frames);

// max(1, 10% of the span length).
double DefaultEdgeSigma(int span_length);

// Inside each span [a, b) of phoneme p, every row labelled p is pulled toward
// that row's mean cost by g(j) = exp(-d^2 / (2 sigma^2)) with
// d = min(j - a, b - 1 - j). The window is truncated at d >= 3 sigma, so
// interior frames are left exactly as they were. Single-frame spans are not
// touched. Without an explicit sigma each span uses DefaultEdgeSigma.
CostMatrix ApplyEdgeAttenuation(const CostMatrix &raw, const Segmentation &seg,
                                std::optional<double> edge_sigma = {});

// Row-wise softmax of the negated costs: low cost maps to high weight and
// every row sums to 1.
CostMatrix NormalizeTimeAxis(const CostMatrix &c);

struct TargetCostOptions {
  std::optional<double> edge_sigma;
  bool attenuate = true;
  // Off by default: the aligner thresholds raw costs.
  bool normalize = false;
};

CostMatrix BuildTargetCost(const Segmentation &seg,
                           std::span<const std::string> labels,
                           const SimilarityTable &sim, int num_frames,
                           const TargetCostOptions &options = {});

// Target cost plus uniform noise in [-noise_level, noise_level], floored at
// 0. Deterministic for a given seed.
CostMatrix SynthesizePredictedCost(const Segmentation &seg,
                                   std::span<const std::string> labels,
                                   const SimilarityTable &sim, int num_frames,
                                   double noise_level, std::uint64_t seed,
                                   const TargetCostOptions &options = {});

}  // namespace lcsctc

#endif  // LCSCTC_COST_MATRIX_H_
