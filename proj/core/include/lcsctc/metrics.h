// lcsctc/metrics.h
//
// Phoneme error rate, similarity-weighted phoneme error rate, boundary loss
// and emission peakiness statistics.

#ifndef LCSCTC_METRICS_H_
#define LCSCTC_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcsctc/cost_matrix.h"
#include "lcsctc/ctc.h"
#include "lcsctc/phoneme.h"

namespace lcsctc {

enum class EditOpType { kMatch, kSubstitution, kDeletion, kInsertion };

// ref_index / hyp_index are -1 for insertions / deletions respectively.
struct EditOp {
  EditOpType type = EditOpType::kMatch;
  int ref_index = -1;
  int hyp_index = -1;
  friend bool operator==(const EditOp &, const EditOp &) = default;
};

struct EditOps {
  std::vector<std::pair<std::string, std::string>> substitutions;  // (ref, hyp)
  int deletions = 0;
  int insertions = 0;
  int matches = 0;
  std::vector<EditOp> alignment;
  double cost = 0.0;  // total cost under the scheme that produced it
};

// Unit-cost Levenshtein alignment.
EditOps AlignUnit(std::span<const std::string> ref,
                  std::span<const std::string> hyp);

// Substitutions cost 1 - s(ref, hyp); insertions and deletions cost 1. The
// alignment is optimal under these weighted costs.
EditOps AlignWeighted(std::span<const std::string> ref,
                      std::span<const std::string> hyp,
                      const SimilarityTable &sim);

// Throw DomainError for an empty reference.
double Per(std::span<const std::string> ref, std::span<const std::string> hyp);
double Wper(std::span<const std::string> ref, std::span<const std::string> hyp,
            const SimilarityTable &sim);

struct BoundaryReport {
  // Mean of (|d onset| + |d offset|) / 2 over matched span pairs, in ms.
  // Empty when no pair matched.
  std::optional<double> mean_ms;
  double sum_ms = 0.0;  // sum of per-pair deviations, for corpus averaging
  int matched = 0;
  int unmatched_ref = 0;
  int unmatched_pred = 0;
};

// Spans are paired through a unit-cost alignment of their labels; only pairs
// with identical labels count. Throws DomainError when frame_ms <= 0 or both
// segmentations are empty.
BoundaryReport BoundaryLoss(const Segmentation &pred, const Segmentation &ref,
                            double frame_ms);

struct PeakinessStats {
  double blank_frame_fraction = 0.0;
  // Mean length of maximal runs of one non-blank argmax symbol; 0 if none.
  double mean_nonblank_run_length = 0.0;
  double mean_max_prob = 0.0;
};

PeakinessStats ComputePeakiness(const EmissionMatrix &p);

// Micro-averaged corpus accumulator.
struct CorpusScores {
  double unit_edits = 0.0;
  double weighted_edits = 0.0;
  std::size_t ref_phonemes = 0;
  double boundary_sum_ms = 0.0;
  int boundary_pairs = 0;
  int utterances = 0;

  void Add(const EditOps &unit, const EditOps &weighted, std::size_t ref_len);
  void AddBoundary(const BoundaryReport &r);
  double per() const;
  double wper() const;
  std::optional<double> boundary_ms() const;
};

}  // namespace lcsctc

#endif  // LCSCTC_METRICS_H_
