// lcsctc/lcs_align.h
//
// Similarity-aware LCS alignment of phoneme labels to frames.
//
// A (phoneme i, frame j) pair is a valid match when its cost falls under a
// similarity-adjusted threshold relative to the best-scoring phoneme k of
// that frame:
//
//   C[i,j] <= (1 - s(p_i, p_k)) * tol          if p_i != p_k
//   C[i,j] <= cost_floor                       if p_i == p_k
//
// The aligner then selects a maximum-cardinality monotone matching over the
// valid pairs: frames strictly increasing, phoneme indices non-decreasing, a
// phoneme free to absorb any number of (not necessarily contiguous) frames.

#ifndef LCSCTC_LCS_ALIGN_H_
#define LCSCTC_LCS_ALIGN_H_

#include <span>
#include <string>
#include <vector>

#include "lcsctc/cost_matrix.h"
#include "lcsctc/matrix.h"
#include "lcsctc/phoneme.h"

namespace lcsctc {

struct MatchPair {
  int phoneme = 0;
  int frame = 0;
  friend auto operator<=>(const MatchPair &, const MatchPair &) = default;
};

// Set of (phoneme, frame) pairs on an n x T grid.
class ValidMatchSet {
 public:
  ValidMatchSet(int num_phonemes, int num_frames)
      : bits_(num_phonemes, num_frames, 0) {}

  int num_phonemes() const { return bits_.rows(); }
  int num_frames() const { return bits_.cols(); }

  // Throws DomainError for out-of-range indices.
  void Insert(int phoneme, int frame);
  bool Contains(int phoneme, int frame) const {
    return bits_(phoneme, frame) != 0;
  }
  int size() const;
  std::vector<MatchPair> Pairs() const;
  const BitMatrix &bits() const { return bits_; }

  friend bool operator==(const ValidMatchSet &,
                         const ValidMatchSet &) = default;

 private:
  BitMatrix bits_;
};

// Label-space mask M' (n x T) with at most one set bit per frame.
struct AlignmentMask {
  std::vector<std::string> labels;
  BitMatrix bits;

  int num_labels() const { return bits.rows(); }
  int num_frames() const { return bits.cols(); }
  int Cardinality() const;

  friend bool operator==(const AlignmentMask &,
                         const AlignmentMask &) = default;
};

struct LcsOptions {
  double tol = 1.0;
  double cost_floor = 0.05;
};

// Throws DomainError when tol <= 0 or a label is unknown to the table.
ValidMatchSet FindValidMatches(const CostMatrix &cost,
                               const SimilarityTable &sim,
                               const LcsOptions &options = {});

// Maximum-cardinality monotone matching. Traceback from the bottom-right
// corner prefers a match, then advancing to the previous phoneme, then
// skipping the frame. Returns an n x T bit grid.
BitMatrix LcsAlign(const ValidMatchSet &valid);
// Same cardinality, but among maximum matchings picks one of least total
// cost before applying the traceback preference.
BitMatrix LcsAlign(const ValidMatchSet &valid, const Matrix &cost);

// FindValidMatches followed by LcsAlign.
AlignmentMask AlignCostMatrix(const CostMatrix &cost,
                              const SimilarityTable &sim,
                              const LcsOptions &options = {});

// Re-indexes label rows onto vocabulary rows: V x T, blank row all zeros.
// Throws DomainError for labels outside the vocabulary.
BitMatrix ExpandMask(const AlignmentMask &mask, const Vocabulary &vocab);

}  // namespace lcsctc

#endif  // LCSCTC_LCS_ALIGN_H_
