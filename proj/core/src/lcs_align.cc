// lcsctc/lcs_align.cc

#include "lcsctc/lcs_align.h"

#include <algorithm>

#include "lcsctc/errors.h"

namespace lcsctc {

void ValidMatchSet::Insert(int phoneme, int frame) {
  if (phoneme < 0 || phoneme >= num_phonemes() || frame < 0 ||
      frame >= num_frames())
    throw DomainError("match (" + std::to_string(phoneme) + ", " +
                      std::to_string(frame) + ") is outside the " +
                      std::to_string(num_phonemes()) + "x" +
                      std::to_string(num_frames()) + " grid");
  bits_(phoneme, frame) = 1;
}

int ValidMatchSet::size() const {
  return static_cast<int>(
      std::count(bits_.data().begin(), bits_.data().end(), 1));
}

std::vector<MatchPair> ValidMatchSet::Pairs() const {
  std::vector<MatchPair> pairs;
  for (int i = 0; i < num_phonemes(); ++i)
    for (int j = 0; j < num_frames(); ++j)
      if (Contains(i, j)) pairs.push_back({i, j});
  return pairs;
}

int AlignmentMask::Cardinality() const {
  return static_cast<int>(std::count(bits.data().begin(), bits.data().end(), 1));
}

ValidMatchSet FindValidMatches(const CostMatrix &cost,
                               const SimilarityTable &sim,
                               const LcsOptions &options) {
  if (!(options.tol > 0.0)) throw DomainError("tol must be positive");
  ValidateCostMatrix(cost);

  const int n = cost.num_labels();
  const int num_frames = cost.num_frames();
  std::vector<int> idx;
  idx.reserve(n);
  for (const auto &l : cost.labels) idx.push_back(sim.Index(l));

  ValidMatchSet valid(n, num_frames);
  for (int j = 0; j < num_frames; ++j) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (cost.values(i, j) < cost.values(best, j)) best = i;
    for (int i = 0; i < n; ++i) {
      const double c = cost.values(i, j);
      const bool same = idx[i] == idx[best];
      const double threshold =
          same ? options.cost_floor : (1.0 - sim(idx[i], idx[best])) * options.tol;
      if (c <= threshold) valid.Insert(i, j);
    }
  }
  return valid;
}

BitMatrix LcsAlign(const ValidMatchSet &valid) {
  const int n = valid.num_phonemes();
  const int m = valid.num_frames();
  // dp(i, j): best matching using phonemes [0, i) and frames [0, j).
  Grid<int> dp(n + 1, m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      // A match keeps us on row i so the phoneme can absorb later frames.
      const int take = dp(i, j - 1) + (valid.Contains(i - 1, j - 1) ? 1 : 0);
      dp(i, j) = std::max(dp(i - 1, j), take);
    }
  }

  BitMatrix bits(n, m, 0);
  int i = n;
  int j = m;
  while (i > 0 && j > 0) {
    if (valid.Contains(i - 1, j - 1) && dp(i, j) == dp(i, j - 1) + 1) {
      bits(i - 1, j - 1) = 1;
      --j;
    } else if (dp(i, j) == dp(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  return bits;
}

BitMatrix LcsAlign(const ValidMatchSet &valid, const Matrix &cost) {
  const int n = valid.num_phonemes();
  const int m = valid.num_frames();
  if (cost.rows() != n || cost.cols() != m)
    throw DomainError("cost shape does not match the valid-match grid");

  struct Cell {
    int count = 0;
    double cost = 0.0;
    bool operator==(const Cell &) const = default;
  };
  auto better = [](const Cell &a, const Cell &b) {
    return a.count > b.count || (a.count == b.count && a.cost < b.cost);
  };
  auto match = [&](const Grid<Cell> &dp, int i, int j) {
    Cell c = dp(i, j - 1);
    ++c.count;
    c.cost += cost(i - 1, j - 1);
    return c;
  };

  Grid<Cell> dp(n + 1, m + 1, Cell{});
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      Cell best = dp(i, j - 1);
      if (better(dp(i - 1, j), best)) best = dp(i - 1, j);
      if (valid.Contains(i - 1, j - 1)) {
        const Cell take = match(dp, i, j);
        if (better(take, best)) best = take;
      }
      dp(i, j) = best;
    }
  }

  BitMatrix bits(n, m, 0);
  int i = n;
  int j = m;
  while (i > 0 && j > 0) {
    if (valid.Contains(i - 1, j - 1) && dp(i, j) == match(dp, i, j)) {
      bits(i - 1, j - 1) = 1;
      --j;
    } else if (dp(i, j) == dp(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  return bits;
}

AlignmentMask AlignCostMatrix(const CostMatrix &cost,
                              const SimilarityTable &sim,
                              const LcsOptions &options) {
  return AlignmentMask{
      cost.labels, LcsAlign(FindValidMatches(cost, sim, options), cost.values)};
}

BitMatrix ExpandMask(const AlignmentMask &mask, const Vocabulary &vocab) {
  if (static_cast<int>(mask.labels.size()) != mask.num_labels())
    throw DomainError("mask label count does not match its row count");
  std::vector<int> ids = vocab.Ids(mask.labels);
  BitMatrix out(vocab.size(), mask.num_frames(), 0);
  for (int i = 0; i < mask.num_labels(); ++i) {
    if (ids[i] == vocab.blank_id())
      throw DomainError("the blank cannot be an alignment label");
    for (int j = 0; j < mask.num_frames(); ++j)
      if (mask.bits(i, j)) out(ids[i], j) = 1;
  }
  return out;
}

}  // namespace lcsctc
