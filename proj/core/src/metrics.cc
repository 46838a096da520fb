// lcsctc/metrics.cc

#include "lcsctc/metrics.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lcsctc/errors.h"

namespace lcsctc {

namespace {

using SubCost = std::function<double(int ref_pos, int hyp_pos)>;

// Edit-distance DP with traceback preferring diagonal, then deletion, then
// insertion.
EditOps Align(std::span<const std::string> ref,
              std::span<const std::string> hyp, const SubCost &sub_cost) {
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  Matrix d(n + 1, m + 1, 0.0);
  for (int i = 1; i <= n; ++i) d(i, 0) = i;
  for (int j = 1; j <= m; ++j) d(0, j) = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      d(i, j) = std::min({d(i - 1, j - 1) + sub_cost(i - 1, j - 1),
                          d(i - 1, j) + 1.0, d(i, j - 1) + 1.0});
    }
  }

  EditOps ops;
  ops.cost = d(n, m);
  int i = n;
  int j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + sub_cost(i - 1, j - 1)) {
      if (ref[i - 1] == hyp[j - 1]) {
        ops.alignment.push_back({EditOpType::kMatch, i - 1, j - 1});
        ++ops.matches;
      } else {
        ops.alignment.push_back({EditOpType::kSubstitution, i - 1, j - 1});
        ops.substitutions.emplace_back(ref[i - 1], hyp[j - 1]);
      }
      --i;
      --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1.0) {
      ops.alignment.push_back({EditOpType::kDeletion, i - 1, -1});
      ++ops.deletions;
      --i;
    } else {
      ops.alignment.push_back({EditOpType::kInsertion, -1, j - 1});
      ++ops.insertions;
      --j;
    }
  }
  std::reverse(ops.alignment.begin(), ops.alignment.end());
  std::reverse(ops.substitutions.begin(), ops.substitutions.end());
  return ops;
}

void RequireReference(std::span<const std::string> ref) {
  if (ref.empty()) throw DomainError("reference sequence is empty");
}

}  // namespace

EditOps AlignUnit(std::span<const std::string> ref,
                  std::span<const std::string> hyp) {
  return Align(ref, hyp, [&](int i, int j) {
    return ref[i] == hyp[j] ? 0.0 : 1.0;
  });
}

EditOps AlignWeighted(std::span<const std::string> ref,
                      std::span<const std::string> hyp,
                      const SimilarityTable &sim) {
  std::vector<int> ref_idx, hyp_idx;
  for (const auto &p : ref) ref_idx.push_back(sim.Index(p));
  for (const auto &p : hyp) hyp_idx.push_back(sim.Index(p));
  return Align(ref, hyp, [&](int i, int j) {
    return ref_idx[i] == hyp_idx[j] ? 0.0 : 1.0 - sim(ref_idx[i], hyp_idx[j]);
  });
}

double Per(std::span<const std::string> ref, std::span<const std::string> hyp) {
  RequireReference(ref);
  return AlignUnit(ref, hyp).cost / static_cast<double>(ref.size());
}

double Wper(std::span<const std::string> ref, std::span<const std::string> hyp,
            const SimilarityTable &sim) {
  RequireReference(ref);
  return AlignWeighted(ref, hyp, sim).cost / static_cast<double>(ref.size());
}

BoundaryReport BoundaryLoss(const Segmentation &pred, const Segmentation &ref,
                            double frame_ms) {
  if (!(frame_ms > 0.0)) throw DomainError("frame duration must be positive");
  if (pred.spans.empty() && ref.spans.empty())
    throw DomainError("both segmentations are empty");

  const auto ref_labels = ref.Labels();
  const auto pred_labels = pred.Labels();
  const EditOps ops = AlignUnit(ref_labels, pred_labels);

  BoundaryReport report;
  for (const EditOp &op : ops.alignment) {
    if (op.type != EditOpType::kMatch) continue;
    const Span &r = ref.spans[op.ref_index];
    const Span &p = pred.spans[op.hyp_index];
    report.sum_ms += 0.5 * frame_ms *
                     (std::abs(p.onset - r.onset) + std::abs(p.offset - r.offset));
    ++report.matched;
  }
  report.unmatched_ref = static_cast<int>(ref.spans.size()) - report.matched;
  report.unmatched_pred = static_cast<int>(pred.spans.size()) - report.matched;
  if (report.matched > 0) report.mean_ms = report.sum_ms / report.matched;
  return report;
}

PeakinessStats ComputePeakiness(const EmissionMatrix &p) {
  PeakinessStats stats;
  const int num_frames = p.num_frames();
  const int blank = p.vocab().blank_id();
  int blank_frames = 0;
  int runs = 0;
  int run_frames = 0;
  int prev = -1;
  for (int t = 0; t < num_frames; ++t) {
    int best = 0;
    for (int k = 1; k < p.vocab_size(); ++k)
      if (p(k, t) > p(best, t)) best = k;
    stats.mean_max_prob += p(best, t);
    if (best == blank) {
      ++blank_frames;
    } else {
      ++run_frames;
      if (best != prev) ++runs;
    }
    prev = best;
  }
  stats.blank_frame_fraction = static_cast<double>(blank_frames) / num_frames;
  stats.mean_max_prob /= num_frames;
  stats.mean_nonblank_run_length =
      runs > 0 ? static_cast<double>(run_frames) / runs : 0.0;
  return stats;
}

void CorpusScores::Add(const EditOps &unit, const EditOps &weighted,
                       std::size_t ref_len) {
  unit_edits += unit.cost;
  weighted_edits += weighted.cost;
  ref_phonemes += ref_len;
  ++utterances;
}

void CorpusScores::AddBoundary(const BoundaryReport &r) {
  boundary_sum_ms += r.sum_ms;
  boundary_pairs += r.matched;
}

double CorpusScores::per() const {
  return ref_phonemes ? unit_edits / static_cast<double>(ref_phonemes) : 0.0;
}

double CorpusScores::wper() const {
  return ref_phonemes ? weighted_edits / static_cast<double>(ref_phonemes)
                      : 0.0;
}

std::optional<double> CorpusScores::boundary_ms() const {
  if (boundary_pairs == 0) return std::nullopt;
  return boundary_sum_ms / boundary_pairs;
}

}  // namespace lcsctc
