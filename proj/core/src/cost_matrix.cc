// lcsctc/cost_matrix.cc

#include "lcsctc/cost_matrix.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "lcsctc/errors.h"

namespace lcsctc {

std::vector<std::string> Segmentation::Labels() const {
  std::vector<std::string> labels;
  labels.reserve(spans.size());
  for (const auto &s : spans) labels.push_back(s.phoneme);
  return labels;
}

std::vector<std::string> Segmentation::FramePhonemes(int num_frames) const {
  std::vector<std::string> out(num_frames);
  for (const auto &s : spans)
    for (int j = std::max(0, s.onset); j < std::min(s.offset, num_frames); ++j)
      out[j] = s.phoneme;
  return out;
}

void ValidateSegmentation(const Segmentation &seg) {
  int prev_offset = 0;
  for (std::size_t k = 0; k < seg.spans.size(); ++k) {
    const Span &s = seg.spans[k];
    if (s.onset < 0)
      throw DomainError("span " + std::to_string(k) + " starts before frame 0");
    if (s.onset >= s.offset)
      throw DomainError("span " + std::to_string(k) + " (" + s.phoneme +
                        ") has onset >= offset");
    if (s.onset < prev_offset)
      throw DomainError("span " + std::to_string(k) + " (" + s.phoneme +
                        ") overlaps the previous span");
    prev_offset = s.offset;
  }
}

void ValidateCostMatrix(const CostMatrix &c) {
  if (c.num_labels() < 1 || c.num_frames() < 1)
    throw DomainError("cost matrix needs at least one row and one frame");
  if (static_cast<int>(c.labels.size()) != c.num_labels())
    throw DomainError("cost matrix has " + std::to_string(c.num_labels()) +
                      " rows but " + std::to_string(c.labels.size()) +
                      " labels");
  for (double v : c.values.data())
    if (!std::isfinite(v) || v < 0.0)
      throw DomainError("cost matrix values must be finite and non-negative");
}

CostMatrix BuildRawTargetCost(const Segmentation &seg,
                              std::span<const std::string> labels,
                              const SimilarityTable &sim, int num_frames) {
  if (labels.empty()) throw DomainError("label sequence is empty");
  if (num_frames < 1) throw DomainError("number of frames must be positive");
  ValidateSegmentation(seg);
  if (seg.end_frame() > num_frames)
    throw DomainError("segmentation covers " +
                      std::to_string(seg.end_frame()) + " frames but only " +
                      std::to_string(num_frames) + " were requested");

  std::vector<int> label_idx;
  label_idx.reserve(labels.size());
  for (const auto &l : labels) label_idx.push_back(sim.Index(l));

  // -1 marks silence.
  std::vector<int> frame_idx(num_frames, -1);
  for (const auto &s : seg.spans) {
    const int p = sim.Index(s.phoneme);
    for (int j = s.onset; j < s.offset; ++j) frame_idx[j] = p;
  }

  const int n = static_cast<int>(labels.size());
  CostMatrix c{std::vector<std::string>(labels.begin(), labels.end()),
               Matrix(n, num_frames, 1.0)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < num_frames; ++j) {
      const int q = frame_idx[j];
      if (q < 0) continue;
      c.values(i, j) = (label_idx[i] == q) ? 0.0 : 1.0 - sim(label_idx[i], q);
    }
  }
  return c;
}

double DefaultEdgeSigma(int span_length) {
  return std::max(1.0, 0.1 * span_length);
}

CostMatrix ApplyEdgeAttenuation(const CostMatrix &raw, const Segmentation &seg,
                                std::optional<double> edge_sigma) {
  if (edge_sigma && !(*edge_sigma > 0.0))
    throw DomainError("edge sigma must be positive");
  ValidateSegmentation(seg);
  if (seg.end_frame() > raw.num_frames())
    throw DomainError("segmentation extends past the cost matrix");

  const int n = raw.num_labels();
  const int num_frames = raw.num_frames();
  std::vector<double> row_mean(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (double v : raw.values.row(i)) row_mean[i] += v;
    row_mean[i] /= num_frames;
  }

  CostMatrix out = raw;
  for (const auto &s : seg.spans) {
    if (s.length() < 2) continue;
    const double sigma = edge_sigma ? *edge_sigma : DefaultEdgeSigma(s.length());
    for (int i = 0; i < n; ++i) {
      if (raw.labels[i] != s.phoneme) continue;
      for (int j = s.onset; j < s.offset; ++j) {
        const double d = std::min(j - s.onset, s.offset - 1 - j);
        if (d >= 3.0 * sigma) continue;
        const double g = std::exp(-d * d / (2.0 * sigma * sigma));
        const double c = raw.values(i, j);
        out.values(i, j) = c + g * (row_mean[i] - c);
      }
    }
  }
  return out;
}

CostMatrix NormalizeTimeAxis(const CostMatrix &c) {
  CostMatrix out = c;
  for (int i = 0; i < c.num_labels(); ++i) {
    auto in_row = c.values.row(i);
    auto out_row = out.values.row(i);
    const double min_cost = *std::min_element(in_row.begin(), in_row.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < in_row.size(); ++j) {
      out_row[j] = std::exp(-(in_row[j] - min_cost));
      sum += out_row[j];
    }
    for (double &v : out_row) v /= sum;
  }
  return out;
}

CostMatrix BuildTargetCost(const Segmentation &seg,
                           std::span<const std::string> labels,
                           const SimilarityTable &sim, int num_frames,
                           const TargetCostOptions &options) {
  CostMatrix c = BuildRawTargetCost(seg, labels, sim, num_frames);
  if (options.attenuate) c = ApplyEdgeAttenuation(c, seg, options.edge_sigma);
  if (options.normalize) c = NormalizeTimeAxis(c);
  return c;
}

CostMatrix SynthesizePredictedCost(const Segmentation &seg,
                                   std::span<const std::string> labels,
                                   const SimilarityTable &sim, int num_frames,
                                   double noise_level, std::uint64_t seed,
                                   const TargetCostOptions &options) {
  if (!(noise_level >= 0.0)) throw DomainError("noise level must be >= 0");
  CostMatrix c = BuildTargetCost(seg, labels, sim, num_frames, options);
  if (noise_level == 0.0) return c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-noise_level, noise_level);
  for (double &v : c.values.data()) v = std::max(0.0, v + noise(rng));
  return c;
}

}  // namespace lcsctc
