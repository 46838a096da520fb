// lcsctc/io.h
//
// File formats.
//
// Matrix JSON:
//   {"kind": "cost" | "emission" | "mask",
//    "row_labels": ["IH", ...],
//    "num_frames": T,
//    "data": [[row0...], [row1...], ...]}
// Values are binary64 written as shortest round-trip decimals; mask data is
// integer 0/1. Emission row labels are the vocabulary in id order with the
// blank written as "<blank>".
//
// Segmentation JSON:
//   {"spans": [{"phoneme": "IH", "onset": 0, "offset": 3}, ...]}
//
// All writers go through a temporary file followed by a rename, so readers
// never observe a partially written file.

#ifndef LCSCTC_IO_H_
#define LCSCTC_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lcsctc/cost_matrix.h"
#include "lcsctc/ctc.h"
#include "lcsctc/lcs_align.h"
#include "lcsctc/matrix.h"
#include "lcsctc/toy_trainer.h"

namespace lcsctc {

enum class MatrixKind { kCost, kEmission, kMask };

std::string_view MatrixKindName(MatrixKind kind);

struct LabeledMatrix {
  MatrixKind kind = MatrixKind::kCost;
  std::vector<std::string> row_labels;
  Matrix data;
};

// Throw ParseError on malformed JSON or when the declared dimensions
// disagree with the data.
LabeledMatrix ParseMatrixJson(std::string_view text);
std::string MatrixJson(const LabeledMatrix &m);

CostMatrix ParseCostMatrix(std::string_view text);
std::string CostMatrixJson(const CostMatrix &c);

EmissionMatrix ParseEmissions(std::string_view text);
std::string EmissionsJson(const EmissionMatrix &p);

// A mask file is either label space (row labels = transcript) or vocabulary
// space (row labels = vocabulary); the format is the same.
AlignmentMask ParseMask(std::string_view text);
std::string MaskJson(const AlignmentMask &m);
std::string VocabMaskJson(const BitMatrix &mask, const Vocabulary &vocab);

Segmentation ParseSegmentation(std::string_view text);
std::string SegmentationJson(const Segmentation &seg);

std::string ModelJson(const LinearModel &model, const SyntheticConfig &data,
                      const TrainConfig &train, const TrainingLog &log);
struct SavedModel {
  LinearModel model;
  SyntheticConfig data;
  TrainConfig train;
  TrainingLog log;
};
SavedModel ParseModel(std::string_view text);

std::string ReadFile(const std::filesystem::path &path);
// Writes to "<path>.tmp" and renames over `path`.
void WriteFileAtomic(const std::filesystem::path &path,
                     std::string_view contents);

}  // namespace lcsctc

#endif  // LCSCTC_IO_H_
