// lcsctc/toy_trainer.h
//
// Desk-scale training harness: synthetic utterances built from noisy class
// prototypes, a linear-softmax frame classifier, and full-batch gradient
// descent under vanilla CTC, LCS-CTC or CE-CTC.

#ifndef LCSCTC_TOY_TRAINER_H_
#define LCSCTC_TOY_TRAINER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcsctc/cost_matrix.h"
#include "lcsctc/ctc.h"
#include "lcsctc/lcs_align.h"
#include "lcsctc/matrix.h"
#include "lcsctc/metrics.h"
#include "lcsctc/phoneme.h"

namespace lcsctc {

struct SyntheticConfig {
  int num_utts = 200;
  // Drawn after the training utterances from the same prototypes.
  int heldout_utts = 100;
  std::vector<std::string> vocab_subset = {"IH", "N", "S", "ER", "T", "AH"};
  int min_phonemes = 4;
  int max_phonemes = 6;
  double mean_span_frames = 8.0;
  int feature_dim = 16;
  double feature_noise = 1.0;
  // Probability that an utterance gets one extraneous phoneme span in its
  // audio that is absent from its target.
  double dysfluency_rate = 0.0;
  // The synthesized costs stand in for a fairly accurate cost predictor.
  double cost_noise = 0.05;
  std::optional<double> edge_sigma = 0.3;
  std::uint64_t seed = 1;
};

// Throws DomainError on out-of-range settings.
void ValidateSyntheticConfig(const SyntheticConfig &config);

struct SyntheticUtterance {
  std::string id;
  Matrix features;                  // T x F
  std::vector<std::string> target;  // transcript, without inserted phonemes
  Segmentation segmentation;        // what is actually in the audio
  CostMatrix cost;                  // noisy predicted cost, rows = target
  std::vector<int> frame_label;     // target index per frame, -1 if inserted

  int num_frames() const { return features.rows(); }
  std::vector<std::string> Spoken() const { return segmentation.Labels(); }
};

struct SyntheticDataset {
  SyntheticConfig config;
  Vocabulary vocab;
  Matrix prototypes;  // |subset| x F, row k for vocabulary id k + 1
  std::vector<SyntheticUtterance> utterances;
  std::vector<SyntheticUtterance> heldout;
};

SyntheticDataset GenerateSynthetic(const SyntheticConfig &config,
                                   const SimilarityTable &sim);

enum class Objective { kVanillaCtc, kLcsCtc, kCeCtc };

std::string_view ObjectiveName(Objective o);
// Accepts "vanilla_ctc", "lcs_ctc", "ce_ctc". Throws DomainError otherwise.
Objective ParseObjective(std::string_view name);

struct TrainConfig {
  Objective objective = Objective::kLcsCtc;
  int epochs = 30;
  double learning_rate = 0.5;
  double lambda = 0.5;
  double tol = 1.0;
  double cost_floor = 0.05;
  double epsilon = 1e-8;
  // Rebuild LCS masks from the model's own emissions at every epoch instead
  // of using the static masks derived from the synthesized costs.
  bool refresh_masks = false;
  double init_scale = 0.01;
  std::uint64_t seed = 1;
};

void ValidateTrainConfig(const TrainConfig &config);

struct LinearModel {
  Vocabulary vocab;
  Matrix weights;             // F x V
  std::vector<double> bias;   // V

  int feature_dim() const { return weights.rows(); }
  Matrix Logits(const Matrix &features) const;  // V x T
  EmissionMatrix Emit(const Matrix &features) const;
};

struct TrainingLog {
  std::vector<double> epoch_loss;  // mean objective before each update
  double final_loss = 0.0;         // mean objective after the last update
  std::vector<int> anchored_frames;  // per epoch, summed over utterances
};

struct TrainResult {
  LinearModel model;
  TrainingLog log;
};

// Throws Error if the objective becomes non-finite.
TrainResult Train(const SyntheticDataset &data, const SimilarityTable &sim,
                  const TrainConfig &config);

// LCS mask for every utterance from its synthesized cost matrix, expanded
// to vocabulary space.
std::vector<BitMatrix> StaticMasks(const SyntheticDataset &data,
                                   const SimilarityTable &sim,
                                   const LcsOptions &options);

struct EvalReport {
  double per = 0.0;
  double wper = 0.0;
  std::optional<double> bl_frames;
  PeakinessStats peakiness;  // averaged over utterances
  int utterances = 0;
};

// Greedy decoding scored against the spoken phoneme sequence, and Viterbi
// alignment against the ground-truth segmentation.
EvalReport Evaluate(const LinearModel &model,
                    const std::vector<SyntheticUtterance> &utterances,
                    const SimilarityTable &sim);

// Fraction of anchored frames whose argmax equals the anchored class.
double AnchorAgreement(const LinearModel &model, const SyntheticDataset &data,
                       const std::vector<BitMatrix> &masks);

struct TolSweepPoint {
  double tol = 0.0;
  double constrained_ratio = 0.0;  // anchored frames / all frames
  double precision = 1.0;          // correct anchors / anchors (1 if none)
};

std::vector<TolSweepPoint> SweepTolerance(const SyntheticDataset &data,
                                          const SimilarityTable &sim,
                                          const std::vector<double> &tols,
                                          double cost_floor);

}  // namespace lcsctc

#endif  // LCSCTC_TOY_TRAINER_H_
