// train-toy, eval-toy, gen-synth, tol-sweep.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "common.h"
#include "lcsctc/errors.h"
#include "lcsctc/io.h"
#include "lcsctc/toy_trainer.h"

namespace lcsctc::cli {
namespace {

using json = nlohmann::ordered_json;

json SpansJson(const Segmentation &seg) {
  json spans = json::array();
  for (const Span &s : seg.spans)
    spans.push_back({{"phoneme", s.phoneme}, {"onset", s.onset}, {"offset", s.offset}});
  return spans;
}

json ReportJson(const EvalReport &r, double frame_ms) {
  return {{"utterances", r.utterances},
          {"per", r.per},
          {"wper", r.wper},
          {"bl_frames", r.bl_frames ? json(*r.bl_frames) : json(nullptr)},
          {"bl_ms", r.bl_frames ? json(*r.bl_frames * frame_ms) : json(nullptr)},
          {"blank_frame_fraction", r.peakiness.blank_frame_fraction},
          {"mean_nonblank_run_length", r.peakiness.mean_nonblank_run_length},
          {"mean_max_prob", r.peakiness.mean_max_prob}};
}

std::string Csv(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

Handler AddTrainToy(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    SyntheticFlags data;
    TrainConfig train;
    std::string objective = "lcs_ctc", out;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand("train-toy", "Train the linear toy model on synthetic data");
  AddSyntheticOptions(sub, o->data);
  sub->add_option("--objective", o->objective)
      ->check(CLI::IsMember({"vanilla_ctc", "lcs_ctc", "ce_ctc"}))
      ->capture_default_str();
  sub->add_option("--epochs", o->train.epochs)->check(kPositive)->capture_default_str();
  sub->add_option("--lr", o->train.learning_rate, "Learning rate")
      ->check(kNonNegative)
      ->capture_default_str();
  sub->add_option("--lambda", o->train.lambda, "Weight of the CE term")
      ->check(kUnitInterval)
      ->capture_default_str();
  sub->add_option("--tol", o->train.tol, "Match tolerance")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--cost-floor", o->train.cost_floor, "Self-match cost ceiling")
      ->capture_default_str();
  sub->add_option("--epsilon", o->train.epsilon, "Mask smoothing")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--init-scale", o->train.init_scale)
      ->check(kNonNegative)
      ->capture_default_str();
  sub->add_flag("--refresh-masks", o->train.refresh_masks,
                "Rebuild masks from the model's emissions every epoch");
  sub->add_option("--out", o->out, "Model JSON path");

  return [o, &g] {
    const SimilarityTable sim = Similarity(g);
    const SyntheticConfig dc = o->data.Resolve();
    ValidateSyntheticConfig(dc);
    TrainConfig tc = o->train;
    tc.objective = ParseObjective(o->objective);
    tc.seed = dc.seed;
    ValidateTrainConfig(tc);

    const SyntheticDataset data = GenerateSynthetic(dc, sim);
    const TrainResult r = Train(data, sim, tc);
    if (!o->out.empty()) WriteFileAtomic(o->out, ModelJson(r.model, dc, tc, r.log));
    const json summary = {{"objective", o->objective},
                          {"epochs", tc.epochs},
                          {"initial_loss", r.log.epoch_loss.front()},
                          {"final_loss", r.log.final_loss}};
    Emit("", summary.dump(2));
  };
}

Handler AddEvalToy(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    std::string model, split = "heldout", out;
    double frame_ms = 20.0;
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand(
      "eval-toy", "Evaluate a saved toy model on its regenerated data");
  sub->add_option("--model", o->model, "Model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--split", o->split)
      ->check(CLI::IsMember({"train", "heldout"}))
      ->capture_default_str();
  sub->add_option("--frame-ms", o->frame_ms, "Frame duration in milliseconds")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output path (default stdout)");

  return [o, &g] {
    const SimilarityTable sim = Similarity(g);
    const SavedModel saved = ParseModel(ReadFile(o->model));
    const SyntheticDataset data = GenerateSynthetic(saved.data, sim);
    const auto &set = o->split == "train" ? data.utterances : data.heldout;
    json out = ReportJson(Evaluate(saved.model, set, sim), o->frame_ms);
    out["split"] = o->split;
    out["objective"] = std::string(ObjectiveName(saved.train.objective));
    Emit(o->out, out.dump(2) + "\n");
  };
}

Handler AddGenSynth(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    SyntheticFlags data;
    std::string out_dir;
    int jobs = DefaultJobs();
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand(
      "gen-synth", "Write a synthetic corpus: cost matrices, segmentations, manifests");
  AddSyntheticOptions(sub, o->data);
  sub->add_option("--out-dir", o->out_dir, "Output directory (created if missing)")
      ->required();
  sub->add_option("--jobs", o->jobs, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  return [o, &g] {
    const SyntheticConfig dc = o->data.Resolve();
    ValidateSyntheticConfig(dc);
    const SyntheticDataset data = GenerateSynthetic(dc, Similarity(g));
    const std::filesystem::path dir = o->out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    for (const auto *split : {&data.utterances, &data.heldout}) {
      const auto &set = *split;
      ParallelFor(set.size(), o->jobs, [&](std::size_t i) {
        const SyntheticUtterance &u = set[i];
        WriteFileAtomic(dir / (u.id + ".cost.json"), CostMatrixJson(u.cost));
        WriteFileAtomic(dir / (u.id + ".segmentation.json"), SegmentationJson(u.segmentation));
      });
      std::string manifest;
      for (const SyntheticUtterance &u : set) {
        const json line = {{"id", u.id},
                           {"phonemes", u.Spoken()},
                           {"target", u.target},
                           {"spans", SpansJson(u.segmentation)},
                           {"frames", u.num_frames()}};
        manifest += line.dump() + "\n";
      }
      WriteFileAtomic(dir / (split == &data.utterances ? "train.jsonl" : "heldout.jsonl"),
                      manifest);
    }
  };
}

Handler AddTolSweep(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    SyntheticFlags data;
    double from = 0.9, to = 1.3, step = 0.1, cost_floor = 0.05;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  o->data.config.cost_noise = 0.3;
  o->data.config.dysfluency_rate = 0.3;
  auto *sub = app.add_subcommand(
      "tol-sweep", "Constrained-region ratio and anchor precision as tol varies (CSV)");
  sub->add_option("--from", o->from)->check(kPositive)->capture_default_str();
  sub->add_option("--to", o->to)->check(kPositive)->capture_default_str();
  sub->add_option("--step", o->step)->check(kPositive)->capture_default_str();
  sub->add_option("--cost-floor", o->cost_floor, "Self-match cost ceiling")
      ->capture_default_str();
  AddSyntheticOptions(sub, o->data);
  sub->add_option("--out", o->out, "CSV path (default stdout)");

  return [o, &g] {
    if (o->to < o->from) throw UsageError("--to must not be below --from");
    std::vector<double> tols;
    const int count = static_cast<int>(std::floor((o->to - o->from) / o->step + 1e-9)) + 1;
    if (count > 100000) throw UsageError("--step yields more than 100000 points");
    for (int k = 0; k < count; ++k) tols.push_back(std::stod(Csv(o->from + k * o->step)));

    const SyntheticConfig dc = o->data.Resolve();
    ValidateSyntheticConfig(dc);
    const SimilarityTable sim = Similarity(g);
    const SyntheticDataset data = GenerateSynthetic(dc, sim);
    std::string csv = "tol,constrained_ratio,precision\n";
    for (const TolSweepPoint &p : SweepTolerance(data, sim, tols, o->cost_floor))
      csv += Csv(p.tol) + "," + Csv(p.constrained_ratio) + "," + Csv(p.precision) + "\n";
    Emit(o->out, csv);
  };
}

}  // namespace lcsctc::cli
