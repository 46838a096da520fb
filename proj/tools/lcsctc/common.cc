#include "common.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "lcsctc/io.h"

namespace lcsctc::cli {

namespace {

CLI::Validator NumberCheck(const char *name, bool (*ok)(double),
                           const char *expect) {
  return CLI::Validator(
      [ok, expect](std::string &in) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(in, v)) return "expected a number, got '" + in + "'";
        if (!ok(v)) return std::string("must be ") + expect + ", got " + in;
        return {};
      },
      expect, name);
}

}  // namespace

const CLI::Validator kPositive = NumberCheck(
    "POSITIVE", [](double v) { return v > 0.0; }, "positive");
const CLI::Validator kNonNegative = NumberCheck(
    "NONNEGATIVE", [](double v) { return v >= 0.0; }, "non-negative");
const CLI::Validator kUnitInterval = NumberCheck(
    "UNIT", [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0, 1]");

SimilarityTable Similarity(const GlobalOptions &g) {
  if (g.phoneme_table.empty())
    return PhonemeInventory::Default().BuildSimilarityTable();
  return PhonemeInventory::Load(g.phoneme_table).BuildSimilarityTable();
}

void AddLabelOptions(CLI::App *sub, LabelSource &src, bool required) {
  auto *text = sub->add_option("--labels", src.inline_text,
                               "Space-separated ARPAbet labels");
  auto *file = sub->add_option("--labels-file", src.file,
                               "File holding the labels")
                   ->check(CLI::ExistingFile);
  text->excludes(file);
  file->excludes(text);
  if (required) {
    auto *group = sub->add_option_group("labels");
    group->add_option(text);
    group->add_option(file);
    group->require_option(1);
  }
}

std::vector<std::string> ReadLabels(const LabelSource &src) {
  if (!src.file.empty()) return ParseLabels(ReadFile(src.file));
  return ParseLabels(src.inline_text);
}

void Emit(const std::string &path, const std::string &text) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    std::cout.flush();
  } else {
    WriteFileAtomic(path, text);
  }
}

SyntheticConfig SyntheticFlags::Resolve() const {
  SyntheticConfig c = config;
  if (!phonemes.empty()) c.vocab_subset = ParseLabels(phonemes);
  c.edge_sigma = edge_sigma;
  if (adaptive_sigma) c.edge_sigma.reset();
  return c;
}

void AddSyntheticOptions(CLI::App *sub, SyntheticFlags &flags) {
  SyntheticConfig &c = flags.config;
  sub->add_option("--num-utts", c.num_utts, "Training utterances")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--heldout-utts", c.heldout_utts, "Held-out utterances")
      ->check(kNonNegative)
      ->capture_default_str();
  sub->add_option("--phonemes", flags.phonemes,
                  "Phoneme subset, space-separated (default IH N S ER T AH)");
  sub->add_option("--min-phonemes", c.min_phonemes)
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--max-phonemes", c.max_phonemes)
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--mean-span", c.mean_span_frames, "Mean span length in frames")
      ->check(CLI::Range(1.0, 1e6))
      ->capture_default_str();
  sub->add_option("--feature-dim", c.feature_dim)
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--feature-noise", c.feature_noise)
      ->check(kNonNegative)
      ->capture_default_str();
  sub->add_option("--dysfluency-rate", c.dysfluency_rate)
      ->check(kUnitInterval)
      ->capture_default_str();
  sub->add_option("--cost-noise", c.cost_noise,
                  "Uniform noise added to the synthesized costs")
      ->check(kNonNegative)
      ->capture_default_str();
  auto *sigma = sub->add_option("--edge-sigma", flags.edge_sigma,
                                "Edge attenuation width in frames")
                    ->check(kPositive)
                    ->capture_default_str();
  sub->add_flag("--adaptive-edge-sigma", flags.adaptive_sigma,
                "Scale the edge width with each span's length")
      ->excludes(sigma);
  sub->add_option("--seed", c.seed, "Data seed")->capture_default_str();
}

void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)> &fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
}

int DefaultJobs() {
  return static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
}

}  // namespace lcsctc::cli
