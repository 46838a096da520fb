// Shared plumbing for the lcsctc subcommands.

#ifndef LCSCTC_TOOLS_COMMON_H_
#define LCSCTC_TOOLS_COMMON_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcsctc/phoneme.h"
#include "lcsctc/toy_trainer.h"

namespace lcsctc::cli {

// Bad flag combinations detected after parsing. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric flag checks with readable messages.
extern const CLI::Validator kPositive;
extern const CLI::Validator kNonNegative;
extern const CLI::Validator kUnitInterval;

struct GlobalOptions {
  std::string phoneme_table;
};

// The similarity table from --phoneme-table, or the built-in one.
SimilarityTable Similarity(const GlobalOptions &g);

struct LabelSource {
  std::string inline_text;
  std::string file;
};

// Adds --labels and --labels-file (mutually exclusive).
void AddLabelOptions(CLI::App *sub, LabelSource &src, bool required);
// Empty if neither flag was given.
std::vector<std::string> ReadLabels(const LabelSource &src);

// Writes atomically to `path`, or to stdout when `path` is empty.
void Emit(const std::string &path, const std::string &text);

struct SyntheticFlags {
  SyntheticConfig config;
  std::string phonemes;
  double edge_sigma = 0.3;
  bool adaptive_sigma = false;

  // Folds the string and switch flags into `config`.
  SyntheticConfig Resolve() const;
};

// Adds the flags that shape a synthetic dataset.
void AddSyntheticOptions(CLI::App *sub, SyntheticFlags &flags);

// Runs fn(0) .. fn(n - 1) on at most `jobs` threads. The first exception
// thrown by any task is rethrown after all workers finish.
void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)> &fn);

int DefaultJobs();

using Handler = std::function<void()>;

// Each registers one subcommand and returns what to run when it is chosen.
Handler AddTarget(CLI::App &app, const GlobalOptions &g);
Handler AddAlign(CLI::App &app, const GlobalOptions &g);
Handler AddLoss(CLI::App &app, const GlobalOptions &g);
Handler AddGradCheck(CLI::App &app, const GlobalOptions &g);
Handler AddDecode(CLI::App &app, const GlobalOptions &g);
Handler AddEmissionsDump(CLI::App &app, const GlobalOptions &g);
Handler AddEval(CLI::App &app, const GlobalOptions &g);
Handler AddTrainToy(CLI::App &app, const GlobalOptions &g);
Handler AddEvalToy(CLI::App &app, const GlobalOptions &g);
Handler AddGenSynth(CLI::App &app, const GlobalOptions &g);
Handler AddTolSweep(CLI::App &app, const GlobalOptions &g);

}  // namespace lcsctc::cli

#endif  // LCSCTC_TOOLS_COMMON_H_
