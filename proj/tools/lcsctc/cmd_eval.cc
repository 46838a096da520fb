// eval: corpus scoring of JSON-lines transcripts.

#include <filesystem>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "common.h"
#include "lcsctc/errors.h"
#include "lcsctc/io.h"
#include "lcsctc/metrics.h"

namespace lcsctc::cli {
namespace {

using json = nlohmann::ordered_json;

struct Entry {
  std::string id;
  std::vector<std::string> phonemes;
  std::optional<Segmentation> spans;
};

std::vector<Entry> ReadJsonLines(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      Entry e;
      e.id = j.at("id").get<std::string>();
      for (const auto &p : j.at("phonemes")) e.phonemes.push_back(NormalizeSymbol(p.get<std::string>()));
      if (j.contains("spans"))
        e.spans = ParseSegmentation(json{{"spans", j.at("spans")}}.dump());
      if (!seen.emplace(e.id, lineno).second)
        throw DomainError("duplicate id '" + e.id + "'");
      entries.push_back(std::move(e));
    } catch (const json::exception &ex) {
      throw ParseError(where + ": " + ex.what());
    } catch (const Error &ex) {
      throw ParseError(where + ": " + ex.what());
    }
  }
  return entries;
}

struct Scored {
  EditOps unit, weighted;
  std::optional<BoundaryReport> boundary;
};

}  // namespace

Handler AddEval(CLI::App &app, const GlobalOptions &g) {
  struct Opts {
    std::string ref, hyp, out, out_dir;
    double frame_ms = 20.0;
    int jobs = DefaultJobs();
  };
  auto o = std::make_shared<Opts>();
  auto *sub = app.add_subcommand("eval", "Score hypotheses against references (PER, WPER, BL)");
  sub->add_option("--ref", o->ref, "Reference JSON lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--hyp", o->hyp, "Hypothesis JSON lines")->required()->check(CLI::ExistingFile);
  sub->add_option("--frame-ms", o->frame_ms, "Frame duration in milliseconds")
      ->check(kPositive)
      ->capture_default_str();
  sub->add_option("--jobs", o->jobs, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Report path (default stdout)");
  sub->add_option("--out-dir", o->out_dir, "Also write one report per utterance here")
      ->check(CLI::ExistingDirectory);

  return [o, &g] {
    const SimilarityTable sim = Similarity(g);
    const std::vector<Entry> refs = ReadJsonLines(o->ref);
    std::vector<Entry> hyp_list = ReadJsonLines(o->hyp);
    std::map<std::string, Entry> hyps;
    for (auto &h : hyp_list) hyps.emplace(h.id, std::move(h));
    for (const auto &[id, h] : hyps) {
      if (std::none_of(refs.begin(), refs.end(), [&](const Entry &r) { return r.id == id; }))
        throw DomainError("hypothesis '" + id + "' has no reference");
    }
    for (const auto &r : refs) {
      if (!hyps.contains(r.id)) throw DomainError("no hypothesis for '" + r.id + "'");
      if (!o->out_dir.empty() &&
          (r.id.find_first_of("/\\") != std::string::npos || r.id == "." || r.id == ".."))
        throw DomainError("id '" + r.id + "' cannot be used as a file name");
    }

    std::vector<Scored> scored(refs.size());
    std::vector<json> reports(refs.size());
    ParallelFor(refs.size(), o->jobs, [&](std::size_t i) {
      const Entry &r = refs[i];
      const Entry &h = hyps.at(r.id);
      Scored &s = scored[i];
      s.unit = AlignUnit(r.phonemes, h.phonemes);
      s.weighted = AlignWeighted(r.phonemes, h.phonemes, sim);
      if (r.spans && h.spans) s.boundary = BoundaryLoss(*h.spans, *r.spans, o->frame_ms);

      const double n = static_cast<double>(r.phonemes.size());
      json rep = {{"id", r.id},
                  {"ref_length", r.phonemes.size()},
                  {"edits", s.unit.cost},
                  {"weighted_edits", s.weighted.cost},
                  {"per", n > 0 ? json(s.unit.cost / n) : json(nullptr)},
                  {"wper", n > 0 ? json(s.weighted.cost / n) : json(nullptr)},
                  {"bl_ms", s.boundary && s.boundary->mean_ms ? json(*s.boundary->mean_ms)
                                                              : json(nullptr)}};
      if (!o->out_dir.empty())
        WriteFileAtomic(std::filesystem::path(o->out_dir) / (r.id + ".json"),
                        rep.dump(2) + "\n");
      reports[i] = std::move(rep);
    });

    CorpusScores corpus;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      corpus.Add(scored[i].unit, scored[i].weighted, refs[i].phonemes.size());
      if (scored[i].boundary) corpus.AddBoundary(*scored[i].boundary);
    }
    const auto bl = corpus.boundary_ms();
    json out = {{"utterances", reports},
                {"corpus",
                 {{"utterances", corpus.utterances},
                  {"ref_phonemes", corpus.ref_phonemes},
                  {"per", corpus.ref_phonemes > 0 ? json(corpus.per()) : json(nullptr)},
                  {"wper", corpus.ref_phonemes > 0 ? json(corpus.wper()) : json(nullptr)},
                  {"bl_ms", bl ? json(*bl) : json(nullptr)},
                  {"boundary_pairs", corpus.boundary_pairs}}}};
    Emit(o->out, out.dump(2) + "\n");
  };
}

}  // namespace lcsctc::cli
