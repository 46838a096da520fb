#include <stdexcept>

#include "oracles.h"

namespace oracle {

namespace {

struct Search {
  const lcsctc::ValidMatchSet &valid;
  const lcsctc::Matrix *cost;
  std::vector<lcsctc::MatchPair> current;
  double current_cost = 0.0;
  BruteForceMatching best;

  void Run(int frame, int min_phoneme) {
    if (frame == valid.num_frames()) {
      const int size = static_cast<int>(current.size());
      if (size > best.cardinality ||
          (size == best.cardinality && current_cost < best.min_cost)) {
        best.cardinality = size;
        best.pairs = current;
        best.min_cost = current_cost;
      }
      return;
    }
    Run(frame + 1, min_phoneme);  // frame left unassigned
    for (int i = min_phoneme; i < valid.num_phonemes(); ++i) {
      if (!valid.Contains(i, frame)) continue;
      const double c = cost ? (*cost)(i, frame) : 0.0;
      current.push_back({i, frame});
      current_cost += c;
      Run(frame + 1, i);
      current_cost -= c;
      current.pop_back();
    }
  }
};

}  // namespace

BruteForceMatching BruteForceAlign(const lcsctc::ValidMatchSet &valid,
                                   const lcsctc::Matrix *cost) {
  if (valid.num_phonemes() > 8 || valid.num_frames() > 12)
    throw std::length_error("brute-force alignment limited to 8 x 12");
  Search search{valid, cost, {}, 0.0, {}};
  search.Run(0, 0);
  return search.best;
}

}  // namespace oracle
