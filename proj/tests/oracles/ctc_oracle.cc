#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.h"

namespace oracle {

std::vector<int> Collapse(std::span<const int> path, int blank_id) {
  std::vector<int> out;
  int prev = -1;
  for (int id : path) {
    if (id != prev && id != blank_id) out.push_back(id);
    prev = id;
  }
  return out;
}

namespace {

// Index into blank, y1, blank, ..., yL, blank of every frame of a valid path.
std::vector<int> ExtendedStates(std::span<const int> path, int blank_id) {
  std::vector<int> states;
  int label = -1;  // index of the last label entered
  int prev = -1;
  for (int id : path) {
    if (id == blank_id) {
      states.push_back(2 * (label + 1));
    } else {
      if (id != prev) ++label;
      states.push_back(2 * label + 1);
    }
    prev = id;
  }
  return states;
}

bool LaterIsLarger(const std::vector<int> &a, const std::vector<int> &b) {
  for (std::size_t t = a.size(); t-- > 0;)
    if (a[t] != b[t]) return a[t] > b[t];
  return false;
}

template <typename Visit>
void ForEachPath(int vocab_size, int num_frames, Visit visit) {
  std::vector<int> path(num_frames, 0);
  while (true) {
    visit(path);
    int t = num_frames - 1;
    while (t >= 0 && ++path[t] == vocab_size) path[t--] = 0;
    if (t < 0) return;
  }
}

}  // namespace

PathEnumeration EnumeratePaths(const lcsctc::EmissionMatrix &p,
                               std::span<const int> target) {
  const int blank = p.vocab().blank_id();
  const std::vector<int> want(target.begin(), target.end());
  PathEnumeration out;
  double total = 0.0;
  struct Scored {
    double score;
    std::vector<int> path;
  };
  std::vector<Scored> valid;

  ForEachPath(p.vocab_size(), p.num_frames(), [&](const std::vector<int> &path) {
    if (Collapse(path, blank) != want) return;
    ++out.valid_paths;
    double prob = 1.0;
    double score = 0.0;
    for (int t = 0; t < p.num_frames(); ++t) {
      prob *= p(path[t], t);
      score = t == 0 ? std::log(p(path[t], t)) : score + std::log(p(path[t], t));
    }
    total += prob;
    valid.push_back({score, path});
  });
  out.loss = -std::log(total);

  double top = -std::numeric_limits<double>::infinity();
  for (const auto &v : valid) top = std::max(top, v.score);
  std::vector<int> best_states;
  for (const auto &v : valid) {
    if (top - v.score > kTieTolerance * std::max(1.0, std::abs(top))) continue;
    std::vector<int> states = ExtendedStates(v.path, blank);
    if (best_states.empty() || LaterIsLarger(states, best_states)) {
      out.best_log_prob = v.score;
      out.best_path = v.path;
      best_states = std::move(states);
    }
  }
  return out;
}

double ContradictingMass(const lcsctc::EmissionMatrix &p,
                         std::span<const int> target, int t, int id) {
  const int blank = p.vocab().blank_id();
  const std::vector<int> want(target.begin(), target.end());
  double mass = 0.0;
  ForEachPath(p.vocab_size(), p.num_frames(), [&](const std::vector<int> &path) {
    if (path[t] == id || Collapse(path, blank) != want) return;
    double prob = 1.0;
    for (int f = 0; f < p.num_frames(); ++f) prob *= p(path[f], f);
    mass += prob;
  });
  return mass;
}

}  // namespace oracle
