#pragma once

// Brute-force reference for the frame-start optimisation. Used by the test
// suites and `crsim selftest`; not on any policy path.

#include <algorithm>
#include <numeric>
#include <vector>

#include "crsched/doac.hpp"

namespace crsched::oracle {

struct ExhaustiveResult {
  std::vector<std::size_t> order;
  std::vector<std::size_t> level;
  double objective = kInf;
};

/// Psi of one priority list when each position takes its own grid argmin
/// behind the prefix built so far (own scan; smaller power on ties).
inline ExhaustiveResult greedy_levels(const FrameModel& model, const PsiWeights& w, const std::vector<std::size_t>& order) {
  ExhaustiveResult res{order, std::vector<std::size_t>(model.size(), 0), 0.0};
  Prefix prefix;
  for (std::size_t user : order) {
    const bool zero_weight = w.delay_debt[user] * model.users[user].arrival_rate == 0.0 && w.interference_debt == 0.0;
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t m = 0; m < model.grid.size(); ++m) {
      const double v = psi(model, w, user, m, prefix);
      if (v < best || (zero_weight && v == best && v != kInf)) {
        best = v;
        arg = m;
      }
    }
    if (best == kInf) {
      res.objective = kInf;
      return res;
    }
    res.level[user] = arg;
    res.objective += best;
    prefix = extend(model, prefix, user, arg);
  }
  return res;
}

/// Minimum over all N! priority lists; the lexicographically first list wins ties.
inline ExhaustiveResult exhaustive_search(const FrameModel& model, const PsiWeights& w) {
  std::vector<std::size_t> order(model.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ExhaustiveResult best;
  do {
    auto cand = greedy_levels(model, w, order);
    if (cand.objective < best.objective) best = std::move(cand);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace crsched::oracle
