#pragma once

// Low-complexity and baseline schedulers: the two-step c-mu policy, uniform
// CSMA channel assignment and a per-slot MaxWeight (CNC) rule.

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crsched/doac.hpp"
#include "crsched/rng.hpp"
#include "crsched/system_model.hpp"

namespace crsched {

enum class PolicyKind { doac, suboptimal, csma, cnc, fixed };

inline std::string to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::doac: return "doac";
    case PolicyKind::suboptimal: return "suboptimal";
    case PolicyKind::csma: return "csma";
    case PolicyKind::cnc: return "cnc";
    case PolicyKind::fixed: return "fixed";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& s) {
  for (auto p : {PolicyKind::doac, PolicyKind::suboptimal, PolicyKind::csma, PolicyKind::cnc, PolicyKind::fixed})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown policy '" + s + "'");
}

/// Step 1: P_min where X > scale * Y_i, else P_max. Step 2: priorities by
/// descending Y_i mu_i(P_i), ties by index. The plan's objective is psi
/// evaluated on the resulting list.
inline FramePlan suboptimal_frame_start(const VirtualQueueState& vq, const FrameModel& model, double scale = 1.0) {
  const std::size_t n = model.size();
  const std::size_t top = model.grid.size() - 1;
  FramePlan plan;
  plan.level.resize(n);
  plan.power.resize(n);
  std::vector<double> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan.level[i] = vq.interference_debt > scale * vq.delay_debt[i] ? 0 : top;
    plan.power[i] = model.grid.levels[plan.level[i]];
    key[i] = vq.delay_debt[i] * model.users[i].service_rate[plan.level[i]];
  }
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  plan.objective = evaluate_plan(model, PsiWeights::from(vq), plan.order, plan.level);
  return plan;
}

struct Transmission {
  std::size_t user = 0;
  double power = 0.0;
};

/// Uniform pick among backlogged users; power taken from `genie`.
template <class Urbg>
std::optional<Transmission> csma_slot(std::span<const std::size_t> backlogged, std::span<const double> genie_power,
                                      Urbg& g) {
  if (backlogged.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, backlogged.size() - 1);
  const std::size_t u = backlogged[pick(g)];
  return Transmission{u, genie_power[u]};
}

// Per-slot interference debt of the MaxWeight baseline.
struct CncState {
  double debt = 0.0;

  void update(double slot_interference, double budget) {
    if (std::isinf(budget)) {
      debt = 0.0;
      return;
    }
    debt = std::max(0.0, debt + slot_interference - budget);
  }
};

/// argmax over backlogged users and grid levels of Q_i R_i(P, gamma_i) - debt P g_i.
/// Ties go to the lower index, then to the lower power.
inline std::optional<Transmission> cnc_slot(std::span<const std::size_t> queue_length, std::span<const GainDraw> gains,
                                            double debt, const PowerGrid& grid) {
  std::optional<Transmission> best;
  double best_weight = -kInf;
  for (std::size_t i = 0; i < queue_length.size(); ++i) {
    if (queue_length[i] == 0) continue;
    for (double p : grid.levels) {
      const double weight = static_cast<double>(queue_length[i]) * rate(p, gains[i].data) - debt * p * gains[i].interference;
      if (weight > best_weight) {
        best_weight = weight;
        best = Transmission{i, p};
      }
    }
  }
  return best;
}

}  // namespace crsched
