#pragma once

// Frame-start optimisation of the delay-optimal policy under an average
// interference constraint: psi objective, per-user one-dimensional power
// search and the forward dynamic program over user subsets.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "crsched/errors.hpp"
#include "crsched/queueing.hpp"
#include "crsched/system_model.hpp"
#include "crsched/virtual_queues.hpp"

namespace crsched {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascending transmit-power levels shared by all users.
struct PowerGrid {
  std::vector<double> levels;

  std::size_t size() const noexcept { return levels.size(); }
  double min() const { return levels.front(); }
  double max() const { return levels.back(); }
};

/// `count` log-spaced levels on [lo, hi]; a single level (or lo == hi) gives {hi}.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (count == 0) throw ConfigError("power grid needs at least one level");
  if (!(lo > 0.0 && lo <= hi)) throw ConfigError("power grid bounds must satisfy 0 < lo <= hi");
  if (count == 1 || lo == hi) return {hi};
  std::vector<double> v(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t m = 0; m < count; ++m)
    v[m] = std::clamp(std::exp(a + (b - a) * static_cast<double>(m) / static_cast<double>(count - 1)), lo, hi);
  v.front() = lo;
  v.back() = hi;
  return v;
}

/// Grid of `count` log-spaced levels on [P_min, P_max], where P_min is the
/// smallest level of the same-size grid on [p_floor, P_max] at which the
/// total utilisation with every user at that power stays below one.
/// `total_load(P)` must be nonincreasing in P.
template <class LoadFn>
PowerGrid make_power_grid(double p_floor, double p_max, std::size_t count, LoadFn&& total_load) {
  if (!(total_load(p_max) < 1.0)) throw InfeasibleError("no power level keeps the total load below one");
  const auto base = log_spaced(std::min(p_floor, p_max), p_max, count);
  const auto it = std::find_if(base.begin(), base.end(), [&](double p) { return total_load(p) < 1.0; });
  return {log_spaced(*it, p_max, count)};
}

// One user's quantities evaluated on the power grid.
struct UserCurve {
  double arrival_rate = 0.0;
  double mean_interference_gain = 0.0;
  std::vector<double> service_rate;    // mu(P_m), packets/slot
  std::vector<double> second_moment;   // E[s^2](P_m), +inf if the point was rejected

  double utilization(std::size_t m) const { return arrival_rate / service_rate[m]; }
};

// Everything the frame-start optimisation needs; immutable for a run.
struct FrameModel {
  PowerGrid grid;
  std::vector<UserCurve> users;

  std::size_t size() const noexcept { return users.size(); }
};

inline FrameModel build_frame_model(std::span<const UserParams> users, std::span<const ChannelStats> stats,
                                    const PowerGrid& grid, const MonteCarloSettings& mc) {
  if (users.size() != stats.size()) throw ConfigError("one channel description per user is required");
  FrameModel model{grid, {}};
  model.users.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    UserCurve c;
    c.arrival_rate = users[i].arrival_rate;
    c.mean_interference_gain = stats[i].interference.mean;
    for (double p : grid.levels) {
      c.service_rate.push_back(service_rate_mu(users[i], stats[i], p));
      try {
        c.second_moment.push_back(service_moments(users[i], stats[i], p, mc).second);
      } catch (const ServiceTooSlow&) {
        c.second_moment.push_back(kInf);
      }
    }
    model.users.push_back(std::move(c));
  }
  return model;
}

// psi weights: delay debts Y_i(k) and the interference debt X(k).
struct PsiWeights {
  std::vector<double> delay_debt;
  double interference_debt = 0.0;

  static PsiWeights from(const VirtualQueueState& vq) { return {vq.delay_debt, vq.interference_debt}; }
};

// Load and residual time accumulated by the users already placed ahead.
struct Prefix {
  double load = 0.0;
  double residual = 0.0;
};

/// psi_i(P_m, prefix) = Y_i lambda_i W^up + X rho_i(P_m) P_m gbar_i; +inf when unstable.
inline double psi(const FrameModel& model, const PsiWeights& w, std::size_t user, std::size_t level,
                  const Prefix& prefix) noexcept {
  const auto& u = model.users[user];
  const double mu = u.service_rate[level];
  const double rho = u.utilization(level);
  const double residual = prefix.residual + 0.5 * u.arrival_rate * u.second_moment[level];
  const double wup = waiting_time_upper_or_inf(mu, rho, prefix.load, residual);
  if (std::isinf(wup)) return kInf;
  const double power = model.grid.levels[level];
  return w.delay_debt[user] * u.arrival_rate * wup + w.interference_debt * rho * power * u.mean_interference_gain;
}

/// Prefix after appending `user` at `level`.
inline Prefix extend(const FrameModel& model, const Prefix& prefix, std::size_t user, std::size_t level) noexcept {
  const auto& u = model.users[user];
  return {prefix.load + u.utilization(level), prefix.residual + 0.5 * u.arrival_rate * u.second_moment[level]};
}

struct PowerChoice {
  std::size_t level = 0;
  double value = kInf;
};

/// Grid argmin of psi for one user behind `prefix`. Ties go to the smaller
/// power, except that an identically-zero psi picks the largest feasible power.
inline PowerChoice best_power(const FrameModel& model, const PsiWeights& w, std::size_t user, const Prefix& prefix) {
  PowerChoice best;
  const bool zero_weight = w.delay_debt[user] * model.users[user].arrival_rate == 0.0 && w.interference_debt == 0.0;
  for (std::size_t m = 0; m < model.grid.size(); ++m) {
    const double v = psi(model, w, user, m, prefix);
    if (v < best.value || (zero_weight && v == best.value && !std::isinf(v))) best = {m, v};
  }
  return best;
}

struct FramePlan {
  std::vector<std::size_t> order;   // order[0] has the highest priority
  std::vector<std::size_t> level;   // grid level per user
  std::vector<double> power;        // transmit power per user
  double objective = kInf;          // Psi*
};

/// Psi of a given priority list with given per-user levels, summed in priority order.
inline double evaluate_plan(const FrameModel& model, const PsiWeights& w, std::span<const std::size_t> order,
                            std::span<const std::size_t> level) {
  Prefix prefix;
  double total = 0.0;
  for (std::size_t user : order) {
    total += psi(model, w, user, level[user], prefix);
    prefix = extend(model, prefix, user, level[user]);
  }
  return total;
}

// One row of the subset table: best way to fill the first popcount(subset)
// priorities with exactly the users in `subset`.
struct DpRow {
  std::size_t stage = 0;
  std::uint32_t subset = 0;
  double objective = kInf;  // Psi~(stage, subset) of the best label
  double load = 0.0;        // rho~(subset) of the best label
  int last = -1;            // l*, the user placed at position `stage`
  std::size_t labels = 0;   // labels retained for the subset
};

enum class DpMode {
  // Keep every (Psi~, rho~, T^R) label of a subset that no other label beats in
  // all three coordinates. Matches the exhaustive search.
  pareto,
  // Keep only the min-Psi~ label per subset: O(M N 2^N), not always optimal.
  single_label,
};

inline constexpr std::size_t kMaxExactUsers = 16;

namespace detail {

struct DpLabel {
  double cost = 0.0;
  Prefix prefix;
  std::uint32_t parent = 0;  // label index within the predecessor subset
  int last = -1;
  std::size_t level = 0;
};

// Loads and residuals equal up to round-off count as equal, so that orderings
// which differ only in summation order collapse to one label.
inline bool no_worse(double a, double b) noexcept { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }

inline bool dominates(const DpLabel& a, const DpLabel& b) noexcept {
  return a.cost <= b.cost && no_worse(a.prefix.load, b.prefix.load) && no_worse(a.prefix.residual, b.prefix.residual);
}

}  // namespace detail

/// Forward DP over user subsets (stage i fills priority i). Transitions are
/// generated from the largest user index down, and earlier labels win exact
/// ties, so users with equal claims keep index order.
inline FramePlan solve_frame(const FrameModel& model, const PsiWeights& w, DpMode mode = DpMode::pareto,
                             std::vector<DpRow>* table = nullptr) {
  const std::size_t n = model.size();
  if (n == 0) throw ConfigError("solve_frame: no users");
  if (n > kMaxExactUsers) throw ConfigError("solve_frame: exact DP limited to 16 users; use the suboptimal policy");
  if (w.delay_debt.size() != n) throw ContractViolation("solve_frame: weight size mismatch");

  using detail::DpLabel;
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<std::vector<DpLabel>> labels(std::size_t{1} << n);
  labels[0].push_back({});
  if (table) table->push_back({0, 0, 0.0, 0.0, -1, 1});

  std::vector<DpLabel> candidates;
  for (std::size_t stage = 1; stage <= n; ++stage) {
    // Gosper's hack: subsets of size `stage` in increasing order.
    for (std::uint32_t subset = (1u << stage) - 1u; subset <= full;) {
      candidates.clear();
      for (std::size_t l = n; l-- > 0;) {
        const std::uint32_t bit = 1u << l;
        if (!(subset & bit)) continue;
        const auto& from = labels[subset ^ bit];
        for (std::uint32_t a = 0; a < from.size(); ++a) {
          const auto choice = best_power(model, w, l, from[a].prefix);
          if (std::isinf(choice.value)) continue;
          candidates.push_back({from[a].cost + choice.value, extend(model, from[a].prefix, l, choice.level), a,
                                static_cast<int>(l), choice.level});
        }
      }

      auto& kept = labels[subset];
      if (mode == DpMode::single_label) {
        for (const auto& c : candidates)
          if (kept.empty() || c.cost < kept.front().cost) kept.assign(1, c);
      } else {
        for (const auto& c : candidates) {
          if (std::any_of(kept.begin(), kept.end(), [&](const DpLabel& o) { return detail::dominates(o, c); })) continue;
          std::erase_if(kept, [&](const DpLabel& o) { return detail::dominates(c, o); });
          kept.push_back(c);
        }
      }

      if (table) {
        DpRow row{stage, subset, kInf, 0.0, -1, kept.size()};
        for (const auto& k : kept)
          if (k.cost < row.objective) row = {stage, subset, k.cost, k.prefix.load, k.last, kept.size()};
        table->push_back(row);
      }
      if (subset == full) break;
      const std::uint32_t c = subset & (~subset + 1u);
      const std::uint32_t r = subset + c;
      subset = (((r ^ subset) >> 2) / c) | r;
    }
  }

  const auto& finals = labels[full];
  if (finals.empty()) throw InfeasibleError("solve_frame: no stable priority/power assignment on the grid");
  std::size_t best = 0;
  for (std::size_t a = 1; a < finals.size(); ++a)
    if (finals[a].cost < finals[best].cost) best = a;

  FramePlan plan;
  plan.level.assign(n, 0);
  plan.power.assign(n, 0.0);
  plan.objective = finals[best].cost;
  std::uint32_t s = full;
  std::size_t idx = best;
  while (s != 0) {
    const auto& lab = labels[s][idx];
    const auto l = static_cast<std::size_t>(lab.last);
    plan.order.push_back(l);
    plan.level[l] = lab.level;
    plan.power[l] = model.grid.levels[lab.level];
    idx = lab.parent;
    s ^= 1u << l;
  }
  std::reverse(plan.order.begin(), plan.order.end());
  return plan;
}

struct FrameDecision {
  FramePlan plan;
  std::vector<double> r;
};

/// Plan for the frame about to start plus the frame's r_i(k).
inline FrameDecision doac_frame_start(const VirtualQueueState& vq, const FrameModel& model,
                                      std::span<const DelayConstraint> constraints, double v) {
  return {solve_frame(model, PsiWeights::from(vq)), choose_r(vq, v, constraints)};
}

}  // namespace crsched
