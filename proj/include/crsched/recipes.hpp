#pragma once

// Named experiment set-ups shared by the CLI and the acceptance suite, plus
// the two self-check suites (DP against brute force, simulated delays against
// the priority-queue formula).

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "crsched/doac.hpp"
#include "crsched/oracle.hpp"
#include "crsched/queueing.hpp"
#include "crsched/rng.hpp"
#include "crsched/sim.hpp"

namespace crsched::recipes {

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"targets-active", "targets-inactive", "policy-compare", "dp-oracle", "formula-check",
                                          "v-sweep"};
  return n;
}

// The reference scenario needs lambda <= ~2e-4 to be stable at P_max
// (about 170 slots per packet), so its sweeps live in that range.
inline constexpr double kReferenceLambda = 1e-4;

inline std::vector<double> reference_lambdas() { return {4e-5, 8e-5, 1.2e-4, 1.6e-4, 2e-4}; }

/// Reference scenario; `active` keeps d_5 = 40, otherwise every d_i = 29.
inline SimConfig targets(bool active, std::uint64_t seed) {
  auto c = reference_scenario(kReferenceLambda);
  if (!active) c.delay_target[4] = 29.0;
  c.seed = seed;
  return c;
}

inline SimConfig compare(std::uint64_t seed) {
  auto c = reference_scenario(kReferenceLambda);
  c.seed = seed;
  return c;
}

inline std::vector<PolicyKind> compare_policies() {
  return {PolicyKind::doac, PolicyKind::suboptimal, PolicyKind::csma, PolicyKind::cnc};
}

/// A scenario whose delay targets are reachable: the reference channels with
/// 100-bit packets (about 17 slots each). Y_i settles near V / lambda_i, which
/// takes a few million slots at V = 1000, hence the longer horizon.
inline SimConfig feasible(std::uint64_t seed) {
  auto c = reference_scenario(0.002);
  c.packet_bits = 100.0;
  c.delay_target = {60, 60, 60, 60, 45};
  c.horizon = 5'000'000;
  c.seed = seed;
  return c;
}

inline std::vector<double> feasible_lambdas() { return {0.001, 0.0015, 0.002}; }

inline std::vector<double> v_values() { return {10.0, 100.0, 1000.0}; }

// ---------------------------------------------------------------- formula check

/// Three users, fixed priority 1 > 2 > 3, everyone at P_max, total load ~0.49.
inline SimConfig formula(std::uint64_t seed) {
  SimConfig c;
  c.arrival_rate = {5e-4, 1e-3, 1.4e-3};
  c.delay_target = {1e9, 1e9, 1e9};
  c.data_gain_mean = {1.0, 1.0, 1.0};
  c.interf_gain_mean = {0.1, 0.1, 0.1};
  c.policy = PolicyKind::fixed;
  c.fixed_order = {0, 1, 2};
  c.fixed_power = {c.p_max, c.p_max, c.p_max};
  c.i_avg = kInf;
  c.seed = seed;
  return c;
}

struct FormulaCheck {
  std::vector<double> predicted;
  std::vector<double> measured;
  std::vector<double> rel_error;
  double total_load = 0.0;
  double max_rel_error = 0.0;
  double seconds = 0.0;
};

/// Fixed-plan simulation against waiting_time() for every priority class.
inline FormulaCheck formula_check(const SimConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  FormulaCheck out;
  const std::size_t n = c.users();
  std::vector<ResidualTerm> residual;
  double prefix = 0.0;
  out.predicted.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t u = c.fixed_order[pos];
    const UserParams user{c.arrival_rate[u], c.delay_target[u], c.packet_bits, 0.0, c.p_max};
    const auto stats = ChannelStats::make(c.data_gain_mean[u], c.interf_gain_mean[u], c.gain_family, c.gain_cap_factor);
    const double mu = service_rate_mu(user, stats, c.fixed_power[u]);
    const double rho = user.arrival_rate / mu;
    residual.push_back({user.arrival_rate, service_moments(user, stats, c.fixed_power[u], c.mc).second});
    out.predicted[u] = waiting_time({mu, rho, prefix}, residual_time(residual));
    prefix += rho;
  }
  out.total_load = prefix;
  const auto m = run(c);
  out.measured = m.mean_delay;
  for (std::size_t i = 0; i < n; ++i) {
    out.rel_error.push_back(std::abs(out.measured[i] - out.predicted[i]) / out.predicted[i]);
    out.max_rel_error = std::max(out.max_rel_error, out.rel_error.back());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------- DP oracle

struct OracleSuite {
  std::size_t cases = 0;
  std::size_t objective_mismatches = 0;  // Psi* differs from the brute-force minimum
  std::size_t plan_differences = 0;      // different plan, same objective (a tie)
  std::size_t plan_mismatches = 0;       // different plan whose own objective is not the minimum
  double max_rel_gap = 0.0;
  std::size_t max_labels = 0;
  double seconds = 0.0;
};

/// Frame model on the reference channels for users 1..n with a grid of m
/// levels. Arrival rates are scaled so the load at P_max is about 0.7, which
/// makes stability bind for low-power prefixes.
inline FrameModel oracle_model(std::size_t n, std::size_t m) {
  auto c = reference_scenario(1.0);
  c.arrival_rate.resize(n);
  c.delay_target.resize(n);
  c.data_gain_mean.resize(n);
  c.interf_gain_mean.resize(n);
  const double weight = static_cast<double>(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i) c.arrival_rate[i] = 0.7 * static_cast<double>(i + 1) / (weight * 170.0);
  c.grid_points = m;
  c.mc.draw_budget = 200'000;
  return make_setup(c, kInf)->model;
}

/// Random (Y, X) states. Some trials zero X or a few Y_i so that the
/// tie-breaking rules are exercised.
inline PsiWeights random_weights(Rng& g, std::size_t n) {
  PsiWeights w;
  const double kind = uniform_open(g);
  for (std::size_t i = 0; i < n; ++i) {
    double y = std::exp(std::log(1e5) * uniform_open(g));
    if (kind < 0.1 || (kind < 0.3 && uniform_open(g) < 0.4)) y = 0.0;
    w.delay_debt.push_back(y);
  }
  w.interference_debt = kind > 0.85 ? 0.0 : std::exp(std::log(1e3) * uniform_open(g)) - 1.0;
  return w;
}

inline OracleSuite dp_oracle_suite(std::uint64_t seed, std::size_t trials = 100,
                                   std::vector<std::size_t> users = {2, 3, 4}, std::vector<std::size_t> levels = {5, 10},
                                   DpMode mode = DpMode::pareto) {
  OracleSuite s;
  std::vector<FrameModel> models;
  for (auto n : users)
    for (auto m : levels) models.push_back(oracle_model(n, m));
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t k = 0;
  for (auto n : users)
    for (auto m : levels) {
      const auto& model = models[k++];
      Rng g(derive_seed(seed, {n, m}));
      for (std::size_t t = 0; t < trials; ++t) {
        const auto w = random_weights(g, n);
        std::vector<DpRow> table;
        const auto plan = solve_frame(model, w, mode, &table);
        const auto best = oracle::exhaustive_search(model, w);
        ++s.cases;
        for (const auto& row : table) s.max_labels = std::max(s.max_labels, row.labels);
        if (plan.objective != best.objective) {
          ++s.objective_mismatches;
          s.max_rel_gap = std::max(s.max_rel_gap, (plan.objective - best.objective) / std::max(1e-300, best.objective));
        }
        if (plan.order != best.order || plan.level != best.level) {
          if (evaluate_plan(model, w, plan.order, plan.level) == best.objective) ++s.plan_differences;
          else ++s.plan_mismatches;
        }
      }
    }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

}  // namespace crsched::recipes
