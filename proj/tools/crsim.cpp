// crsim: command-line driver for single runs, parameter sweeps, the named
// experiment recipes and the built-in self checks.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crsched/config.hpp"
#include "crsched/output.hpp"
#include "crsched/recipes.hpp"
#include "crsched/sim.hpp"

namespace fs = std::filesystem;
using namespace crsched;

namespace {

constexpr int kOk = 0, kConfigError = 1, kInfeasible = 2, kNonTermination = 3, kCheckFailed = 4;

fs::path output_root() {
  const char* env = std::getenv("CRSIM_OUT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

// <root>/<name>-seed<S>-<UTC timestamp>[-n]; never reuses an existing directory.
fs::path make_run_dir(const std::string& name, std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const auto base = output_root() / (name + "-seed" + std::to_string(seed) + "-" + stamp);
  fs::create_directories(base.parent_path());
  fs::path dir = base;
  for (int n = 1; !fs::create_directory(dir); ++n) dir = base.string() + "-" + std::to_string(n);
  return dir;
}

std::string header_for(const SimConfig& c, const std::string& title, double budget) {
  return title + "\n" + to_yaml(c, budget);
}

void write_run_outputs(const fs::path& dir, const SimConfig& c, const RunMetrics& m, const std::string& title) {
  const auto header = header_for(c, title, m.interference_budget);
  SweepRow row{0.0, c.policy, 0, c.seed, "ok", 0, m};
  write_file(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, header, {row}, c.users(), "none"); });
  write_file(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, header, m); });
  if (c.record_slots) write_file(dir / "slots.csv", [&](std::ostream& os) { write_slots_csv(os, header, m); });
}

void write_sweep_outputs(const fs::path& dir, const SimConfig& base, const std::vector<SweepRow>& rows,
                         SweepAxis axis, const std::string& title) {
  const auto header = title + "\n" + to_yaml(base);
  const auto name = to_string(axis);
  write_file(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, header, rows, base.users(), name); });
  write_file(dir / "plotdata.csv", [&](std::ostream& os) { write_plotdata_csv(os, header, rows, base.users(), name); });
}

void print_run(const RunMetrics& m, const SimConfig& c) {
  std::printf("policy %s  seed %llu  slots %lld  frames %lld\n", to_string(m.policy).c_str(),
              static_cast<unsigned long long>(m.seed), static_cast<long long>(m.slots), static_cast<long long>(m.frames));
  std::printf("I_avg %s  measured interference %s  P_min %s\n", fmt(m.interference_budget).c_str(),
              fmt(m.interference).c_str(), fmt(m.grid.min()).c_str());
  std::printf("%5s %10s %8s %10s %9s\n", "user", "lambda", "d", "W", "packets");
  for (std::size_t i = 0; i < m.mean_delay.size(); ++i)
    std::printf("%5zu %10.4g %8.4g %10.4g %9lld\n", i + 1, c.arrival_rate[i], c.delay_target[i], m.mean_delay[i],
                static_cast<long long>(m.measured[i]));
  std::printf("sum of mean delays %s\n", fmt(m.sum_delay).c_str());
  if (!m.invariants.ok()) std::printf("INVARIANT VIOLATIONS: %lld\n", static_cast<long long>(m.invariants.violations));
}

void print_sweep(const std::vector<SweepRow>& rows, SweepAxis axis) {
  std::printf("%12s %11s %4s %12s %12s %12s  status\n", to_string(axis).c_str(), "policy", "rep", "sum_delay",
              "interference", "i_avg");
  for (const auto& r : rows)
    std::printf("%12.6g %11s %4zu %12s %12s %12s  %s\n", r.value, to_string(r.policy).c_str(), r.replication,
                fmt(r.metrics.sum_delay).c_str(), fmt(r.metrics.interference).c_str(),
                fmt(r.metrics.interference_budget).c_str(), r.status.c_str());
}

std::vector<double> parse_values(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok == "inf" ? kInf : std::stod(tok));
  }
  return out;
}

std::vector<PolicyKind> parse_policies(const std::vector<std::string>& items) {
  std::vector<PolicyKind> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(parse_policy(tok));
  }
  return out;
}

int failed_cells(const std::vector<SweepRow>& rows) {
  int code = kOk;
  for (const auto& r : rows)
    if (r.exit_code != 0 && code == kOk) code = r.exit_code;
  return code;
}

// ---------------------------------------------------------------- recipes

struct RecipeOptions {
  std::uint64_t seed = 1;
  std::int64_t horizon = 0;
  std::size_t replications = 2;
  unsigned jobs = 1;
  std::vector<std::string> overrides;
};

SimConfig with_overrides(SimConfig c, const RecipeOptions& o) {
  YAML::Node root(YAML::NodeType::Map);
  for (const auto& s : o.overrides) apply_override(root, s);
  c = from_yaml(root, c);
  if (o.horizon > 0) c.horizon = o.horizon;
  c.validate();
  return c;
}

int recipe_targets(const std::string& name, const RecipeOptions& o) {
  const bool active = name == "targets-active";
  const auto c = with_overrides(recipes::targets(active, o.seed), o);
  const auto m = run(c);
  const auto dir = make_run_dir(name, o.seed);
  write_run_outputs(dir, c, m, "recipe " + name);
  print_run(m, c);
  const double bound = active ? 42.0 : 30.5;
  const bool pinned = m.mean_delay.back() <= bound;
  std::printf("W_5 = %s (bound %g): %s\n", fmt(m.mean_delay.back()).c_str(), bound, pinned ? "within" : "exceeded");
  std::printf("outputs: %s\n", dir.string().c_str());
  return kOk;
}

int recipe_compare(const RecipeOptions& o) {
  const auto base = with_overrides(recipes::compare(o.seed), o);
  SweepSpec spec{SweepAxis::lambda, recipes::reference_lambdas(), recipes::compare_policies(), o.replications, o.jobs};
  const auto rows = sweep(base, spec);
  const auto dir = make_run_dir("policy-compare", o.seed);
  write_sweep_outputs(dir, base, rows, spec.axis, "recipe policy-compare");
  print_sweep(rows, spec.axis);
  std::printf("outputs: %s\n", dir.string().c_str());
  return failed_cells(rows);
}

int recipe_v_sweep(const RecipeOptions& o) {
  auto base = with_overrides(recipes::feasible(o.seed), o);
  if (!base.i_avg) base.i_avg = resolve_interference_budget(base);
  SweepSpec spec{SweepAxis::v, recipes::v_values(), {PolicyKind::doac}, o.replications, o.jobs};
  const auto rows = sweep(base, spec);
  const auto dir = make_run_dir("v-sweep", o.seed);
  write_sweep_outputs(dir, base, rows, spec.axis, "recipe v-sweep");
  print_sweep(rows, spec.axis);
  for (const auto& r : rows) {
    if (r.status != "ok" || r.metrics.frames == 0) continue;
    std::printf("V=%g rep %zu  Y_i(K)/K:", r.value, r.replication);
    for (double y : r.metrics.trajectory.back().y) std::printf(" %.4g", y / static_cast<double>(r.metrics.frames));
    std::printf("\n");
  }
  std::printf("outputs: %s\n", dir.string().c_str());
  return failed_cells(rows);
}

bool report_oracle(const recipes::OracleSuite& s, const char* label) {
  std::printf("%s: %zu cases, %zu objective mismatches (max rel gap %.3g), %zu tie plans, %zu plan mismatches, "
              "max labels %zu, %.2f s\n",
              label, s.cases, s.objective_mismatches, s.max_rel_gap, s.plan_differences, s.plan_mismatches,
              s.max_labels, s.seconds);
  return s.objective_mismatches == 0 && s.plan_mismatches == 0;
}

int recipe_dp_oracle(const RecipeOptions& o) {
  const auto s = recipes::dp_oracle_suite(o.seed);
  const bool ok = report_oracle(s, "pareto DP");
  report_oracle(recipes::dp_oracle_suite(o.seed, 100, {2, 3, 4}, {5, 10}, DpMode::single_label), "single-label DP");

  // One subset table, for inspection.
  const auto model = recipes::oracle_model(4, 10);
  Rng g(o.seed);
  const auto w = recipes::random_weights(g, 4);
  std::vector<DpRow> table;
  solve_frame(model, w, DpMode::pareto, &table);
  const auto dir = make_run_dir("dp-oracle", o.seed);
  write_file(dir / "dp_table.csv", [&](std::ostream& os) {
    std::ostringstream h;
    h << "recipe dp-oracle: N=4, M=10, X=" << fmt(w.interference_debt) << ", Y=";
    for (double y : w.delay_debt) h << fmt(y) << ' ';
    write_dp_table_csv(os, h.str(), table);
  });
  std::printf("outputs: %s\n", dir.string().c_str());
  return ok ? kOk : kCheckFailed;
}

bool report_formula(const recipes::FormulaCheck& f) {
  std::printf("formula check: total load %.3f, %.2f s\n", f.total_load, f.seconds);
  std::printf("%5s %12s %12s %10s\n", "user", "predicted", "measured", "rel.err");
  for (std::size_t i = 0; i < f.predicted.size(); ++i)
    std::printf("%5zu %12.5g %12.5g %10.4f\n", i + 1, f.predicted[i], f.measured[i], f.rel_error[i]);
  return f.max_rel_error <= 0.10;
}

int recipe_formula(const RecipeOptions& o) {
  const auto c = with_overrides(recipes::formula(o.seed), o);
  const auto f = recipes::formula_check(c);
  const bool ok = report_formula(f);
  const auto m = run(c);
  const auto dir = make_run_dir("formula-check", o.seed);
  write_run_outputs(dir, c, m, "recipe formula-check");
  std::printf("outputs: %s\n", dir.string().c_str());
  return ok ? kOk : kCheckFailed;
}

int run_recipe(const std::string& name, const RecipeOptions& o) {
  if (name == "targets-active" || name == "targets-inactive") return recipe_targets(name, o);
  if (name == "policy-compare") return recipe_compare(o);
  if (name == "v-sweep") return recipe_v_sweep(o);
  if (name == "dp-oracle") return recipe_dp_oracle(o);
  if (name == "formula-check") return recipe_formula(o);
  throw ConfigError("unknown recipe '" + name + "'");
}

int selftest(std::uint64_t seed) {
  const bool dp = report_oracle(recipes::dp_oracle_suite(seed), "dp-oracle");
  const bool formula = report_formula(recipes::formula_check(recipes::formula(seed)));
  std::printf("dp-oracle: %s\nformula-check: %s\n", dp ? "PASS" : "FAIL", formula ? "PASS" : "FAIL");
  return dp && formula ? kOk : kCheckFailed;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "crsim: %s\n", e.what());
    const int code = exit_code_for(e);
    return code == 4 ? kCheckFailed : code;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-based uplink scheduling simulator (DOAC, suboptimal, CSMA, CNC)"};
  app.require_subcommand(1);
  app.footer("Outputs go to $CRSIM_OUT (default ./runs), one new directory per invocation.\n"
             "Exit codes: 0 ok, 1 config/usage error, 2 infeasible, 3 nontermination guard, 4 check failed.");

  std::string config_path;
  std::vector<std::string> overrides;
  bool slots = false;
  auto* run_cmd = app.add_subcommand("run", "single simulation run");
  run_cmd->add_option("--config", config_path, "YAML config file (missing keys take the defaults)")->check(CLI::ExistingFile);
  run_cmd->add_option("--set", overrides, "override a config key, key=value (repeatable)");
  run_cmd->add_flag("--slots", slots, "also write the per-slot trace slots.csv");

  std::string axis = "lambda";
  std::vector<std::string> values, policies;
  std::size_t seeds = 1;
  unsigned jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per (value, policy, seed)");
  sweep_cmd->add_option("--config", config_path, "YAML base config")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--set", overrides, "override a base config key, key=value (repeatable)");
  sweep_cmd->add_option("--axis", axis, "lambda | V | Iavg | policy")->capture_default_str();
  sweep_cmd->add_option("--values", values, "axis values, comma or space separated");
  sweep_cmd->add_option("--policies", policies, "doac,suboptimal,csma,cnc,fixed (default: config policy)");
  sweep_cmd->add_option("--seeds", seeds, "replications per cell; seeds derive from the base seed")->capture_default_str();
  sweep_cmd->add_option("--jobs", jobs, "parallel cells")->capture_default_str();

  std::string recipe_name;
  RecipeOptions ro;
  auto* recipe_cmd = app.add_subcommand("recipe", "named experiment");
  recipe_cmd->add_option("name", recipe_name, "targets-active | targets-inactive | policy-compare | dp-oracle | formula-check | v-sweep")
      ->required()
      ->check(CLI::IsMember(recipes::names()));
  recipe_cmd->add_option("--seed", ro.seed, "base seed")->capture_default_str();
  recipe_cmd->add_option("--horizon", ro.horizon, "override the horizon (slots)");
  recipe_cmd->add_option("--replications", ro.replications, "seeds per sweep cell")->capture_default_str();
  recipe_cmd->add_option("--jobs", ro.jobs, "parallel sweep cells")->capture_default_str();
  recipe_cmd->add_option("--set", ro.overrides, "override a recipe config key, key=value (repeatable)");

  std::uint64_t selftest_seed = 1;
  auto* selftest_cmd = app.add_subcommand("selftest", "DP-vs-brute-force and formula-vs-simulation checks");
  selftest_cmd->add_option("--seed", selftest_seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  if (*run_cmd)
    return guarded([&] {
      auto c = load_config(config_path, overrides);
      if (slots) c.record_slots = true;
      const auto m = run(c);
      const auto dir = make_run_dir("run", c.seed);
      write_run_outputs(dir, c, m, "crsim run");
      print_run(m, c);
      std::printf("outputs: %s\n", dir.string().c_str());
      return m.invariants.ok() ? kOk : kCheckFailed;
    });
  if (*sweep_cmd)
    return guarded([&] {
      const auto base = load_config(config_path, overrides);
      SweepSpec spec{parse_axis(axis), parse_values(values), parse_policies(policies), seeds, jobs};
      if (spec.axis != SweepAxis::policy && spec.values.empty()) throw ConfigError("--values is required for this axis");
      const auto rows = sweep(base, spec);
      const auto dir = make_run_dir("sweep-" + to_string(spec.axis), base.seed);
      write_sweep_outputs(dir, base, rows, spec.axis, "crsim sweep");
      print_sweep(rows, spec.axis);
      std::printf("outputs: %s\n", dir.string().c_str());
      return failed_cells(rows);
    });
  if (*recipe_cmd) return guarded([&] { return run_recipe(recipe_name, ro); });
  if (*selftest_cmd) return guarded([&] { return selftest(selftest_seed); });
  return kConfigError;
}
