#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "crsched/config.hpp"
#include "crsched/output.hpp"

using namespace crsched;

namespace {

std::size_t count_lines(const std::string& s, bool comments) {
  std::istringstream in(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += (line.rfind("# ", 0) == 0) == comments;
  return n;
}

}  // namespace

TEST(Yaml, EmptyDocumentGivesDefaults) {
  const auto c = from_yaml(YAML::Load(""));
  EXPECT_EQ(c.arrival_rate, default_config().arrival_rate);
  EXPECT_EQ(c.v, 100.0);
  EXPECT_FALSE(c.i_avg);
}

TEST(Yaml, ParsesScalarsAndLists) {
  const auto c = from_yaml(YAML::Load(R"(
horizon: 5000
seed: 9
policy: cnc
V: 250
i_avg: 1.5
delay_target: [10, 20, 30, 40, 50]
gain_family: degenerate
)"));
  EXPECT_EQ(c.horizon, 5000);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.policy, PolicyKind::cnc);
  EXPECT_EQ(c.v, 250.0);
  EXPECT_EQ(*c.i_avg, 1.5);
  EXPECT_EQ(c.delay_target, (std::vector<double>{10, 20, 30, 40, 50}));
  EXPECT_EQ(c.gain_family, GainFamily::Degenerate);
}

TEST(Yaml, InterferenceBudgetKeywords) {
  EXPECT_FALSE(from_yaml(YAML::Load("i_avg: auto")).i_avg);
  EXPECT_TRUE(std::isinf(*from_yaml(YAML::Load("i_avg: inf")).i_avg));
}

TEST(Yaml, LambdaShorthand) {
  const auto c = from_yaml(YAML::Load("lambda: 0.001"));
  EXPECT_EQ(c.arrival_rate, (std::vector<double>{0.001, 0.002, 0.003, 0.004, 0.005}));
  EXPECT_THROW(from_yaml(YAML::Load("{lambda: 0.001, arrival_rate: [0.1]}")), ConfigError);
}

TEST(Yaml, Rejections) {
  EXPECT_THROW(from_yaml(YAML::Load("speed: 3")), ConfigError);
  EXPECT_THROW(from_yaml(YAML::Load("policy: magic")), ConfigError);
  EXPECT_THROW(from_yaml(YAML::Load("V: many")), ConfigError);
  EXPECT_THROW(from_yaml(YAML::Load("[1, 2]")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Overrides, ParsedAsYaml) {
  YAML::Node root(YAML::NodeType::Map);
  apply_override(root, "delay_target=[1,2,3,4,5]");
  apply_override(root, "V=10");
  const auto c = from_yaml(root);
  EXPECT_EQ(c.delay_target, (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.v, 10.0);
  EXPECT_THROW(apply_override(root, "V"), ConfigError);
  EXPECT_THROW(apply_override(root, "nope=1"), ConfigError);
}

TEST(Overrides, LoadConfigValidates) {
  EXPECT_NO_THROW(load_config("", {"horizon=10"}));
  EXPECT_THROW(load_config("", {"burn_in=0.7"}), ConfigError);
  EXPECT_THROW(load_config("", {"policy=fixed"}), ConfigError);
}

TEST(Yaml, RoundTrip) {
  auto c = from_yaml(YAML::Load("{policy: fixed, fixed_order: [4,3,2,1,0], fixed_power: [1,2,3,4,5], i_avg: 0.3}"));
  c.arrival_rate[2] = 1.0 / 3.0;
  const auto back = from_yaml(YAML::Load(to_yaml(c)));
  EXPECT_EQ(back.arrival_rate, c.arrival_rate);
  EXPECT_EQ(back.fixed_order, c.fixed_order);
  EXPECT_EQ(back.fixed_power, c.fixed_power);
  EXPECT_EQ(*back.i_avg, 0.3);
  EXPECT_EQ(back.policy, PolicyKind::fixed);
  EXPECT_EQ(back.mc, c.mc);
  EXPECT_EQ(to_yaml(back), to_yaml(c));

  const auto resolved = from_yaml(YAML::Load(to_yaml(default_config(), 2.5)));
  EXPECT_EQ(*resolved.i_avg, 2.5);
  EXPECT_TRUE(std::isinf(*from_yaml(YAML::Load(to_yaml(default_config(), kInf))).i_avg));
}

TEST(ConfigFiles, ShippedExamplesLoad) {
  for (const char* name : {"reference.yaml", "feasible.yaml", "formula.yaml"})
    EXPECT_NO_THROW(load_config(std::string(CRSCHED_CONFIG_DIR) + "/" + name)) << name;
}

TEST(Csv, CommentBlock) { EXPECT_EQ(comment_block("a: 1\nb: 2"), "# a: 1\n# b: 2\n"); }

TEST(Csv, Numbers) {
  EXPECT_EQ(fmt(0.5), "0.5");
  EXPECT_EQ(fmt(kInf), "inf");
  EXPECT_EQ(fmt(std::nan("")), "nan");
}

TEST(Csv, EmptySweepWritesHeaderOnly) {
  std::ostringstream a, b;
  write_plotdata_csv(a, "x: 1", {}, 5, "lambda");
  write_metrics_csv(b, "x: 1", {}, 5, "lambda");
  EXPECT_EQ(count_lines(a.str(), true), 1u);
  EXPECT_EQ(count_lines(a.str(), false), 1u);
  EXPECT_EQ(a.str(), "# x: 1\npolicy,lambda,seed,sum_delay,W_1,W_2,W_3,W_4,W_5,interference\n");
  EXPECT_EQ(count_lines(b.str(), false), 1u);
}

TEST(Csv, OneRowPerRunAndFailuresMarked) {
  auto c = default_config();
  c.horizon = 5000;
  c.i_avg = 1.0;
  const auto rows = sweep(c, {SweepAxis::lambda, {1e-4, 0.05}, {PolicyKind::doac}, 2, 1});
  std::ostringstream plot, metrics;
  write_plotdata_csv(plot, to_yaml(c), rows, 5, "lambda");
  write_metrics_csv(metrics, to_yaml(c), rows, 5, "lambda");
  EXPECT_EQ(count_lines(plot.str(), false), 1u + 2u);     // failed cells are left out
  EXPECT_EQ(count_lines(metrics.str(), false), 1u + 4u);  // and marked here
  EXPECT_NE(metrics.str().find("load below one"), std::string::npos);
  // Header round-trips through the YAML parser once the prefix is stripped.
  std::istringstream in(plot.str());
  std::string line, yaml;
  while (std::getline(in, line) && line.rfind("# ", 0) == 0) yaml += line.substr(2) + "\n";
  EXPECT_EQ(from_yaml(YAML::Load(yaml)).horizon, 5000);
}

TEST(Csv, TrajectoryHasOneRowPerFrame) {
  auto c = default_config();
  c.horizon = 20000;
  c.i_avg = 1.0;
  const auto m = run(c);
  std::ostringstream os;
  write_trajectory_csv(os, "", m);
  EXPECT_EQ(count_lines(os.str(), false), 1u + m.trajectory.size());
}
