#pragma once

// YAML configuration: every SimConfig field under a flat key, plus
// `key=value` overrides in the same syntax.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crsched/errors.hpp"
#include "crsched/sim.hpp"

namespace crsched {

/// Defaults when a config file says nothing: the reference scenario at lambda = 1e-4.
inline SimConfig default_config() { return reference_scenario(1e-4); }

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "horizon",      "seed",           "policy",          "packet_bits",     "p_max",          "p_floor",
      "V",            "i_avg",          "pilot_fraction",  "pilot_seed",      "pilot_horizon",  "grid_points",
      "mc_packets",   "mc_draw_budget", "mc_min_packets",  "mc_seed",         "mc_max_mean_service",
      "burn_in",      "max_frame_slots", "arrival_rate",   "lambda",          "delay_target",   "data_gain_mean",
      "interf_gain_mean", "gain_family", "gain_cap_factor", "suboptimal_scale", "fixed_order",  "fixed_power",
      "record_slots"};
  return keys;
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value");
  }
}

inline double number(const YAML::Node& n, const std::string& key) {
  const auto s = scalar<std::string>(n, key);
  if (s == "inf" || s == ".inf" || s == "infinity") return kInf;
  return scalar<double>(n, key);
}

template <class T>
std::vector<T> list(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError("config key '" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& e : n) out.push_back(scalar<T>(e, key));
  return out;
}

inline GainFamily parse_family(const std::string& s) {
  if (s == "exponential") return GainFamily::Exponential;
  if (s == "degenerate") return GainFamily::Degenerate;
  throw ConfigError("unknown gain_family '" + s + "'");
}

}  // namespace detail

/// Fields present in `root` override `base`. Unknown keys are errors.
inline SimConfig from_yaml(const YAML::Node& root, SimConfig c = default_config()) {
  using namespace detail;
  if (!root || root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  auto has = [&](const char* k) { return static_cast<bool>(root[k]); };
  auto num = [&](const char* k) { return number(root[k], k); };

  if (has("horizon")) c.horizon = scalar<std::int64_t>(root["horizon"], "horizon");
  if (has("seed")) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (has("policy")) c.policy = parse_policy(scalar<std::string>(root["policy"], "policy"));
  if (has("packet_bits")) c.packet_bits = num("packet_bits");
  if (has("p_max")) c.p_max = num("p_max");
  if (has("p_floor")) c.p_floor = num("p_floor");
  if (has("V")) c.v = num("V");
  if (has("i_avg")) {
    const auto s = scalar<std::string>(root["i_avg"], "i_avg");
    if (s == "auto") c.i_avg.reset();
    else c.i_avg = num("i_avg");
  }
  if (has("pilot_fraction")) c.pilot_fraction = num("pilot_fraction");
  if (has("pilot_seed")) c.pilot_seed = scalar<std::uint64_t>(root["pilot_seed"], "pilot_seed");
  if (has("pilot_horizon")) c.pilot_horizon = scalar<std::int64_t>(root["pilot_horizon"], "pilot_horizon");
  if (has("grid_points")) c.grid_points = scalar<std::size_t>(root["grid_points"], "grid_points");
  if (has("mc_packets")) c.mc.packets = scalar<std::size_t>(root["mc_packets"], "mc_packets");
  if (has("mc_draw_budget")) c.mc.draw_budget = scalar<std::size_t>(root["mc_draw_budget"], "mc_draw_budget");
  if (has("mc_min_packets")) c.mc.min_packets = scalar<std::size_t>(root["mc_min_packets"], "mc_min_packets");
  if (has("mc_seed")) c.mc.seed = scalar<std::uint64_t>(root["mc_seed"], "mc_seed");
  if (has("mc_max_mean_service")) c.mc.max_mean_service = num("mc_max_mean_service");
  if (has("burn_in")) c.burn_in = num("burn_in");
  if (has("max_frame_slots")) c.max_frame_slots = scalar<std::int64_t>(root["max_frame_slots"], "max_frame_slots");
  if (has("delay_target")) c.delay_target = list<double>(root["delay_target"], "delay_target");
  if (has("data_gain_mean")) c.data_gain_mean = list<double>(root["data_gain_mean"], "data_gain_mean");
  if (has("interf_gain_mean")) c.interf_gain_mean = list<double>(root["interf_gain_mean"], "interf_gain_mean");
  if (has("arrival_rate")) c.arrival_rate = list<double>(root["arrival_rate"], "arrival_rate");
  if (has("lambda")) {
    if (has("arrival_rate")) throw ConfigError("give either lambda or arrival_rate, not both");
    const double lambda = num("lambda");
    c.arrival_rate.resize(c.delay_target.size());
    for (std::size_t i = 0; i < c.arrival_rate.size(); ++i) c.arrival_rate[i] = static_cast<double>(i + 1) * lambda;
  }
  if (has("gain_family")) c.gain_family = parse_family(scalar<std::string>(root["gain_family"], "gain_family"));
  if (has("gain_cap_factor")) c.gain_cap_factor = num("gain_cap_factor");
  if (has("suboptimal_scale")) c.suboptimal_scale = num("suboptimal_scale");
  if (has("fixed_order")) c.fixed_order = list<std::size_t>(root["fixed_order"], "fixed_order");
  if (has("fixed_power")) c.fixed_power = list<double>(root["fixed_power"], "fixed_power");
  if (has("record_slots")) c.record_slots = scalar<bool>(root["record_slots"], "record_slots");
  return c;
}

/// Applies `key=value` to a YAML map; the value is parsed as YAML (so `[1,2]` is a list).
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const auto key = assignment.substr(0, eq);
  if (!detail::known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  try {
    root[key] = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
}

inline YAML::Node load_yaml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    auto node = YAML::Load(in);
    return node.IsNull() ? YAML::Node(YAML::NodeType::Map) : node;
  } catch (const YAML::Exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

inline SimConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  YAML::Node root = path.empty() ? YAML::Node(YAML::NodeType::Map) : load_yaml_file(path);
  for (const auto& o : overrides) apply_override(root, o);
  auto c = from_yaml(root);
  c.validate();
  return c;
}

/// Fully resolved configuration as YAML. `budget` (if finite or given) is
/// written as the i_avg actually used.
inline std::string to_yaml(const SimConfig& c, std::optional<double> budget = std::nullopt) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto seq = [&](const char* key, const auto& v) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& x : v) out << x;
    out << YAML::EndSeq;
  };
  auto real = [&](const char* key, double v) {
    out << YAML::Key << key << YAML::Value;
    if (std::isinf(v)) out << "inf";
    else out << v;
  };
  out << YAML::BeginMap;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "policy" << YAML::Value << to_string(c.policy);
  real("packet_bits", c.packet_bits);
  real("p_max", c.p_max);
  real("p_floor", c.p_floor);
  real("V", c.v);
  if (budget) real("i_avg", *budget);
  else if (c.i_avg) real("i_avg", *c.i_avg);
  else out << YAML::Key << "i_avg" << YAML::Value << "auto";
  real("pilot_fraction", c.pilot_fraction);
  out << YAML::Key << "pilot_seed" << YAML::Value << c.pilot_seed;
  out << YAML::Key << "pilot_horizon" << YAML::Value << c.pilot_horizon;
  out << YAML::Key << "grid_points" << YAML::Value << c.grid_points;
  out << YAML::Key << "mc_packets" << YAML::Value << c.mc.packets;
  out << YAML::Key << "mc_draw_budget" << YAML::Value << c.mc.draw_budget;
  out << YAML::Key << "mc_min_packets" << YAML::Value << c.mc.min_packets;
  out << YAML::Key << "mc_seed" << YAML::Value << c.mc.seed;
  real("mc_max_mean_service", c.mc.max_mean_service);
  real("burn_in", c.burn_in);
  out << YAML::Key << "max_frame_slots" << YAML::Value << c.max_frame_slots;
  seq("arrival_rate", c.arrival_rate);
  seq("delay_target", c.delay_target);
  seq("data_gain_mean", c.data_gain_mean);
  seq("interf_gain_mean", c.interf_gain_mean);
  out << YAML::Key << "gain_family" << YAML::Value << to_string(c.gain_family);
  real("gain_cap_factor", c.gain_cap_factor);
  real("suboptimal_scale", c.suboptimal_scale);
  if (c.policy == PolicyKind::fixed) {
    seq("fixed_order", c.fixed_order);
    seq("fixed_power", c.fixed_power);
  }
  out << YAML::Key << "record_slots" << YAML::Value << c.record_slots;
  out << YAML::EndMap;
  return out.c_str();
}

/// `text` with every line prefixed by "# ", for CSV headers.
inline std::string comment_block(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) out += "# " + line + "\n";
  return out;
}

}  // namespace crsched
