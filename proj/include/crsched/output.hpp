#pragma once

// CSV emitters. Every file starts with the resolved configuration as a
// `# `-prefixed YAML block, so a file alone is enough to rerun it.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "crsched/config.hpp"
#include "crsched/doac.hpp"
#include "crsched/sim.hpp"

namespace crsched {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace detail {

inline std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

// Failure messages go into a quoted CSV cell.
inline std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace detail

inline void write_metrics_csv(std::ostream& os, const std::string& header, const std::vector<SweepRow>& rows,
                              std::size_t users, const std::string& axis) {
  os << comment_block(header);
  std::vector<std::string> cols{"policy", "axis", "value", "replication", "seed", "status", "i_avg", "interference",
                                "sum_delay"};
  for (std::size_t i = 1; i <= users; ++i) cols.push_back("W_" + std::to_string(i));
  for (std::size_t i = 1; i <= users; ++i) cols.push_back("measured_" + std::to_string(i));
  for (std::size_t i = 1; i <= users; ++i) cols.push_back("arrivals_" + std::to_string(i));
  for (std::size_t i = 1; i <= users; ++i) cols.push_back("completions_" + std::to_string(i));
  for (auto c : {"frames", "slots", "busy_slots", "p_min", "x_final", "invariant_violations"}) cols.push_back(c);
  os << detail::join(cols);
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::vector<std::string> cells{to_string(r.policy), axis, fmt(r.value), std::to_string(r.replication),
                                   std::to_string(r.seed), r.status == "ok" ? "ok" : detail::quoted(r.status)};
    if (r.status != "ok") {
      cells.resize(cols.size(), "");
      os << detail::join(cells);
      continue;
    }
    cells.push_back(fmt(m.interference_budget));
    cells.push_back(fmt(m.interference));
    cells.push_back(fmt(m.sum_delay));
    for (double w : m.mean_delay) cells.push_back(fmt(w));
    for (auto v : m.measured) cells.push_back(std::to_string(v));
    for (auto v : m.arrivals) cells.push_back(std::to_string(v));
    for (auto v : m.completions) cells.push_back(std::to_string(v));
    cells.push_back(std::to_string(m.frames));
    cells.push_back(std::to_string(m.slots));
    cells.push_back(std::to_string(m.busy_slots));
    cells.push_back(fmt(m.grid.levels.empty() ? 0.0 : m.grid.min()));
    cells.push_back(fmt(m.trajectory.empty() ? 0.0 : m.trajectory.back().x));
    cells.push_back(std::to_string(m.invariants.violations));
    os << detail::join(cells);
  }
}

inline void write_trajectory_csv(std::ostream& os, const std::string& header, const RunMetrics& m) {
  os << comment_block(header);
  const std::size_t n = m.mean_delay.size();
  std::vector<std::string> cols{"k", "T_k"};
  for (std::size_t i = 1; i <= n; ++i) cols.push_back("Y_" + std::to_string(i));
  cols.push_back("X");
  for (std::size_t i = 1; i <= n; ++i) cols.push_back("r_" + std::to_string(i));
  os << detail::join(cols);
  for (const auto& row : m.trajectory) {
    std::vector<std::string> cells{std::to_string(row.frame), std::to_string(row.length)};
    for (double y : row.y) cells.push_back(fmt(y));
    cells.push_back(fmt(row.x));
    for (double r : row.r) cells.push_back(fmt(r));
    os << detail::join(cells);
  }
}

inline void write_slots_csv(std::ostream& os, const std::string& header, const RunMetrics& m) {
  os << comment_block(header);
  os << "slot,frame,user,power,bits,interference\n";
  for (const auto& s : m.slot_trace)
    os << s.slot << ',' << s.frame << ',' << s.user << ',' << fmt(s.power) << ',' << fmt(s.bits) << ','
       << fmt(s.interference) << '\n';
}

/// One row per run: policy, swept value, seed, sum delay, W_i, interference.
inline void write_plotdata_csv(std::ostream& os, const std::string& header, const std::vector<SweepRow>& rows,
                               std::size_t users, const std::string& axis) {
  os << comment_block(header);
  std::vector<std::string> cols{"policy", axis, "seed", "sum_delay"};
  for (std::size_t i = 1; i <= users; ++i) cols.push_back("W_" + std::to_string(i));
  cols.push_back("interference");
  os << detail::join(cols);
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    std::vector<std::string> cells{to_string(r.policy), fmt(r.value), std::to_string(r.seed), fmt(r.metrics.sum_delay)};
    for (double w : r.metrics.mean_delay) cells.push_back(fmt(w));
    cells.push_back(fmt(r.metrics.interference));
    os << detail::join(cells);
  }
}

inline void write_dp_table_csv(std::ostream& os, const std::string& header, const std::vector<DpRow>& table) {
  os << comment_block(header);
  os << "stage,subset,objective,load,last,labels\n";
  for (const auto& r : table)
    os << r.stage << ',' << r.subset << ',' << fmt(r.objective) << ',' << fmt(r.load) << ',' << r.last << ','
       << r.labels << '\n';
}

template <class Writer>
void write_file(const std::string& path, Writer&& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  w(os);
}

}  // namespace crsched
