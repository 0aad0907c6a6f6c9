#pragma once

// Per-frame delay-debt queues Y_i(k), the interference-debt queue X(k), the
// auxiliary r_i(k) choice and mean-rate-stability diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "crsched/errors.hpp"

namespace crsched {

struct VirtualQueueState {
  std::vector<double> delay_debt;  // Y_i(k)
  double interference_debt = 0.0;  // X(k)
  std::int64_t frame = 0;          // k

  static VirtualQueueState zero(std::size_t users) { return {std::vector<double>(users, 0.0), 0.0, 0}; }
};

// What happened during one frame. A frame is the idle period that precedes it
// plus the busy period it ends with; packets that arrive in the frame also
// finish in it, so the delay sums are final when the frame closes.
struct FrameLedger {
  std::vector<double> delay_sum;          // sum of W over packets arriving in the frame
  std::vector<std::int64_t> arrivals;     // |A_i(k)|
  double interference = 0.0;              // sum over slots of P g
  std::int64_t idle_slots = 0;
  std::int64_t busy_slots = 0;

  explicit FrameLedger(std::size_t users = 0) : delay_sum(users, 0.0), arrivals(users, 0) {}

  std::int64_t length() const noexcept { return idle_slots + busy_slots; }
};

// Delay-target side of the user description needed by the r update.
struct DelayConstraint {
  double arrival_rate = 0.0;
  double delay_target = 0.0;
};

/// Y_i(k+1) = (Y_i(k) + sum_{j in A_i(k)} (W_i^(j) - r_i(k)))^+.
inline VirtualQueueState update_Y(VirtualQueueState state, const FrameLedger& ledger, std::span<const double> r) {
  if (ledger.delay_sum.size() != state.delay_debt.size() || r.size() != state.delay_debt.size())
    throw ContractViolation("update_Y: size mismatch");
  for (std::size_t i = 0; i < state.delay_debt.size(); ++i) {
    const double credit = static_cast<double>(ledger.arrivals[i]) * r[i];
    state.delay_debt[i] = std::max(0.0, state.delay_debt[i] + ledger.delay_sum[i] - credit);
  }
  return state;
}

/// X(k+1) = (X(k) + sum_t P^(t) g^(t) - I_avg T_k)^+.
inline VirtualQueueState update_X(VirtualQueueState state, const FrameLedger& ledger, double interference_budget) {
  if (std::isinf(interference_budget)) {
    state.interference_debt = 0.0;
    return state;
  }
  const double budget = interference_budget * static_cast<double>(ledger.length());
  state.interference_debt = std::max(0.0, state.interference_debt + ledger.interference - budget);
  return state;
}

/// r_i = d_i when V < Y_i lambda_i, else 0.
inline std::vector<double> choose_r(const VirtualQueueState& state, double v, std::span<const DelayConstraint> users) {
  std::vector<double> r(users.size(), 0.0);
  for (std::size_t i = 0; i < users.size(); ++i)
    if (v < state.delay_debt[i] * users[i].arrival_rate) r[i] = users[i].delay_target;
  return r;
}

/// Close frame k: both queue updates with the frame's r, then k <- k + 1.
inline VirtualQueueState close_frame(const VirtualQueueState& state, const FrameLedger& ledger,
                                     std::span<const double> r, double interference_budget) {
  auto next = update_X(update_Y(state, ledger, r), ledger, interference_budget);
  ++next.frame;
  return next;
}

// Single-run surrogate of E[Z(K)]/K and its trend.
struct StabilityReport {
  double final_ratio = 0.0;       // Z(K)/K
  double midpoint_ratio = 0.0;    // Z(K/2)/(K/2)
  double late_slope = 0.0;        // least-squares slope of Z(k)/k over the last half, per frame
  bool decreasing = false;        // final ratio below the midpoint ratio, or the whole tail identically zero
};

/// `history[k]` is Z(k); history[0] = Z(0).
inline StabilityReport stability_diagnostic(std::span<const double> history) {
  if (history.size() < 3) throw ContractViolation("stability_diagnostic: need at least two frames");
  const std::size_t last = history.size() - 1;
  const std::size_t mid = std::max<std::size_t>(1, last / 2);
  StabilityReport rep;
  auto ratio = [&](std::size_t k) { return history[k] / static_cast<double>(k); };
  rep.final_ratio = ratio(last);
  rep.midpoint_ratio = ratio(mid);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  bool all_zero = true;
  for (std::size_t k = mid; k <= last; ++k) {
    const double x = static_cast<double>(k), y = ratio(k);
    all_zero = all_zero && y == 0.0;
    sx += x; sy += y; sxx += x * x; sxy += x * y; n += 1;
  }
  const double den = n * sxx - sx * sx;
  rep.late_slope = den > 0 ? (n * sxy - sx * sy) / den : 0.0;
  rep.decreasing = all_zero || rep.final_ratio < rep.midpoint_ratio;
  return rep;
}

}  // namespace crsched
