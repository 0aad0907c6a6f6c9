#pragma once

// Mean time in system under preemptive-resume priority scheduling (M/G/1
// light-traffic model of the slotted system).

#include <cmath>
#include <limits>
#include <span>

#include "crsched/errors.hpp"

namespace crsched {

// One user's contribution to the residual time: arrival rate and E[s^2].
struct ResidualTerm {
  double arrival_rate = 0.0;
  double service_second_moment = 0.0;
};

/// T^R of priority class j: sum over classes 1..j of lambda_l E[s_l^2] / 2.
/// Accumulated in priority order.
inline double residual_time(std::span<const ResidualTerm> prefix) {
  double acc = 0.0;
  for (const auto& t : prefix) acc += 0.5 * t.arrival_rate * t.service_second_moment;
  return acc;
}

// Load seen by the class at priority j.
struct ClassLoad {
  double service_rate = 0.0;  // mu(P), packets/slot
  double utilization = 0.0;   // rho(P) = lambda / mu(P)
  double prefix_load = 0.0;   // summed utilization of classes 1..j-1
};

namespace detail {

inline double priority_delay(const ClassLoad& c, double residual) noexcept {
  const double upper_free = 1.0 - c.prefix_load;
  const double free = upper_free - c.utilization;
  if (!(free > 0.0) || !(c.service_rate > 0.0)) return std::numeric_limits<double>::infinity();
  return (1.0 / c.service_rate + residual / free) / upper_free;
}

}  // namespace detail

/// Mean time in system of the class at priority j, given the exact load of the
/// higher-priority classes. +inf outside the stability region.
inline double waiting_time_or_inf(const ClassLoad& c, double residual) noexcept {
  return detail::priority_delay(c, residual);
}

/// As waiting_time_or_inf, throwing UnstableError when 1 - prefix - rho <= 0.
inline double waiting_time(const ClassLoad& c, double residual) {
  const double w = detail::priority_delay(c, residual);
  if (std::isinf(w)) throw UnstableError("waiting_time: priority class outside the stability region");
  return w;
}

/// Decoupled bound W^up: same form with the prefix load replaced by the load
/// the prefix carries at its own psi-minimising powers.
inline double waiting_time_upper_or_inf(double service_rate, double utilization, double decoupled_prefix_load,
                                        double residual) noexcept {
  return detail::priority_delay({service_rate, utilization, decoupled_prefix_load}, residual);
}

inline double waiting_time_upper(double service_rate, double utilization, double decoupled_prefix_load,
                                 double residual) {
  const double w = waiting_time_upper_or_inf(service_rate, utilization, decoupled_prefix_load, residual);
  if (std::isinf(w)) throw UnstableError("waiting_time_upper: priority class outside the stability region");
  return w;
}

}  // namespace crsched
