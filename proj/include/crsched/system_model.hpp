#pragma once

// Users, block-fading channels, rate adaptation and per-user queue dynamics
// of the slotted uplink.

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "crsched/errors.hpp"
#include "crsched/rng.hpp"

namespace crsched {

enum class GainFamily { Exponential, Degenerate };

inline std::string to_string(GainFamily f) {
  return f == GainFamily::Exponential ? "exponential" : "degenerate";
}

// One fading law: a family, its mean and a truncation cap.
struct GainLaw {
  GainFamily family = GainFamily::Exponential;
  double mean = 1.0;
  double cap = 40.0;

  static GainLaw make(GainFamily family, double mean, double cap_factor = 40.0) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("gain mean must be positive and finite");
    if (family == GainFamily::Degenerate) return {family, mean, mean};
    if (!(cap_factor >= 1.0)) throw ConfigError("gain cap must not be below the mean");
    return {family, mean, cap_factor * mean};
  }

  // Probability mass of the untruncated law lying below the cap.
  double retained_mass() const { return -std::expm1(-cap / mean); }

  template <class Urbg>
  double sample(Urbg& g) const {
    if (family == GainFamily::Degenerate) return mean;
    // Inverse CDF of the exponential truncated to (0, cap].
    const double u = uniform_open(g);
    const double x = -mean * std::log1p(-retained_mass() * u);
    return std::min(x, cap);
  }

  friend auto operator<=>(const GainLaw&, const GainLaw&) = default;
};

// Data-channel (to the base station) and interference-channel (to the PU) laws of one SU.
struct ChannelStats {
  GainLaw data;
  GainLaw interference;

  static ChannelStats make(double mean_data_gain, double mean_interf_gain,
                           GainFamily family = GainFamily::Exponential, double cap_factor = 40.0) {
    return {GainLaw::make(family, mean_data_gain, cap_factor),
            GainLaw::make(family, mean_interf_gain, cap_factor)};
  }
};

struct GainDraw {
  double data = 0.0;          // gamma
  double interference = 0.0;  // g
};

// One independent (gamma, g) draw for a slot.
template <class Urbg>
GainDraw sample_gains(const ChannelStats& stats, Urbg& g) {
  GainDraw d;
  d.data = stats.data.sample(g);
  d.interference = stats.interference.sample(g);
  return d;
}

struct UserParams {
  double arrival_rate = 0.0;   // Bernoulli parameter, packets/slot
  double delay_target = 1.0;   // slots
  double packet_bits = 1000.0;
  double p_min = 0.0;
  double p_max = 100.0;

  void validate() const {
    if (!(arrival_rate >= 0.0 && arrival_rate <= 1.0)) throw ConfigError("arrival rate must lie in [0, 1]");
    if (!(delay_target > 0.0)) throw ConfigError("delay target must be positive");
    if (!(packet_bits > 0.0)) throw ConfigError("packet size must be positive");
    if (!(p_min >= 0.0 && p_max > 0.0 && p_min <= p_max)) throw ConfigError("power bounds must satisfy 0 <= P_min <= P_max");
  }
};

/// Bits delivered in one slot at transmit power `power` over gain `gain`: log2(1 + P*gain).
inline double rate(double power, double gain) {
  const double snr = power * gain;
  if (snr < 0.0 || std::isnan(snr)) throw std::domain_error("rate: negative SNR");
  return std::log2(1.0 + snr);
}

inline double max_rate(double p_max, const GainLaw& data) { return rate(p_max, data.cap); }

namespace detail {

// 2048-point Gauss-Legendre rule on [-1, 1], computed once.
struct LegendreRule {
  std::vector<double> nodes, weights;
  LegendreRule() {
    constexpr std::size_t n = 2048;
    std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)> table(
        gsl_integration_glfixed_table_alloc(n), gsl_integration_glfixed_table_free);
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &nodes[i], &weights[i], table.get());
  }
};

inline const LegendreRule& legendre_rule() {
  static const LegendreRule rule;
  return rule;
}

}  // namespace detail

/// E[log2(1 + P*gamma)] under the (truncated) data-gain law, by fixed quadrature.
inline double expected_rate(const GainLaw& law, double power) {
  if (law.family == GainFamily::Degenerate) return rate(power, law.mean);
  const auto& rule = detail::legendre_rule();
  const double half = 0.5 * law.cap;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = half * (rule.nodes[i] + 1.0);
    acc += rule.weights[i] * rate(power, x) * std::exp(-x / law.mean);
  }
  return acc * half / (law.mean * law.retained_mass());
}

/// mu_i(P) = E[R_i(P)] / L, packets per slot.
inline double service_rate_mu(const UserParams& user, const ChannelStats& stats, double power) {
  return expected_rate(stats.data, power) / user.packet_bits;
}

struct ServiceMoments {
  double mean = 0.0;    // E[s], slots
  double second = 0.0;  // E[s^2], slots^2
  std::size_t packets = 0;
};

struct MonteCarloSettings {
  std::size_t packets = 100000;         // upper bound on simulated packets per power point
  std::size_t draw_budget = 1000000;    // per-point cap on simulated slots
  std::size_t min_packets = 1000;
  std::uint64_t seed = 0x5eed;
  double max_mean_service = 1.0e6;      // slots; beyond this the power point is rejected

  friend auto operator<=>(const MonteCarloSettings&, const MonteCarloSettings&) = default;
};

// Raised by service_moments when the power point cannot deliver a packet in
// reasonable time.
struct ServiceTooSlow : std::domain_error {
  using std::domain_error::domain_error;
};

namespace detail {

inline std::uint64_t law_tag(const GainLaw& law, double packet_bits) {
  std::uint64_t a, b, c;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&a, &law.mean, sizeof a);
  std::memcpy(&b, &law.cap, sizeof b);
  std::memcpy(&c, &packet_bits, sizeof c);
  return derive_seed(static_cast<std::uint64_t>(law.family), {a, b, c});
}

inline ServiceMoments simulate_service(const GainLaw& law, double packet_bits, double power,
                                       const MonteCarloSettings& mc, std::size_t packets) {
  // Each packet owns a stream keyed by (law, L, packet index), so every power
  // level sees the same gain sequence for a given packet.
  const std::uint64_t base = derive_seed(mc.seed, {law_tag(law, packet_bits)});
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < packets; ++k) {
    SplitMix64 g(derive_seed(base, {k}));
    double remaining = packet_bits;
    double slots = 0.0;
    while (remaining > 0.0) {
      remaining -= std::min(rate(power, law.sample(g)), remaining);
      slots += 1.0;
    }
    sum += slots;
    sum_sq += slots * slots;
  }
  const double n = static_cast<double>(packets);
  return {sum / n, sum_sq / n, packets};
}

using MomentKey = std::tuple<GainLaw, double, double, MonteCarloSettings>;

struct MomentCache {
  std::mutex mutex;
  std::map<MomentKey, ServiceMoments> entries;
};

inline MomentCache& moment_cache() {
  static MomentCache cache;
  return cache;
}

}  // namespace detail

/// First and second moments of the number of slots needed to push L bits
/// through i.i.d. per-slot rates log2(1 + P*gamma). Seeded Monte Carlo,
/// memoised process-wide; thread-safe.
inline ServiceMoments service_moments(const UserParams& user, const ChannelStats& stats, double power,
                                      const MonteCarloSettings& mc = {}) {
  const double mean_rate = expected_rate(stats.data, power);
  const double rough_mean = user.packet_bits / mean_rate;
  if (!(mean_rate > 0.0) || rough_mean > mc.max_mean_service)
    throw ServiceTooSlow("service_moments: mean service time exceeds the configured cap");

  const detail::MomentKey key{stats.data, user.packet_bits, power, mc};
  auto& cache = detail::moment_cache();
  {
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  }
  ServiceMoments m;
  if (stats.data.family == GainFamily::Degenerate) {
    m = detail::simulate_service(stats.data, user.packet_bits, power, mc, 1);
  } else {
    const auto per_packet = static_cast<std::size_t>(std::ceil(rough_mean)) + 1;
    const std::size_t packets = std::clamp(mc.draw_budget / per_packet, std::min(mc.min_packets, mc.packets), mc.packets);
    m = detail::simulate_service(stats.data, user.packet_bits, power, mc, packets);
  }
  std::lock_guard lock(cache.mutex);
  cache.entries.emplace(key, m);
  return m;
}

struct Completion {
  std::int64_t arrival_slot = 0;
  std::int64_t delay = 0;  // slots, >= 1
};

// Per-SU buffer with a preemptive-resume head-of-line packet.
class UserQueueState {
 public:
  UserQueueState() = default;
  explicit UserQueueState(double packet_bits) : packet_bits_(packet_bits) {}

  std::size_t queue_length() const noexcept { return arrivals_.size(); }
  double hol_remaining() const noexcept { return hol_remaining_; }
  double packet_bits() const noexcept { return packet_bits_; }
  bool empty() const noexcept { return arrivals_.empty(); }
  const std::deque<std::int64_t>& arrival_slots() const noexcept { return arrivals_; }

  void enqueue(std::size_t count, std::int64_t now) {
    if (count > 0 && arrivals_.empty()) hol_remaining_ = packet_bits_;
    for (std::size_t i = 0; i < count; ++i) arrivals_.push_back(now);
  }

  // Deliver `bits` of the HOL packet in slot `now`; returns the finished packet, if any.
  std::optional<Completion> serve(double bits, std::int64_t now) {
    if (bits < 0.0 || bits > hol_remaining_) throw ContractViolation("serve: bits exceed the HOL remainder");
    if (bits == 0.0) return std::nullopt;
    hol_remaining_ -= bits;
    if (hol_remaining_ > 0.0) return std::nullopt;
    Completion done{arrivals_.front(), now - arrivals_.front() + 1};
    arrivals_.pop_front();
    hol_remaining_ = arrivals_.empty() ? 0.0 : packet_bits_;
    return done;
  }

 private:
  double packet_bits_ = 1000.0;
  double hol_remaining_ = 0.0;
  std::deque<std::int64_t> arrivals_;
};

struct StepResult {
  std::optional<Completion> completed;
};

/// One slot of a single SU's buffer: arrivals first, then `served_bits` of service.
inline StepResult step_queue(UserQueueState& state, std::size_t arrivals, double served_bits, std::int64_t now) {
  state.enqueue(arrivals, now);
  return {state.serve(served_bits, now)};
}

}  // namespace crsched
