#pragma once

// Slotted, frame-based simulation of the uplink under one scheduling policy.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crsched/doac.hpp"
#include "crsched/errors.hpp"
#include "crsched/heuristics.hpp"
#include "crsched/rng.hpp"
#include "crsched/system_model.hpp"
#include "crsched/virtual_queues.hpp"

namespace crsched {

struct SimConfig {
  std::int64_t horizon = 1'000'000;  // slots
  std::uint64_t seed = 1;
  PolicyKind policy = PolicyKind::doac;

  double packet_bits = 1000.0;
  double p_max = 100.0;
  double p_floor = 0.1;  // lower end of the base grid from which P_min is picked
  double v = 100.0;

  // Average interference budget. Unset means "calibrate by pilot run":
  // pilot_fraction times the interference DOAC causes with no budget.
  std::optional<double> i_avg;
  double pilot_fraction = 0.5;
  std::uint64_t pilot_seed = 1;
  std::int64_t pilot_horizon = 0;  // 0: same as horizon

  std::size_t grid_points = 50;
  MonteCarloSettings mc;
  double burn_in = 0.1;
  std::int64_t max_frame_slots = 0;  // busy slots per frame before giving up; 0: only the horizon bounds a frame

  std::vector<double> arrival_rate;
  std::vector<double> delay_target;
  std::vector<double> data_gain_mean;
  std::vector<double> interf_gain_mean;
  GainFamily gain_family = GainFamily::Exponential;
  double gain_cap_factor = 40.0;

  double suboptimal_scale = 1.0;  // X(k) > scale * Y_i(k) selects P_min

  // Static plan for PolicyKind::fixed.
  std::vector<std::size_t> fixed_order;
  std::vector<double> fixed_power;

  bool record_slots = false;

  std::size_t users() const noexcept { return arrival_rate.size(); }

  void validate() const {
    const std::size_t n = users();
    if (n == 0) throw ConfigError("at least one user is required");
    if (delay_target.size() != n || data_gain_mean.size() != n || interf_gain_mean.size() != n)
      throw ConfigError("per-user vectors must all have one entry per user");
    if (horizon < 1) throw ConfigError("horizon must be at least one slot");
    if (!(burn_in >= 0.0 && burn_in <= 0.5)) throw ConfigError("burn_in must lie in [0, 0.5]");
    if (!(packet_bits > 0.0)) throw ConfigError("packet_bits must be positive");
    if (!(p_max > 0.0) || !(p_floor > 0.0)) throw ConfigError("powers must be positive");
    if (!(v > 0.0)) throw ConfigError("V must be positive");
    if (i_avg && !(*i_avg >= 0.0)) throw ConfigError("i_avg must be non-negative");
    if (!(pilot_fraction > 0.0)) throw ConfigError("pilot_fraction must be positive");
    if (grid_points == 0) throw ConfigError("grid_points must be positive");
    if (max_frame_slots < 0) throw ConfigError("max_frame_slots must be non-negative");
    if (!(suboptimal_scale > 0.0)) throw ConfigError("suboptimal_scale must be positive");
    for (std::size_t i = 0; i < n; ++i) {
      UserParams{arrival_rate[i], delay_target[i], packet_bits, 0.0, p_max}.validate();
      ChannelStats::make(data_gain_mean[i], interf_gain_mean[i], gain_family, gain_cap_factor);
    }
    if (policy == PolicyKind::fixed) {
      auto sorted = fixed_order;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != i) throw ConfigError("fixed_order must be a permutation of 0..N-1");
      if (sorted.size() != n || fixed_power.size() != n) throw ConfigError("fixed policy needs fixed_order and fixed_power for every user");
      for (double p : fixed_power)
        if (!(p > 0.0 && p <= p_max)) throw ConfigError("fixed_power entries must lie in (0, p_max]");
    }
  }
};

/// Simulation defaults of the reference scenario: N = 5, L = 1000 bits,
/// P_max = 100, V = 100, unit-mean exponential data gains, interference gain
/// means 0.1 (users 1-4) and 0.4 (user 5), lambda_i = i * lambda.
inline SimConfig reference_scenario(double lambda) {
  SimConfig c;
  for (int i = 1; i <= 5; ++i) c.arrival_rate.push_back(i * lambda);
  c.delay_target = {29, 29, 29, 29, 40};
  c.data_gain_mean.assign(5, 1.0);
  c.interf_gain_mean = {0.1, 0.1, 0.1, 0.1, 0.4};
  return c;
}

// ---------------------------------------------------------------- setup

// Immutable per-run quantities shared by an engine and its shadow.
struct RunSetup {
  std::vector<UserParams> users;
  std::vector<ChannelStats> channels;
  std::vector<DelayConstraint> constraints;
  FrameModel model;
  double interference_budget = kInf;
  double v = 100.0;
  std::vector<std::int64_t> min_delay;  // ceil(L / R_max) per user
};

inline PowerGrid make_power_grid(const SimConfig& c, std::span<const UserParams> users,
                                 std::span<const ChannelStats> channels) {
  auto load = [&](double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < users.size(); ++i) s += users[i].arrival_rate / service_rate_mu(users[i], channels[i], p);
    return s;
  };
  return make_power_grid(c.p_floor, c.p_max, c.grid_points, load);
}

inline std::shared_ptr<const RunSetup> make_setup(const SimConfig& c, double budget) {
  auto s = std::make_shared<RunSetup>();
  const std::size_t n = c.users();
  for (std::size_t i = 0; i < n; ++i) {
    s->users.push_back({c.arrival_rate[i], c.delay_target[i], c.packet_bits, 0.0, c.p_max});
    s->channels.push_back(ChannelStats::make(c.data_gain_mean[i], c.interf_gain_mean[i], c.gain_family, c.gain_cap_factor));
    s->constraints.push_back({c.arrival_rate[i], c.delay_target[i]});
    s->min_delay.push_back(static_cast<std::int64_t>(std::ceil(c.packet_bits / max_rate(c.p_max, s->channels[i].data))));
  }
  const auto grid = make_power_grid(c, s->users, s->channels);
  for (auto& u : s->users) u.p_min = grid.min();
  s->model = build_frame_model(s->users, s->channels, grid, c.mc);
  s->interference_budget = budget;
  s->v = c.v;
  return s;
}

// ---------------------------------------------------------------- randomness

// Arrivals and both gains of every user for one slot.
struct SlotDraw {
  std::vector<std::uint8_t> arrivals;
  std::vector<GainDraw> gains;
};

// The exogenous randomness of a run. Policies never touch it, so two runs
// with the same seed see the same arrivals and fades.
class Realization {
 public:
  Realization(std::uint64_t seed, const RunSetup& setup)
      : rng_(derive_seed(seed, {0x7265616cULL})), setup_(&setup) {}

  void next(SlotDraw& d) {
    const std::size_t n = setup_->users.size();
    d.arrivals.resize(n);
    d.gains.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.arrivals[i] = uniform_open(rng_) < setup_->users[i].arrival_rate ? 1 : 0;
      d.gains[i] = sample_gains(setup_->channels[i], rng_);
    }
  }

 private:
  Rng rng_;
  const RunSetup* setup_;
};

// ---------------------------------------------------------------- metrics

struct TrajectoryRow {
  std::int64_t frame = 0;   // k
  std::int64_t length = 0;  // T_k, idle + busy slots
  std::vector<double> y;    // Y_i(k+1)
  double x = 0.0;           // X(k+1)
  std::vector<double> r;    // r_i(k)
};

struct SlotRecord {
  std::int64_t slot = 0;
  int user = -1;  // -1: no transmission
  double power = 0.0;
  double bits = 0.0;
  double interference = 0.0;
  std::int64_t frame = -1;  // -1: idle slot
};

struct InvariantReport {
  std::int64_t violations = 0;
  std::vector<std::string> messages;

  void fail(std::string msg) {
    ++violations;
    if (messages.size() < 16) messages.push_back(std::move(msg));
  }
  bool ok() const noexcept { return violations == 0; }
};

struct RunMetrics {
  PolicyKind policy = PolicyKind::doac;
  std::uint64_t seed = 0;
  double interference_budget = kInf;
  PowerGrid grid;

  std::vector<double> mean_delay;                // W-bar_i over measured packets (0 if none)
  double sum_delay = 0.0;
  double interference = 0.0;                     // time-average P g after burn-in
  std::vector<std::int64_t> measured;            // packets behind mean_delay

  std::int64_t slots = 0;
  std::int64_t busy_slots = 0;
  std::int64_t frames = 0;                       // closed frames K
  std::vector<std::int64_t> arrivals, completions, backlog;
  std::vector<double> bits_served;               // every user, whole run
  std::vector<double> hol_remaining;             // at the end of the run
  double total_interference = 0.0;               // slot stream, whole run
  double ledger_interference = 0.0;              // sum of frame ledgers incl. the open one

  std::vector<TrajectoryRow> trajectory;
  std::vector<SlotRecord> slot_trace;
  InvariantReport invariants;

  std::vector<double> y_history(std::size_t user) const {
    std::vector<double> h{0.0};
    for (const auto& row : trajectory) h.push_back(row.y[user]);
    return h;
  }
  std::vector<double> x_history() const {
    std::vector<double> h{0.0};
    for (const auto& row : trajectory) h.push_back(row.x);
    return h;
  }
};

// ---------------------------------------------------------------- schedulers

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  // Sees the slot's draw before the engine applies it.
  virtual void observe(const SlotDraw&) {}
  virtual void frame_start(const VirtualQueueState&) {}
  virtual std::optional<Transmission> decide(const std::vector<UserQueueState>& queues, const SlotDraw& draw) = 0;
  virtual void after_slot(double /*slot_interference*/) {}
  virtual const FramePlan* plan() const { return nullptr; }
};

// Priority-list scheduling: the highest-priority backlogged user transmits at
// its plan power. Preemption happens at slot boundaries.
class PlanScheduler : public Scheduler {
 public:
  std::optional<Transmission> decide(const std::vector<UserQueueState>& queues, const SlotDraw&) override {
    for (std::size_t u : plan_.order)
      if (!queues[u].empty()) return Transmission{u, plan_.power[u]};
    return std::nullopt;
  }
  const FramePlan* plan() const override { return has_plan_ ? &plan_ : nullptr; }

 protected:
  void set_plan(FramePlan p) {
    plan_ = std::move(p);
    has_plan_ = true;
  }

 private:
  FramePlan plan_;
  bool has_plan_ = false;
};

class DoacScheduler final : public PlanScheduler {
 public:
  explicit DoacScheduler(std::shared_ptr<const RunSetup> s) : setup_(std::move(s)) {}
  void frame_start(const VirtualQueueState& vq) override { set_plan(solve_frame(setup_->model, PsiWeights::from(vq))); }

 private:
  std::shared_ptr<const RunSetup> setup_;
};

class SuboptimalScheduler final : public PlanScheduler {
 public:
  SuboptimalScheduler(std::shared_ptr<const RunSetup> s, double scale) : setup_(std::move(s)), scale_(scale) {}
  void frame_start(const VirtualQueueState& vq) override { set_plan(suboptimal_frame_start(vq, setup_->model, scale_)); }

 private:
  std::shared_ptr<const RunSetup> setup_;
  double scale_;
};

class FixedScheduler final : public PlanScheduler {
 public:
  FixedScheduler(std::vector<std::size_t> order, std::vector<double> power) {
    FramePlan p;
    p.order = std::move(order);
    p.power = std::move(power);
    p.level.assign(p.power.size(), 0);
    set_plan(std::move(p));
  }
};

class CncScheduler final : public Scheduler {
 public:
  explicit CncScheduler(std::shared_ptr<const RunSetup> s) : setup_(std::move(s)) {}
  std::optional<Transmission> decide(const std::vector<UserQueueState>& queues, const SlotDraw& draw) override {
    lengths_.resize(queues.size());
    for (std::size_t i = 0; i < queues.size(); ++i) lengths_[i] = queues[i].queue_length();
    return cnc_slot(lengths_, draw.gains, state_.debt, setup_->model.grid);
  }
  void after_slot(double slot_interference) override { state_.update(slot_interference, setup_->interference_budget); }

 private:
  std::shared_ptr<const RunSetup> setup_;
  CncState state_;
  std::vector<std::size_t> lengths_;
};

// ---------------------------------------------------------------- engine

class Engine {
 public:
  Engine(std::shared_ptr<const RunSetup> setup, PolicyKind policy, const SimConfig& config);

  void step(const SlotDraw& draw);
  const FramePlan* plan() const { return scheduler_->plan(); }
  const VirtualQueueState& virtual_queues() const noexcept { return vq_; }
  RunMetrics finish();

 private:
  void close_current_frame();

  std::shared_ptr<const RunSetup> setup_;
  std::unique_ptr<Scheduler> scheduler_;
  std::int64_t burn_slot_ = 0;
  std::int64_t horizon_ = 0;
  std::int64_t max_frame_slots_ = 0;
  bool record_slots_ = false;

  std::vector<UserQueueState> queues_;
  std::vector<double> hol_served_;  // bits of the current HOL packet delivered so far
  VirtualQueueState vq_;
  FrameLedger ledger_;
  std::vector<double> r_;
  bool in_frame_ = false;
  std::int64_t idle_run_ = 0;
  std::int64_t now_ = 0;

  std::vector<double> delay_sum_;
  double measured_interference_ = 0.0;
  double closed_ledger_interference_ = 0.0;
  RunMetrics m_;
};

class CsmaScheduler final : public Scheduler {
 public:
  CsmaScheduler(std::shared_ptr<const RunSetup> s, const SimConfig& config)
      : setup_(s), shadow_(s, PolicyKind::doac, shadow_config(config)), rng_(derive_seed(config.seed, {0x63736d61ULL})) {}

  void observe(const SlotDraw& draw) override { shadow_.step(draw); }

  std::optional<Transmission> decide(const std::vector<UserQueueState>& queues, const SlotDraw&) override {
    backlogged_.clear();
    for (std::size_t i = 0; i < queues.size(); ++i)
      if (!queues[i].empty()) backlogged_.push_back(i);
    const FramePlan* genie = shadow_.plan();
    if (genie) return csma_slot(backlogged_, genie->power, rng_);
    // Before the shadow's first frame: the cold-start plan (every user at P_max).
    const std::vector<double> cold(queues.size(), setup_->model.grid.max());
    return csma_slot(backlogged_, cold, rng_);
  }

 private:
  static SimConfig shadow_config(SimConfig c) {
    c.policy = PolicyKind::doac;
    c.record_slots = false;
    return c;
  }

  std::shared_ptr<const RunSetup> setup_;
  Engine shadow_;
  Rng rng_;
  std::vector<std::size_t> backlogged_;
};

inline std::unique_ptr<Scheduler> make_scheduler(std::shared_ptr<const RunSetup> s, PolicyKind policy,
                                                 const SimConfig& c) {
  switch (policy) {
    case PolicyKind::doac: return std::make_unique<DoacScheduler>(std::move(s));
    case PolicyKind::suboptimal: return std::make_unique<SuboptimalScheduler>(std::move(s), c.suboptimal_scale);
    case PolicyKind::csma: return std::make_unique<CsmaScheduler>(std::move(s), c);
    case PolicyKind::cnc: return std::make_unique<CncScheduler>(std::move(s));
    case PolicyKind::fixed: return std::make_unique<FixedScheduler>(c.fixed_order, c.fixed_power);
  }
  throw ConfigError("unknown policy");
}

inline Engine::Engine(std::shared_ptr<const RunSetup> setup, PolicyKind policy, const SimConfig& config)
    : setup_(std::move(setup)),
      burn_slot_(static_cast<std::int64_t>(std::floor(config.burn_in * static_cast<double>(config.horizon)))),
      horizon_(config.horizon),
      max_frame_slots_(config.max_frame_slots),
      record_slots_(config.record_slots) {
  const std::size_t n = setup_->users.size();
  scheduler_ = make_scheduler(setup_, policy, config);
  for (const auto& u : setup_->users) queues_.emplace_back(u.packet_bits);
  hol_served_.assign(n, 0.0);
  vq_ = VirtualQueueState::zero(n);
  ledger_ = FrameLedger(n);
  r_.assign(n, 0.0);
  delay_sum_.assign(n, 0.0);

  m_.policy = policy;
  m_.seed = config.seed;
  m_.interference_budget = setup_->interference_budget;
  m_.grid = setup_->model.grid;
  m_.measured.assign(n, 0);
  m_.arrivals.assign(n, 0);
  m_.completions.assign(n, 0);
  m_.bits_served.assign(n, 0.0);
}

inline void Engine::close_current_frame() {
  vq_ = close_frame(vq_, ledger_, r_, setup_->interference_budget);
  for (double y : vq_.delay_debt)
    if (!(y >= 0.0)) m_.invariants.fail("negative delay debt");
  if (!(vq_.interference_debt >= 0.0)) m_.invariants.fail("negative interference debt");
  m_.trajectory.push_back({vq_.frame - 1, ledger_.length(), vq_.delay_debt, vq_.interference_debt, r_});
  closed_ledger_interference_ += ledger_.interference;
  ledger_ = FrameLedger(setup_->users.size());
  in_frame_ = false;
  idle_run_ = 0;
}

inline void Engine::step(const SlotDraw& draw) {
  scheduler_->observe(draw);
  const std::size_t n = queues_.size();

  bool any_arrival = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!draw.arrivals[i]) continue;
    queues_[i].enqueue(1, now_);
    ++m_.arrivals[i];
    any_arrival = true;
  }
  if (!in_frame_ && any_arrival) {
    in_frame_ = true;
    ledger_.idle_slots = idle_run_;
    scheduler_->frame_start(vq_);
    r_ = choose_r(vq_, setup_->v, setup_->constraints);
  }
  if (in_frame_)
    for (std::size_t i = 0; i < n; ++i) ledger_.arrivals[i] += draw.arrivals[i];

  SlotRecord rec{now_, -1, 0.0, 0.0, 0.0, in_frame_ ? vq_.frame : -1};
  double slot_interference = 0.0;
  if (in_frame_) {
    const auto tx = scheduler_->decide(queues_, draw);
    if (!tx || queues_[tx->user].empty()) throw ContractViolation("scheduler idled with a backlog");
    const std::size_t u = tx->user;
    if (!(tx->power >= setup_->model.grid.min() && tx->power <= setup_->model.grid.max()) &&
        dynamic_cast<FixedScheduler*>(scheduler_.get()) == nullptr)
      m_.invariants.fail("power outside [P_min, P_max]");
    const double bits = std::min(rate(tx->power, draw.gains[u].data), queues_[u].hol_remaining());
    slot_interference = tx->power * draw.gains[u].interference;
    hol_served_[u] += bits;
    m_.bits_served[u] += bits;
    if (const auto done = queues_[u].serve(bits, now_)) {
      if (std::abs(hol_served_[u] - setup_->users[u].packet_bits) > 1e-9 * setup_->users[u].packet_bits)
        m_.invariants.fail("packet finished with a bit count different from L");
      hol_served_[u] = 0.0;
      ++m_.completions[u];
      if (done->delay < setup_->min_delay[u]) m_.invariants.fail("packet faster than ceil(L / R_max)");
      ledger_.delay_sum[u] += static_cast<double>(done->delay);
      if (done->arrival_slot >= burn_slot_) {
        delay_sum_[u] += static_cast<double>(done->delay);
        ++m_.measured[u];
      }
    }
    ledger_.interference += slot_interference;
    ++ledger_.busy_slots;
    ++m_.busy_slots;
    rec = {now_, static_cast<int>(u), tx->power, bits, slot_interference, vq_.frame};
    if (max_frame_slots_ > 0 && ledger_.busy_slots > max_frame_slots_) throw NonTerminationError("frame exceeded max_frame_slots");
  } else {
    ++idle_run_;
  }

  m_.total_interference += slot_interference;
  if (now_ >= burn_slot_) measured_interference_ += slot_interference;
  if (record_slots_) m_.slot_trace.push_back(rec);
  scheduler_->after_slot(slot_interference);

  if (in_frame_ && std::all_of(queues_.begin(), queues_.end(), [](const UserQueueState& q) { return q.empty(); }))
    close_current_frame();
  ++now_;
}

inline RunMetrics Engine::finish() {
  const std::size_t n = queues_.size();
  m_.slots = now_;
  m_.frames = static_cast<std::int64_t>(m_.trajectory.size());
  m_.mean_delay.assign(n, 0.0);
  m_.sum_delay = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m_.measured[i] > 0) m_.mean_delay[i] = delay_sum_[i] / static_cast<double>(m_.measured[i]);
    m_.sum_delay += m_.mean_delay[i];
    m_.backlog.push_back(static_cast<std::int64_t>(queues_[i].queue_length()));
    m_.hol_remaining.push_back(queues_[i].hol_remaining());
    if (m_.arrivals[i] != m_.completions[i] + m_.backlog[i]) m_.invariants.fail("flow conservation broken");
  }
  const auto measured_slots = std::max<std::int64_t>(1, now_ - std::min(burn_slot_, now_));
  m_.interference = measured_interference_ / static_cast<double>(measured_slots);
  m_.ledger_interference = closed_ledger_interference_ + ledger_.interference;
  return std::move(m_);
}

// ---------------------------------------------------------------- run

namespace detail {

inline std::string scenario_key(const SimConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << c.pilot_seed << '|' << c.pilot_horizon << '|' << c.horizon << '|' << c.packet_bits << '|' << c.p_max << '|'
     << c.p_floor << '|' << c.v << '|' << c.grid_points << '|' << c.mc.packets << '|' << c.mc.draw_budget << '|'
     << c.mc.seed << '|' << c.burn_in << '|' << c.max_frame_slots << '|' << static_cast<int>(c.gain_family) << '|'
     << c.gain_cap_factor;
  for (const auto* v : {&c.arrival_rate, &c.delay_target, &c.data_gain_mean, &c.interf_gain_mean}) {
    os << '|';
    for (double x : *v) os << x << ',';
  }
  return os.str();
}

inline RunMetrics simulate(const SimConfig& c, double budget) {
  const auto setup = make_setup(c, budget);
  Engine engine(setup, c.policy, c);
  Realization realization(c.seed, *setup);
  SlotDraw draw;
  for (std::int64_t t = 0; t < c.horizon; ++t) {
    realization.next(draw);
    engine.step(draw);
  }
  return engine.finish();
}

}  // namespace detail

/// Budget the run will use: the configured i_avg, or pilot_fraction times
/// the average interference of an unconstrained DOAC pilot (memoised per scenario).
inline double resolve_interference_budget(const SimConfig& c) {
  if (c.i_avg) return *c.i_avg;
  static std::mutex mutex;
  static std::map<std::string, double> pilots;
  const std::string key = detail::scenario_key(c);
  {
    std::lock_guard lock(mutex);
    if (auto it = pilots.find(key); it != pilots.end()) return c.pilot_fraction * it->second;
  }
  SimConfig pilot = c;
  pilot.policy = PolicyKind::doac;
  pilot.seed = c.pilot_seed;
  pilot.record_slots = false;
  if (c.pilot_horizon > 0) pilot.horizon = c.pilot_horizon;
  const double unconstrained = detail::simulate(pilot, kInf).interference;
  std::lock_guard lock(mutex);
  pilots.emplace(key, unconstrained);
  return c.pilot_fraction * unconstrained;
}

/// One simulation run; deterministic in the configuration.
inline RunMetrics run(const SimConfig& c) {
  c.validate();
  return detail::simulate(c, resolve_interference_budget(c));
}

// ---------------------------------------------------------------- sweep

enum class SweepAxis { lambda, v, i_avg, policy };

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "lambda" || s == "λ") return SweepAxis::lambda;
  if (s == "V" || s == "v") return SweepAxis::v;
  if (s == "Iavg" || s == "i_avg" || s == "iavg") return SweepAxis::i_avg;
  if (s == "policy") return SweepAxis::policy;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::v: return "V";
    case SweepAxis::i_avg: return "Iavg";
    case SweepAxis::policy: return "policy";
  }
  return "?";
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::lambda;
  std::vector<double> values;          // ignored for the policy axis
  std::vector<PolicyKind> policies;    // empty: the base config's policy
  std::size_t replications = 1;
  unsigned jobs = 1;
};

struct SweepRow {
  double value = 0.0;
  PolicyKind policy = PolicyKind::doac;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or the failure message
  int exit_code = 0;
  RunMetrics metrics;
};

/// Seed of replication r; replication 0 keeps the base seed.
inline std::uint64_t replication_seed(std::uint64_t base, std::size_t r) {
  return r == 0 ? base : derive_seed(base, {0x72657000ULL + r});
}

inline SimConfig apply_axis(SimConfig c, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::lambda:
      for (std::size_t i = 0; i < c.arrival_rate.size(); ++i) c.arrival_rate[i] = static_cast<double>(i + 1) * value;
      break;
    case SweepAxis::v: c.v = value; break;
    case SweepAxis::i_avg: c.i_avg = value; break;
    case SweepAxis::policy: break;
  }
  return c;
}

/// Exit code a failed run maps to.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const InfeasibleError*>(&e)) return 2;
  if (dynamic_cast<const NonTerminationError*>(&e)) return 3;
  return 4;
}

/// One run per (value, policy, replication), ordered that way. Failed cells
/// are marked and the sweep continues.
inline std::vector<SweepRow> sweep(const SimConfig& base, const SweepSpec& spec) {
  std::vector<double> values = spec.values;
  std::vector<PolicyKind> policies = spec.policies;
  if (policies.empty()) policies.push_back(base.policy);
  if (spec.axis == SweepAxis::policy) values = {0.0};

  std::vector<SweepRow> rows;
  std::vector<SimConfig> configs;
  for (double v : values)
    for (PolicyKind p : policies)
      for (std::size_t r = 0; r < std::max<std::size_t>(1, spec.replications); ++r) {
        SimConfig c = apply_axis(base, spec.axis, v);
        c.policy = p;
        c.seed = replication_seed(base.seed, r);
        rows.push_back({v, p, r, c.seed, "ok", 0, {}});
        configs.push_back(std::move(c));
      }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      try {
        rows[k].metrics = run(configs[k]);
      } catch (const std::exception& e) {
        rows[k].status = e.what();
        rows[k].exit_code = exit_code_for(e);
      }
    }
  };
  const unsigned jobs = std::max(1u, spec.jobs);
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  return rows;
}

}  // namespace crsched
