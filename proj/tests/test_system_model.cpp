#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_expint.h>
#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "crsched/system_model.hpp"

using namespace crsched;

namespace {

// E[log2(1 + P*gamma)] for untruncated exponential gamma with mean m:
// e^{1/(P m)} E1(1/(P m)) / ln 2.
double exp_rate_closed_form(double power, double mean) {
  const double a = 1.0 / (power * mean);
  return std::exp(a) * gsl_sf_expint_E1(a) / std::log(2.0);
}

// E[R^k] by adaptive integration on [0, inf), independent of the library's fixed rule.
double rate_moment(double power, double mean, int k) {
  struct P { double power, mean; int k; } p{power, mean, k};
  gsl_function f;
  f.function = [](double g, void* v) {
    const auto* q = static_cast<P*>(v);
    return std::pow(std::log2(1.0 + q->power * g), q->k) * std::exp(-g / q->mean) / q->mean;
  };
  f.params = &p;
  auto* ws = gsl_integration_workspace_alloc(1000);
  double result = 0, err = 0;
  gsl_integration_qagiu(&f, 0.0, 1e-12, 1e-12, 1000, ws, &result, &err);
  gsl_integration_workspace_free(ws);
  return result;
}

}  // namespace

TEST(Rate, ZeroSnrGivesZeroBits) { EXPECT_EQ(rate(0.0, 5.0), 0.0); }

TEST(Rate, UnitSnrIsOneBit) { EXPECT_EQ(rate(1.0, 1.0), 1.0); }

TEST(Rate, FullPowerUnitGain) { EXPECT_NEAR(rate(100.0, 1.0), 6.658211482751795, 1e-12); }

TEST(Rate, NegativeSnrRejected) { EXPECT_THROW(rate(-1.0, 1.0), std::domain_error); }

TEST(Rate, NeverAboveMaxRate) {
  const auto law = GainLaw::make(GainFamily::Exponential, 1.0);
  Rng g(3);
  for (int i = 0; i < 100000; ++i) ASSERT_LE(rate(100.0, law.sample(g)), max_rate(100.0, law));
}

TEST(SampleGains, ExponentialMeanWithinOnePercent) {
  const auto stats = ChannelStats::make(1.0, 0.4, GainFamily::Exponential, 50.0);
  Rng g(2024);
  double sd = 0.0, si = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto d = sample_gains(stats, g);
    ASSERT_GT(d.data, 0.0);
    ASSERT_LE(d.data, stats.data.cap);
    ASSERT_GT(d.interference, 0.0);
    ASSERT_LE(d.interference, stats.interference.cap);
    sd += d.data;
    si += d.interference;
  }
  EXPECT_NEAR(sd / n, 1.0, 0.01);
  EXPECT_NEAR(si / n, 0.4, 0.004);
}

TEST(SampleGains, DataAndInterferenceUncorrelated) {
  const auto stats = ChannelStats::make(1.0, 1.0);
  Rng g(11);
  const int n = 400'000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = sample_gains(stats, g);
    sx += d.data; sy += d.interference; sxy += d.data * d.interference;
    sxx += d.data * d.data; syy += d.interference * d.interference;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 0.01);
}

TEST(SampleGains, DegenerateIsConstant) {
  const auto stats = ChannelStats::make(2.5, 0.3, GainFamily::Degenerate);
  Rng g(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_gains(stats, g);
    EXPECT_EQ(d.data, 2.5);
    EXPECT_EQ(d.interference, 0.3);
  }
}

TEST(ChannelStats, RejectsBadParameters) {
  EXPECT_THROW(ChannelStats::make(0.0, 1.0), ConfigError);
  EXPECT_THROW(ChannelStats::make(1.0, -1.0), ConfigError);
  EXPECT_THROW(ChannelStats::make(1.0, 1.0, GainFamily::Exponential, 0.5), ConfigError);
}

TEST(UserParams, Validation) {
  EXPECT_NO_THROW((UserParams{0.5, 29, 1000, 0, 100}.validate()));
  EXPECT_THROW((UserParams{1.5, 29, 1000, 0, 100}.validate()), ConfigError);
  EXPECT_THROW((UserParams{0.1, 0, 1000, 0, 100}.validate()), ConfigError);
  EXPECT_THROW((UserParams{0.1, 29, 1000, 200, 100}.validate()), ConfigError);
}

TEST(ServiceRate, DegenerateUnitChannel) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  EXPECT_DOUBLE_EQ(service_rate_mu(u, ChannelStats::make(1.0, 0.1, GainFamily::Degenerate), 1.0), 1.0 / 1000.0);
}

TEST(ServiceRate, QuadratureMatchesClosedForm) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  const auto stats = ChannelStats::make(1.0, 0.1);
  for (double p : {0.1, 1.0, 10.0, 100.0}) {
    const double expected = exp_rate_closed_form(p, 1.0) / 1000.0;
    EXPECT_NEAR(service_rate_mu(u, stats, p), expected, 1e-9 * expected) << "P=" << p;
  }
  EXPECT_NEAR(service_rate_mu(u, stats, 100.0), 0.005884, 5e-7);
}

TEST(ServiceRate, QuadratureMatchesMonteCarlo) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  const auto stats = ChannelStats::make(1.0, 0.1);
  Rng g(99);
  double s = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) s += rate(100.0, stats.data.sample(g));
  const double mc = s / n / 1000.0;
  EXPECT_NEAR(service_rate_mu(u, stats, 100.0), mc, 0.005 * mc);
}

TEST(ServiceRate, StrictlyIncreasingInPower) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  const auto stats = ChannelStats::make(1.0, 0.1);
  double prev = 0.0;
  for (double p = 0.05; p <= 100.0; p *= 1.3) {
    const double mu = service_rate_mu(u, stats, p);
    EXPECT_GT(mu, prev);
    prev = mu;
  }
}

TEST(ServiceMoments, DeterministicService) {
  // Degenerate gain 1 at P = 3: exactly 2 bits per slot, so 10 bits take 5 slots.
  const UserParams u{0.1, 29, 10.0, 0, 100};
  const auto m = service_moments(u, ChannelStats::make(1.0, 0.1, GainFamily::Degenerate), 3.0);
  EXPECT_EQ(m.mean, 5.0);
  EXPECT_EQ(m.second, 25.0);
}

TEST(ServiceMoments, JensenBoundAndVariance) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  const auto stats = ChannelStats::make(1.0, 0.1);
  for (double p : {3.0, 30.0, 100.0}) {
    const auto m = service_moments(u, stats, p);
    EXPECT_GE(m.mean, 1.0 / service_rate_mu(u, stats, p));
    EXPECT_GE(m.second, m.mean * m.mean);
    EXPECT_GE(m.mean, 1.0);
  }
}

TEST(ServiceMoments, RenewalAsymptotics) {
  // First passage over L: E[N] ~ L/m + E[R^2]/(2 m^2), Var[N] ~ L sigma^2 / m^3.
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  const auto stats = ChannelStats::make(1.0, 0.1);
  for (double p : {10.0, 100.0}) {
    const double m1 = rate_moment(p, 1.0, 1), m2 = rate_moment(p, 1.0, 2);
    const double mean = 1000.0 / m1 + m2 / (2 * m1 * m1);
    const double var = 1000.0 * (m2 - m1 * m1) / (m1 * m1 * m1);
    const auto m = service_moments(u, stats, p);
    EXPECT_NEAR(m.mean, mean, 0.005 * mean) << "P=" << p;
    EXPECT_NEAR(m.second, var + mean * mean, 0.01 * (var + mean * mean)) << "P=" << p;
  }
}

TEST(ServiceMoments, RejectsTooSlowPowerPoints) {
  const UserParams u{0.1, 29, 1000.0, 0, 100};
  MonteCarloSettings mc;
  mc.max_mean_service = 10.0;
  EXPECT_THROW(service_moments(u, ChannelStats::make(1.0, 0.1), 1.0, mc), ServiceTooSlow);
}

TEST(ServiceMoments, SameAnswerFromConcurrentCallers) {
  const UserParams u{0.1, 29, 700.0, 0, 100};
  const auto stats = ChannelStats::make(1.3, 0.1);
  std::vector<ServiceMoments> out(4);
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < out.size(); ++t)
      threads.emplace_back([&, t] { out[t] = service_moments(u, stats, 42.0); });
  }
  for (const auto& m : out) {
    EXPECT_EQ(m.mean, out[0].mean);
    EXPECT_EQ(m.second, out[0].second);
  }
}

TEST(StepQueue, ArrivalWithoutService) {
  UserQueueState q(1000.0);
  const auto r = step_queue(q, 1, 0.0, 0);
  EXPECT_EQ(q.queue_length(), 1u);
  EXPECT_EQ(q.hol_remaining(), 1000.0);
  EXPECT_FALSE(r.completed);
}

TEST(StepQueue, ExactFinishEmptiesQueue) {
  UserQueueState q(1000.0);
  step_queue(q, 1, 995.0, 0);
  ASSERT_EQ(q.hol_remaining(), 5.0);
  const auto r = step_queue(q, 0, 5.0, 3);
  ASSERT_TRUE(r.completed);
  EXPECT_EQ(r.completed->delay, 4);
  EXPECT_EQ(q.queue_length(), 0u);
  EXPECT_EQ(q.hol_remaining(), 0.0);
}

TEST(StepQueue, FinishReloadsNextPacket) {
  UserQueueState q(1000.0);
  step_queue(q, 2, 995.0, 0);
  const auto r = step_queue(q, 0, 5.0, 1);
  ASSERT_TRUE(r.completed);
  EXPECT_EQ(q.queue_length(), 1u);
  EXPECT_EQ(q.hol_remaining(), 1000.0);
}

TEST(StepQueue, SameSlotCompletionHasUnitDelay) {
  UserQueueState q(4.0);
  const auto r = step_queue(q, 1, 4.0, 17);
  ASSERT_TRUE(r.completed);
  EXPECT_EQ(r.completed->delay, 1);
  EXPECT_EQ(r.completed->arrival_slot, 17);
}

TEST(StepQueue, OverServiceIsAContractViolation) {
  UserQueueState q(10.0);
  step_queue(q, 1, 0.0, 0);
  EXPECT_THROW(step_queue(q, 0, 11.0, 1), ContractViolation);
}

TEST(StepQueue, PreemptedPacketKeepsItsBits) {
  // Serve 300 bits, sit idle (preempted) for a while, then finish: the total is exactly L.
  UserQueueState q(1000.0);
  step_queue(q, 1, 300.0, 0);
  for (int t = 1; t < 10; ++t) step_queue(q, 0, 0.0, t);
  EXPECT_EQ(q.hol_remaining(), 700.0);
  const auto r = step_queue(q, 0, 700.0, 10);
  ASSERT_TRUE(r.completed);
  EXPECT_EQ(r.completed->delay, 11);
}
