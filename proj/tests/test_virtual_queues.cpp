#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "crsched/rng.hpp"
#include "crsched/virtual_queues.hpp"

using namespace crsched;

namespace {

FrameLedger ledger(std::vector<double> delay, std::vector<std::int64_t> arrivals, double interference, std::int64_t slots) {
  FrameLedger l(delay.size());
  l.delay_sum = std::move(delay);
  l.arrivals = std::move(arrivals);
  l.interference = interference;
  l.busy_slots = slots;
  return l;
}

}  // namespace

TEST(UpdateY, NoArrivalsKeepsZero) {
  const auto s = update_Y(VirtualQueueState::zero(1), ledger({0}, {0}, 0, 1), std::vector<double>{29});
  EXPECT_EQ(s.delay_debt[0], 0.0);
}

TEST(UpdateY, CreditProjectsToZero) {
  auto s = VirtualQueueState::zero(1);
  s.delay_debt[0] = 5;
  s = update_Y(s, ledger({10}, {1}, 0, 10), std::vector<double>{29});
  EXPECT_EQ(s.delay_debt[0], 0.0);
}

TEST(UpdateY, PlainAccumulation) {
  const auto s = update_Y(VirtualQueueState::zero(1), ledger({3 + 4 + 5}, {3}, 0, 12), std::vector<double>{0});
  EXPECT_EQ(s.delay_debt[0], 12.0);
}

TEST(UpdateX, ProjectionActive) {
  auto s = VirtualQueueState::zero(1);
  s.interference_debt = 7;
  s = update_X(s, ledger({0}, {0}, 0.0, 10), 1.0);
  EXPECT_EQ(s.interference_debt, 0.0);
}

TEST(UpdateX, Overshoot) {
  const auto s = update_X(VirtualQueueState::zero(1), ledger({0}, {0}, 12.0, 10), 1.0);
  EXPECT_EQ(s.interference_debt, 2.0);
}

TEST(UpdateX, IdleSlotsEarnBudget) {
  auto l = ledger({0}, {0}, 12.0, 10);
  l.idle_slots = 2;
  EXPECT_EQ(l.length(), 12);
  EXPECT_EQ(update_X(VirtualQueueState::zero(1), l, 1.0).interference_debt, 0.0);
}

TEST(UpdateX, InfiniteBudgetNeverAccumulates) {
  EXPECT_EQ(update_X(VirtualQueueState::zero(1), ledger({0}, {0}, 1e9, 1), std::numeric_limits<double>::infinity()).interference_debt, 0.0);
}

TEST(ChooseR, FreshStartIsZero) {
  const std::vector<DelayConstraint> users{{0.01, 29}, {0.05, 40}};
  EXPECT_EQ(choose_r(VirtualQueueState::zero(2), 100, users), (std::vector<double>{0, 0}));
}

TEST(ChooseR, ActivatesAboveV) {
  auto s = VirtualQueueState::zero(2);
  s.delay_debt = {0, 2001};
  const std::vector<DelayConstraint> users{{0.01, 29}, {0.05, 40}};
  EXPECT_EQ(choose_r(s, 100, users), (std::vector<double>{0, 40}));
}

TEST(ChooseR, StrictInequalityAtTheBoundary) {
  auto s = VirtualQueueState::zero(1);
  s.delay_debt = {2000};
  const std::vector<DelayConstraint> users{{0.05, 40}};
  ASSERT_EQ(s.delay_debt[0] * users[0].arrival_rate, 100.0);
  EXPECT_EQ(choose_r(s, 100, users)[0], 0.0);
}

TEST(CloseFrame, AdvancesFrameIndex) {
  const auto s = close_frame(VirtualQueueState::zero(1), ledger({5}, {1}, 3, 5), std::vector<double>{0}, 1.0);
  EXPECT_EQ(s.frame, 1);
  EXPECT_EQ(s.delay_debt[0], 5.0);
  EXPECT_EQ(s.interference_debt, 0.0);
}

TEST(VirtualQueues, NonNegativeAndMonotoneInR) {
  Rng g(8);
  auto lo = VirtualQueueState::zero(3), hi = VirtualQueueState::zero(3);
  for (int k = 0; k < 5000; ++k) {
    FrameLedger l(3);
    for (std::size_t i = 0; i < 3; ++i) {
      l.arrivals[i] = static_cast<std::int64_t>(5 * uniform_open(g));
      l.delay_sum[i] = static_cast<double>(l.arrivals[i]) * 60 * uniform_open(g);
    }
    l.interference = 40 * uniform_open(g);
    l.busy_slots = 10;
    const std::vector<double> r_small{10, 20, 0}, r_large{29, 29, 29};
    lo = close_frame(lo, l, r_small, 2.0);
    hi = close_frame(hi, l, r_large, 2.0);
    for (std::size_t i = 0; i < 3; ++i) {
      ASSERT_GE(hi.delay_debt[i], 0.0);
      ASSERT_LE(hi.delay_debt[i], lo.delay_debt[i]);
    }
    ASSERT_GE(lo.interference_debt, 0.0);
  }
}

TEST(StabilityDiagnostic, AllZero) {
  const std::vector<double> h(50, 0.0);
  const auto r = stability_diagnostic(h);
  EXPECT_EQ(r.final_ratio, 0.0);
  EXPECT_TRUE(r.decreasing);
}

TEST(StabilityDiagnostic, LinearGrowthConvergesToSlope) {
  std::vector<double> h;
  for (int k = 0; k <= 1000; ++k) h.push_back(3.0 * k + 40.0 * (k > 0));
  const auto r = stability_diagnostic(h);
  EXPECT_NEAR(r.final_ratio, 3.0, 0.05);
  EXPECT_TRUE(r.decreasing);  // (3k + 40)/k falls toward 3 but stays positive
  EXPECT_GT(r.final_ratio, 2.9);
}

TEST(StabilityDiagnostic, BoundedQueueRatioVanishes) {
  std::vector<double> h{0.0};
  for (int k = 1; k <= 2000; ++k) h.push_back(50.0 + 10.0 * std::sin(0.3 * k));
  const auto r = stability_diagnostic(h);
  EXPECT_LT(r.final_ratio, 0.05);
  EXPECT_LT(r.late_slope, 0.0);
  EXPECT_TRUE(r.decreasing);
}

TEST(StabilityDiagnostic, NeedsTwoFrames) {
  EXPECT_THROW(stability_diagnostic(std::vector<double>{0.0, 1.0}), ContractViolation);
}
