#include <gtest/gtest.h>

#include "macgame/phy.hpp"
#include "../support/fixtures.hpp"

using namespace macgame;

TEST(Phy, IdealThroughputOverheadlessEqualsRate) {
  const auto phy = fixtures::two_rate_phy();
  EXPECT_DOUBLE_EQ(ideal_throughput(fixtures::kG1, phy), 3.2e6);
  EXPECT_DOUBLE_EQ(ideal_throughput(fixtures::kG2, phy), 1.6e6);
}

TEST(Phy, IdealThroughputFormula) {
  const auto phy = preset_80211b();
  const Strategy s{11e6, 12000.0};
  const double expected = 12000.0 / (556e-6 + (12000.0 + 448.0) / 11e6);
  EXPECT_NEAR(ideal_throughput(s, phy), expected, 1e-6);
  EXPECT_LT(ideal_throughput(s, phy), 11e6);
}

TEST(Phy, IdealThroughputIncreasesWithRateAndPayload) {
  const auto phy = preset_80211b();
  for (double s : {1000.0, 4000.0, 8000.0, 12000.0}) {
    double prev = 0.0;
    for (double r : phy.rates_bps) {
      const double g = ideal_throughput({r, s}, phy);
      EXPECT_GT(g, prev);
      prev = g;
    }
  }
  for (double r : phy.rates_bps) {
    double prev = 0.0;
    for (double s : {1000.0, 4000.0, 8000.0, 12000.0}) {
      const double g = ideal_throughput({r, s}, phy);
      EXPECT_GT(g, prev);
      prev = g;
    }
  }
}

TEST(Phy, PracticalThroughputScalesByAlpha) {
  const auto phy = fixtures::two_rate_phy();
  EXPECT_DOUBLE_EQ(practical_throughput(fixtures::kG1, 0.6, phy), 1.92e6);
  EXPECT_DOUBLE_EQ(practical_throughput(fixtures::kG2, 0.95, phy), 1.52e6);
  EXPECT_DOUBLE_EQ(practical_throughput(fixtures::kG1, 0.0, phy), 0.0);
  EXPECT_THROW(practical_throughput(fixtures::kG1, 1.2, phy), DomainError);
  EXPECT_THROW(practical_throughput(fixtures::kG1, -0.1, phy), DomainError);
}

TEST(Phy, StrategyValidation) {
  const auto phy = fixtures::two_rate_phy();
  EXPECT_THROW(ideal_throughput({2.0e6, 12000.0}, phy), DomainError);
  EXPECT_THROW(ideal_throughput({3.2e6, 0.0}, phy), DomainError);
  EXPECT_THROW(ideal_throughput({3.2e6, 20000.0}, phy), DomainError);
}

TEST(Phy, ProfileValidation) {
  auto phy = preset_80211b();
  EXPECT_NO_THROW(validate(phy));
  auto bad = phy;
  bad.rates_bps = {};
  EXPECT_THROW(validate(bad), DomainError);
  bad = phy;
  bad.rates_bps = {2e6, 1e6};
  EXPECT_THROW(validate(bad), DomainError);
  bad = phy;
  bad.time_overhead_s = -1e-6;
  EXPECT_THROW(validate(bad), DomainError);
  bad = phy;
  bad.cw_min = 2000;
  EXPECT_THROW(validate(bad), DomainError);
  bad = phy;
  bad.txop_limit_s = 0.0;
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(Phy, MaxBurstFrames) {
  const auto phy = fixtures::two_rate_phy();
  EXPECT_EQ(max_burst_frames(fixtures::kG1, phy), 4);  // 15 ms / 3.75 ms
  EXPECT_EQ(max_burst_frames(fixtures::kG2, phy), 2);  // 15 ms / 7.5 ms
  auto tight = phy;
  tight.txop_limit_s = 1e-3;
  EXPECT_EQ(max_burst_frames(fixtures::kG2, tight), 1);
}

TEST(Phy, Preset) {
  EXPECT_TRUE(preset("80211b").has_value());
  EXPECT_FALSE(preset("80211zz").has_value());
  EXPECT_EQ(preset_80211b().rates_bps.size(), 4u);
}

TEST(Phy, Describe) { EXPECT_EQ(describe({5.5e6, 12000.0}), "5.5Mbps/12000b"); }
