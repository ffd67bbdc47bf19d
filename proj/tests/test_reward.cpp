#include "bandit/reward.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>

namespace {

using namespace bandit;

TEST(Ctr, Basics) {
  EXPECT_DOUBLE_EQ(ctr({"d", 10, 3}), 0.3);
  EXPECT_DOUBLE_EQ(ctr({"d", 5, 0}), 0.0);
  EXPECT_THROW(ctr({"d", 0, 0}), Error);
}

TEST(RecordEvent, FreshDocClicked) {
  DocumentStore store;
  store.record_event("a", true);
  const auto* stats = store.find("a");
  ASSERT_NE(stats, nullptr);
  EXPECT_EQ(stats->impressions, 1u);
  EXPECT_EQ(stats->clicks, 1u);
  EXPECT_DOUBLE_EQ(ctr(*stats), 1.0);
  ASSERT_EQ(store.clicked_sample().size(), 1u);
  EXPECT_DOUBLE_EQ(store.clicked_sample().rewards().front(), 1.0);
  EXPECT_TRUE(store.nonclicked_sample().empty());
}

TEST(RecordEvent, FreshDocNotClicked) {
  DocumentStore store;
  store.record_event("a", false);
  const auto* stats = store.find("a");
  ASSERT_NE(stats, nullptr);
  EXPECT_EQ(stats->impressions, 1u);
  EXPECT_EQ(stats->clicks, 0u);
  EXPECT_DOUBLE_EQ(ctr(*stats), 0.0);
  ASSERT_EQ(store.nonclicked_sample().size(), 1u);
  EXPECT_DOUBLE_EQ(store.nonclicked_sample().rewards().front(), 0.0);
  EXPECT_TRUE(store.clicked_sample().empty());
}

TEST(RecordEvent, ExistingDocUpdatesPostEventCtr) {
  DocumentStore store;
  // bring the document to (9 impressions, 2 clicks)
  for (int i = 0; i < 9; ++i) store.record_event("a", i < 2);
  const auto* before = store.find("a");
  ASSERT_NE(before, nullptr);
  ASSERT_EQ(before->impressions, 9u);
  ASSERT_EQ(before->clicks, 2u);

  store.record_event("a", true);
  const auto* after = store.find("a");
  EXPECT_EQ(after->impressions, 10u);
  EXPECT_EQ(after->clicks, 3u);
  EXPECT_DOUBLE_EQ(ctr(*after), 0.3);
  // the clicked sample records the refreshed CTR
  EXPECT_DOUBLE_EQ(store.clicked_sample().rewards().back(), 0.3);
}

TEST(RecordEvent, CtrOrZeroForUnknownDoc) {
  DocumentStore store;
  EXPECT_DOUBLE_EQ(store.ctr_or_zero("never-seen"), 0.0);
}

TEST(BuildPointSeries, TwoIntervalExample) {
  RewardSample sample;
  for (double r : {0.1, 0.2, 0.6, 0.7}) sample.add(r);
  const PointSeries series = build_point_series(sample);
  EXPECT_DOUBLE_EQ(series.domain_lo, 0.1);
  EXPECT_DOUBLE_EQ(series.domain_hi, 0.7);
  ASSERT_EQ(series.points.size(), 2u);
  EXPECT_NEAR(series.points[0].s, 0.25, 1e-12);
  EXPECT_NEAR(series.points[0].p, 0.5, 1e-12);
  EXPECT_NEAR(series.points[1].s, 0.55, 1e-12);
  EXPECT_NEAR(series.points[1].p, 0.5, 1e-12);
}

TEST(BuildPointSeries, AllRewardsEqualCollapse) {
  RewardSample sample;
  for (int i = 0; i < 6; ++i) sample.add(0.4);
  const PointSeries series = build_point_series(sample);
  ASSERT_EQ(series.points.size(), 1u);
  EXPECT_DOUBLE_EQ(series.points[0].s, 0.4);
  EXPECT_DOUBLE_EQ(series.points[0].p, 1.0);
  EXPECT_DOUBLE_EQ(series.domain_lo, 0.4);
  EXPECT_DOUBLE_EQ(series.domain_hi, 0.4);
}

TEST(BuildPointSeries, SingleReward) {
  RewardSample sample;
  sample.add(0.9);
  const PointSeries series = build_point_series(sample);
  ASSERT_EQ(series.points.size(), 1u);
  EXPECT_DOUBLE_EQ(series.points[0].s, 0.9);
  EXPECT_DOUBLE_EQ(series.points[0].p, 1.0);
}

TEST(BuildPointSeries, EmptySampleThrows) {
  EXPECT_THROW(build_point_series(RewardSample{}), InsufficientData);
}

TEST(BuildPointSeries, MassSumsToOneOnFuzz) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 60; ++round) {
    RewardSample sample;
    const std::size_t d = 1 + rng() % 400;
    for (std::size_t i = 0; i < d; ++i) sample.add(unit(rng));
    const PointSeries series = build_point_series(sample);

    ASSERT_FALSE(series.points.empty());
    EXPECT_LE(series.points.size(), std::max<std::size_t>(1, d / 2));
    double mass = 0.0;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
      const Point& pt = series.points[i];
      EXPECT_GT(pt.p, 0.0);
      EXPECT_GE(pt.s, series.domain_lo);
      EXPECT_LE(pt.s, series.domain_hi);
      if (i > 0) {
        EXPECT_GT(pt.s, series.points[i - 1].s);
      }
      mass += pt.p;
    }
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(RewardSample, SlidingWindowEvictsOldest) {
  RewardSample sample(3);
  for (double r : {0.1, 0.2, 0.3, 0.4, 0.5}) sample.add(r);
  ASSERT_EQ(sample.size(), 3u);
  EXPECT_DOUBLE_EQ(sample.rewards().front(), 0.3);
  EXPECT_DOUBLE_EQ(sample.rewards().back(), 0.5);
}

TEST(RecordEvent, MatchesBruteForceRecount) {
  std::mt19937_64 rng(42);
  DocumentStore store;
  std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> recount;
  for (int event = 0; event < 10000; ++event) {
    const std::string doc = "doc" + std::to_string(rng() % 25);
    const bool clicked = (rng() % 2) == 0;
    store.record_event(doc, clicked);
    auto& [imps, clicks] = recount[doc];
    ++imps;
    if (clicked) ++clicks;
  }
  for (const auto& [doc, counts] : recount) {
    const auto* stats = store.find(doc);
    ASSERT_NE(stats, nullptr);
    EXPECT_EQ(stats->impressions, counts.first);
    EXPECT_EQ(stats->clicks, counts.second);
    EXPECT_DOUBLE_EQ(ctr(*stats), static_cast<double>(counts.second) /
                                      static_cast<double>(counts.first));
  }
}

}  // namespace
