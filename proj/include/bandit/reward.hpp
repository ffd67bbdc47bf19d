#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "bandit/errors.hpp"

namespace bandit {

using DocId = std::string;

/// Per-document impression/click counters. CTR is the reward estimate.
struct DocumentStats {
  DocId doc_id;
  std::uint64_t impressions = 0;
  std::uint64_t clicks = 0;
};

/// clicks / impressions. Throws on zero impressions: such documents carry
/// no reward information yet and stay out of the distributions.
inline double ctr(const DocumentStats& stats) {
  if (stats.impressions == 0) {
    throw Error("undefined CTR: document '" + stats.doc_id + "' has no impressions");
  }
  return static_cast<double>(stats.clicks) / static_cast<double>(stats.impressions);
}

/// Reward values observed for one outcome class (clicked or non-clicked),
/// kept in a sliding window so rewards of expired documents eventually
/// drop out instead of freezing the distributions.
class RewardSample {
 public:
  static constexpr std::size_t kDefaultWindow = 10000;

  explicit RewardSample(std::size_t window = kDefaultWindow)
      : window_(window == 0 ? 1 : window) {}

  void add(double reward) {
    rewards_.push_back(reward);
    if (rewards_.size() > window_) rewards_.pop_front();
  }

  bool empty() const { return rewards_.empty(); }
  std::size_t size() const { return rewards_.size(); }
  std::size_t window() const { return window_; }
  const std::deque<double>& rewards() const { return rewards_; }

 private:
  std::size_t window_;
  std::deque<double> rewards_;
};

/// One discrete reward-probability point.
struct Point {
  double s = 0.0;  // reward value
  double p = 0.0;  // probability mass
};

/// Discrete distribution points sorted by strictly increasing reward,
/// over the observed reward range [domain_lo, domain_hi].
struct PointSeries {
  std::vector<Point> points;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
};

/// Buckets a reward sample into max(1, d/2) equal-width intervals and
/// returns one point per non-empty interval: the interval midpoint
/// weighted by relative frequency. Membership is half-open [lo, hi) with
/// the last interval closed, so every reward is counted exactly once.
/// A zero-width reward range collapses to a single unit-mass point.
inline PointSeries build_point_series(const RewardSample& sample) {
  const auto& rewards = sample.rewards();
  const std::size_t d = rewards.size();
  if (d == 0) throw InsufficientData("empty sample");

  const auto [lo_it, hi_it] = std::minmax_element(rewards.begin(), rewards.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return {{{lo, 1.0}}, lo, hi};

  const std::size_t n = std::max<std::size_t>(1, d / 2);
  const double width = (hi - lo) / static_cast<double>(n);
  std::vector<std::uint64_t> counts(n, 0);
  for (double r : rewards) {
    auto k = static_cast<std::size_t>((r - lo) / width);
    if (k >= n) k = n - 1;
    ++counts[k];
  }

  PointSeries series{{}, lo, hi};
  series.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (counts[k] == 0) continue;
    series.points.push_back({lo + (static_cast<double>(k) + 0.5) * width,
                             static_cast<double>(counts[k]) / static_cast<double>(d)});
  }
  return series;
}

/// Mutable bandit state for one situation: per-document counters plus the
/// clicked / non-clicked reward samples feeding the linearizer.
/// Single-writer; hand off between threads, do not mutate concurrently.
class DocumentStore {
 public:
  explicit DocumentStore(std::size_t sample_window = RewardSample::kDefaultWindow)
      : clicked_(sample_window), nonclicked_(sample_window) {}

  /// Records one display event: updates the counters first, then appends
  /// the document's refreshed CTR to the matching sample.
  void record_event(const DocId& doc, bool clicked) {
    auto& stats = stats_.try_emplace(doc, DocumentStats{doc, 0, 0}).first->second;
    ++stats.impressions;
    if (clicked) ++stats.clicks;
    const double reward = ctr(stats);
    (clicked ? clicked_ : nonclicked_).add(reward);
  }

  const DocumentStats* find(const DocId& doc) const {
    const auto it = stats_.find(doc);
    return it == stats_.end() ? nullptr : &it->second;
  }

  /// Reward estimate used for greedy ranking; never-displayed documents
  /// count as zero.
  double ctr_or_zero(const DocId& doc) const {
    const auto* stats = find(doc);
    return (stats == nullptr || stats->impressions == 0) ? 0.0 : ctr(*stats);
  }

  const RewardSample& clicked_sample() const { return clicked_; }
  const RewardSample& nonclicked_sample() const { return nonclicked_; }
  std::size_t document_count() const { return stats_.size(); }

 private:
  std::unordered_map<DocId, DocumentStats> stats_;
  RewardSample clicked_;
  RewardSample nonclicked_;
};

}  // namespace bandit
