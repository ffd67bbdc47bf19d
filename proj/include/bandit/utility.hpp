#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "bandit/density.hpp"
#include "bandit/errors.hpp"

namespace bandit {

/// Two readings of the utility objective. The consistent form subtracts
/// the non-clicked term, penalizing selections that are unlikely to be
/// clicked; the literal form keeps the printed product-and-sum shape.
enum class UtilityVariant { eq11_consistent, eq16_literal };

inline const char* to_string(UtilityVariant variant) {
  return variant == UtilityVariant::eq11_consistent ? "eq11" : "eq16";
}

inline UtilityVariant utility_variant_from_string(const std::string& name) {
  if (name == "eq11") return UtilityVariant::eq11_consistent;
  if (name == "eq16") return UtilityVariant::eq16_literal;
  throw Error("unknown utility variant '" + name + "'");
}

struct UtilityParams {
  double clicked_weight = 1.0;     // a
  double nonclicked_weight = 1.0;  // b
  UtilityVariant variant = UtilityVariant::eq11_consistent;
};

/// Sizes of the clicked / non-clicked populations behind the densities.
struct PopulationCounts {
  std::uint64_t clicked = 0;
  std::uint64_t nonclicked = 0;
  std::uint64_t total() const { return clicked + nonclicked; }
};

/// Utility-maximizing threshold with the exploration rate it induces.
struct TradeoffResult {
  double threshold = 0.0;
  double epsilon = 0.0;  // clicked-tail mass above threshold
  double utility = 0.0;
};

inline double utility_value(double threshold, const PiecewiseDensity& clicked,
                            const PiecewiseDensity& nonclicked,
                            const UtilityParams& params,
                            const PopulationCounts& counts) {
  if (!clicked.normalized || !nonclicked.normalized) {
    throw Error("utility_value needs normalized densities");
  }
  if (!(params.clicked_weight > 0.0) || !(params.nonclicked_weight > 0.0)) {
    throw Error("utility weights must be positive");
  }
  if (counts.total() == 0) throw Error("empty population counts");

  const double tail_r = tail_probability(clicked, threshold);
  const double tail_s = tail_probability(nonclicked, threshold);
  if (params.variant == UtilityVariant::eq11_consistent) {
    return params.clicked_weight * tail_r - params.nonclicked_weight * tail_s;
  }
  const double n = static_cast<double>(counts.total());
  const double p_r = static_cast<double>(counts.clicked) / n;
  const double p_s = static_cast<double>(counts.nonclicked) / n;
  const double tail_mix = p_r * tail_r + p_s * tail_s;
  return tail_mix * n * (params.clicked_weight * tail_r + params.nonclicked_weight * tail_s);
}

/// The epsilon induced by a threshold: clicked-reward mass above it.
inline double exploration_rate(double threshold, const PiecewiseDensity& clicked) {
  if (!clicked.normalized) throw Error("exploration_rate needs a normalized density");
  return tail_probability(clicked, threshold);
}

namespace detail {

/// Effective linear coefficients of the clamped density at x: the raw
/// segment line where it is positive, zero elsewhere.
inline std::pair<double, double> effective_line(const PiecewiseDensity& density,
                                                double x) {
  const DensitySegment* seg = segment_at(density, x);
  if (seg == nullptr) return {0.0, 0.0};
  if (seg->intercept + seg->slope * x < 0.0) return {0.0, 0.0};
  return {seg->intercept, seg->slope};
}

}  // namespace detail

/// Maximizes the utility over candidate thresholds: all segment
/// boundaries of both densities, the points where a clamped segment
/// crosses zero, a uniform grid over the union domain and, for the
/// eq11 objective, the interior critical points (between two knots both
/// tails are quadratic in o, so the maximizer of each interval is the
/// root of a linear derivative). Ties resolve toward the smallest
/// threshold.
inline TradeoffResult optimize_threshold(const std::optional<PiecewiseDensity>& clicked,
                                         const std::optional<PiecewiseDensity>& nonclicked,
                                         const UtilityParams& params,
                                         const PopulationCounts& counts,
                                         int grid_size = 1024) {
  if (!clicked.has_value() || !nonclicked.has_value()) {
    throw InsufficientData("insufficient data: missing reward density");
  }

  std::vector<double> candidates;
  candidates.reserve(3 * (clicked->segments.size() + nonclicked->segments.size()) +
                     static_cast<std::size_t>(std::max(grid_size, 0)));
  for (const PiecewiseDensity* density : {&*clicked, &*nonclicked}) {
    for (const DensitySegment& seg : density->segments) {
      candidates.push_back(seg.lo);
      candidates.push_back(seg.hi);
      if (seg.slope != 0.0) {
        const double root = -seg.intercept / seg.slope;
        if (root > seg.lo && root < seg.hi) candidates.push_back(root);
      }
    }
  }
  const double lo = std::min(clicked->domain_lo, nonclicked->domain_lo);
  const double hi = std::max(clicked->domain_hi, nonclicked->domain_hi);
  if (grid_size >= 2 && hi > lo) {
    for (int k = 0; k < grid_size; ++k) {
      candidates.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                    static_cast<double>(grid_size - 1));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  if (params.variant == UtilityVariant::eq11_consistent) {
    std::vector<double> critical;
    for (std::size_t i = 0; i + 1 < candidates.size(); ++i) {
      const double mid = 0.5 * (candidates[i] + candidates[i + 1]);
      const auto [ar, br] = detail::effective_line(*clicked, mid);
      const auto [as, bs] = detail::effective_line(*nonclicked, mid);
      // d/do (a*T_r - b*T_s) = -a*f_r(o) + b*f_s(o), linear between knots
      const double c1 = -params.clicked_weight * br + params.nonclicked_weight * bs;
      const double c0 = -params.clicked_weight * ar + params.nonclicked_weight * as;
      if (c1 != 0.0) {
        const double root = -c0 / c1;
        if (root > candidates[i] && root < candidates[i + 1]) critical.push_back(root);
      }
    }
    candidates.insert(candidates.end(), critical.begin(), critical.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
  }

  double best_o = candidates.front();
  double best_uf = utility_value(best_o, *clicked, *nonclicked, params, counts);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double uf = utility_value(candidates[i], *clicked, *nonclicked, params, counts);
    if (uf > best_uf) {
      best_uf = uf;
      best_o = candidates[i];
    }
  }
  return {best_o, tail_probability(*clicked, best_o), best_uf};
}

}  // namespace bandit
