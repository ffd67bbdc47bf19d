#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "bandit/errors.hpp"
#include "bandit/reward.hpp"

namespace bandit {

/// A fitted line y(x) = intercept + slope * x.
struct Line {
  double intercept = 0.0;
  double slope = 0.0;
};

/// A maximal run of distribution points whose least-squares fit stays
/// below the deviation threshold, with the fitted line and reward bounds.
struct LinearClass {
  double lo = 0.0;  // smallest reward in the class
  double hi = 0.0;  // largest reward in the class
  double intercept = 0.0;
  double slope = 0.0;
};

/// Straight connector between the extremities of two adjacent classes.
/// A zero-width gap yields a zero-width segment.
struct LiaisonSegment {
  double lo = 0.0;
  double hi = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
};

namespace detail {

/// Incremental least-squares accumulator over (s, p) points.
class RunningFit {
 public:
  void add(const Point& pt) {
    n_ += 1;
    sx_ += pt.s;
    sy_ += pt.p;
    sxx_ += pt.s * pt.s;
    sxy_ += pt.s * pt.p;
    syy_ += pt.p * pt.p;
  }

  void reset() { *this = RunningFit{}; }
  std::size_t size() const { return n_; }

  /// OLS line; requires >= 2 points with distinct abscissae.
  Line line() const {
    const double n = static_cast<double>(n_);
    const double det = n * sxx_ - sx_ * sx_;
    const double slope = (n * sxy_ - sx_ * sy_) / det;
    return {(sy_ - slope * sx_) / n, slope};
  }

  /// Deviation of the accumulated points from `line`, squared residuals
  /// divided by intercept^2 + 1.
  double error(const Line& line) const {
    const double a = line.intercept;
    const double b = line.slope;
    double ss = static_cast<double>(n_) * a * a + b * b * sxx_ + syy_ +
                2.0 * (a * b * sx_ - a * sy_ - b * sxy_);
    if (ss < 0.0) ss = 0.0;  // rounding
    return ss / (a * a + 1.0);
  }

 private:
  std::size_t n_ = 0;
  double sx_ = 0.0, sy_ = 0.0, sxx_ = 0.0, sxy_ = 0.0, syy_ = 0.0;
};

}  // namespace detail

/// Ordinary least-squares line minimizing vertical squared residuals.
inline Line fit_least_squares(std::span<const Point> points) {
  if (points.size() < 2) throw Error("degenerate fit: need at least two points");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].s != points[0].s) {
      distinct = true;
      break;
    }
  }
  if (!distinct) throw Error("degenerate fit: need two distinct abscissae");
  detail::RunningFit fit;
  for (const Point& pt : points) fit.add(pt);
  return fit.line();
}

/// Deviation between points and a line: sum over j of
/// ((a + b*s_j - p_j) / sqrt(a^2 + 1))^2.
inline double deviation_error(std::span<const Point> points, const Line& line) {
  double ss = 0.0;
  for (const Point& pt : points) {
    const double r = line.intercept + line.slope * pt.s - pt.p;
    ss += r * r;
  }
  return ss / (line.intercept * line.intercept + 1.0);
}

namespace detail {

/// Class over points[begin, end). A single point becomes a degenerate
/// horizontal class.
inline LinearClass close_class(std::span<const Point> points, std::size_t begin,
                               std::size_t end) {
  if (end - begin == 1) {
    return {points[begin].s, points[begin].s, points[begin].p, 0.0};
  }
  const Line line = fit_least_squares(points.subspan(begin, end - begin));
  return {points[begin].s, points[end - 1].s, line.intercept, line.slope};
}

}  // namespace detail

/// Segments an ordered point series into linear classes. Points are
/// scanned in order while a running least-squares fit stays within
/// threshold_error; the point that pushes the deviation above the
/// threshold closes the class over the points before it and starts a new
/// working set. Trailing points are flushed as a final class.
inline std::vector<LinearClass> linearize(const PointSeries& series,
                                          double threshold_error = 0.0001) {
  const auto& pts = series.points;
  if (pts.empty()) throw InsufficientData("empty point series");
  if (!(threshold_error > 0.0)) throw Error("threshold_error must be positive");
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].s > pts[i - 1].s)) {
      throw Error("points must be strictly increasing in reward");
    }
  }

  std::vector<LinearClass> classes;
  detail::RunningFit fit;
  std::size_t first = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    fit.add(pts[i]);
    if (fit.size() >= 2 && fit.error(fit.line()) > threshold_error) {
      classes.push_back(detail::close_class(pts, first, i));
      fit.reset();
      fit.add(pts[i]);
      first = i;
    }
  }
  classes.push_back(detail::close_class(pts, first, pts.size()));
  return classes;
}

/// Liaison lines joining each adjacent class pair: the unique line through
/// (f_c, value of C_c at f_c) and (d_{c+1}, value of C_{c+1} at d_{c+1}).
inline std::vector<LiaisonSegment> connect_classes(std::span<const LinearClass> classes) {
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (!(classes[c].lo <= classes[c].hi) ||
        (c > 0 && !(classes[c - 1].hi <= classes[c].lo))) {
      throw Error("classes must be ordered and non-overlapping");
    }
  }
  std::vector<LiaisonSegment> liaisons;
  if (classes.size() < 2) return liaisons;
  liaisons.reserve(classes.size() - 1);
  for (std::size_t c = 0; c + 1 < classes.size(); ++c) {
    const double x0 = classes[c].hi;
    const double x1 = classes[c + 1].lo;
    const double y0 = classes[c].intercept + classes[c].slope * x0;
    const double y1 = classes[c + 1].intercept + classes[c + 1].slope * x1;
    if (x0 == x1) {
      liaisons.push_back({x0, x1, y0, 0.0});
      continue;
    }
    const double slope = (y1 - y0) / (x1 - x0);
    liaisons.push_back({x0, x1, y0 - slope * x0, slope});
  }
  return liaisons;
}

/// One linear piece of an assembled density.
struct DensitySegment {
  enum class Kind { kClass, kLiaison };
  Kind kind = Kind::kClass;
  double lo = 0.0;
  double hi = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
};

/// Piecewise-linear reward density: ordered, contiguous segments over
/// [domain_lo, domain_hi]. Negative stretches evaluate (and integrate)
/// as zero. tail_cache holds clamped suffix areas and is filled by
/// normalize_density.
struct PiecewiseDensity {
  std::vector<DensitySegment> segments;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  bool normalized = false;
  std::vector<double> tail_cache;
};

namespace detail {

/// Integral of max(0, a + b*x) over [lo, hi].
inline double clamped_area(double lo, double hi, double a, double b) {
  const double w = hi - lo;
  if (!(w > 0.0)) return 0.0;
  const double ylo = a + b * lo;
  const double yhi = a + b * hi;
  if (ylo >= 0.0 && yhi >= 0.0) return 0.5 * (ylo + yhi) * w;
  if (ylo <= 0.0 && yhi <= 0.0) return 0.0;
  const double root = -a / b;  // signs differ, so b != 0
  if (yhi > 0.0) return 0.5 * (hi - root) * yhi;
  return 0.5 * (root - lo) * ylo;
}

inline double clamped_area(const DensitySegment& seg) {
  return clamped_area(seg.lo, seg.hi, seg.intercept, seg.slope);
}

inline double clamped_area_from(const DensitySegment& seg, double x0) {
  return clamped_area(std::max(seg.lo, x0), seg.hi, seg.intercept, seg.slope);
}

}  // namespace detail

/// Assembles classes and liaisons into a density and rescales every
/// coefficient so the clamped area over the domain is one.
inline PiecewiseDensity normalize_density(std::span<const LinearClass> classes,
                                          std::span<const LiaisonSegment> liaisons) {
  if (classes.empty()) throw InsufficientData("no classes to normalize");
  const std::size_t expected = classes.size() - 1;
  if (liaisons.size() != expected) {
    throw Error("expected one liaison per adjacent class pair");
  }

  PiecewiseDensity density;
  density.segments.reserve(classes.size() + liaisons.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    density.segments.push_back({DensitySegment::Kind::kClass, classes[c].lo,
                                classes[c].hi, classes[c].intercept, classes[c].slope});
    if (c < expected) {
      const LiaisonSegment& li = liaisons[c];
      if (li.lo != classes[c].hi || li.hi != classes[c + 1].lo) {
        throw Error("liaisons must exactly fill the inter-class gaps");
      }
      density.segments.push_back(
          {DensitySegment::Kind::kLiaison, li.lo, li.hi, li.intercept, li.slope});
    }
  }
  for (const DensitySegment& seg : density.segments) {
    if (!(seg.lo <= seg.hi)) throw Error("segment bounds out of order");
  }

  density.domain_lo = density.segments.front().lo;
  density.domain_hi = density.segments.back().hi;

  double area = 0.0;
  for (const DensitySegment& seg : density.segments) area += detail::clamped_area(seg);
  if (!(area > 0.0)) throw InsufficientData("degenerate density: zero clamped area");

  for (DensitySegment& seg : density.segments) {
    seg.intercept /= area;
    seg.slope /= area;
  }
  density.normalized = true;

  density.tail_cache.assign(density.segments.size() + 1, 0.0);
  for (std::size_t i = density.segments.size(); i-- > 0;) {
    density.tail_cache[i] =
        density.tail_cache[i + 1] + detail::clamped_area(density.segments[i]);
  }
  return density;
}

namespace detail {

/// Segment containing x, or null outside the domain.
inline const DensitySegment* segment_at(const PiecewiseDensity& density, double x) {
  if (density.segments.empty() || x < density.domain_lo || x > density.domain_hi) {
    return nullptr;
  }
  const auto it = std::lower_bound(
      density.segments.begin(), density.segments.end(), x,
      [](const DensitySegment& seg, double v) { return seg.hi < v; });
  return &*it;
}

}  // namespace detail

/// Clamped value max(0, a + b*x) of the segment containing x; zero
/// outside the domain.
inline double evaluate_density(const PiecewiseDensity& density, double x) {
  const DensitySegment* seg = detail::segment_at(density, x);
  if (seg == nullptr) return 0.0;
  return std::max(0.0, seg->intercept + seg->slope * x);
}

/// Clamped integral from o to the domain end, computed analytically per
/// segment (exactly 1 at the domain start for a normalized density).
inline double tail_probability(const PiecewiseDensity& density, double o) {
  if (density.segments.empty()) return 0.0;
  if (o >= density.domain_hi) return 0.0;
  if (o < density.domain_lo) o = density.domain_lo;
  const auto it = std::upper_bound(
      density.segments.begin(), density.segments.end(), o,
      [](double v, const DensitySegment& seg) { return v < seg.hi; });
  const auto idx = static_cast<std::size_t>(it - density.segments.begin());
  double total = detail::clamped_area_from(density.segments[idx], o);
  if (!density.tail_cache.empty()) {
    total += density.tail_cache[idx + 1];
  } else {
    for (std::size_t j = idx + 1; j < density.segments.size(); ++j) {
      total += detail::clamped_area(density.segments[j]);
    }
  }
  return total;
}

/// CSV rows (kind, x_lo, x_hi, intercept, slope) for external plotting.
inline void dump_density_csv(const PiecewiseDensity& density, std::ostream& out) {
  out << "kind,x_lo,x_hi,intercept,slope\n";
  char buf[128];
  for (const DensitySegment& seg : density.segments) {
    const char* kind = seg.kind == DensitySegment::Kind::kClass ? "class" : "liaison";
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", kind, seg.lo,
                  seg.hi, seg.intercept, seg.slope);
    out << buf;
  }
}

}  // namespace bandit
