#pragma once

// Chains per-segment hypothetical curves S_{A,j} into one survival estimate
// for a covariate stream: on [t*_j, t*_{j+1})
//   S(t) = S_{A,j}(t) / S_{A,j}(t*_j) * prod_{l<j} S_{A,l}(t*_{l+1}) / S_{A,l}(t*_l).

#include <algorithm>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ltrcf/error.hpp"
#include "ltrcf/npmle.hpp"

namespace ltrcf {

namespace detail {

inline void check_segments(std::span<const survival_curve<>> segments, std::span<const double> change_times) {
  if (segments.empty()) throw invalid_argument("no segment curves");
  if (segments.size() != change_times.size()) {
    throw invalid_argument("one segment curve is needed per change time");
  }
  for (std::size_t j = 1; j < change_times.size(); ++j) {
    if (!(change_times[j] > change_times[j - 1])) throw invalid_argument("change times must increase");
  }
}

inline std::size_t active_segment(std::span<const double> change_times, double t) {
  if (t < change_times.front()) {
    throw before_entry("time " + std::to_string(t) + " precedes the first change time");
  }
  return static_cast<std::size_t>(std::upper_bound(change_times.begin(), change_times.end(), t) -
                                  change_times.begin()) - 1;
}

}  // namespace detail

/// Expanded product form. A zero denominator absorbs the estimate to 0.
inline double dynamic_estimate(std::span<const survival_curve<>> segments, std::span<const double> change_times,
                               double t) {
  detail::check_segments(segments, change_times);
  const std::size_t j = detail::active_segment(change_times, t);
  double s = 1.0;
  for (std::size_t l = 0; l < j && l + 1 < change_times.size(); ++l) {
    const double den = segments[l](change_times[l]);
    if (!(den > 0.0)) return 0.0;
    s *= segments[l](change_times[l + 1]) / den;
  }
  const double den = segments[j](change_times[j]);
  if (!(den > 0.0)) return 0.0;
  return s * (segments[j](t) / den);
}

/// Recursive form: S(t) = S(t*_j) * S_{A,j}(t) / S_{A,j}(t*_j), with S(t*_0) = 1.
inline double dynamic_estimate_recursive(std::span<const survival_curve<>> segments,
                                         std::span<const double> change_times, double t) {
  detail::check_segments(segments, change_times);
  const std::size_t j = detail::active_segment(change_times, t);
  const auto step = [&](std::size_t seg, double at, double carried) {
    const double den = segments[seg](change_times[seg]);
    if (carried == 0.0 || !(den > 0.0)) return 0.0;
    return carried * (segments[seg](at) / den);
  };
  double carried = 1.0;
  for (std::size_t l = 0; l < j; ++l) carried = step(l, change_times[l + 1], carried);
  return step(j, t, carried);
}

/// One row of an emitted dynamic curve.
struct dynamic_point {
  double time = 0.0;
  double survival = 1.0;
  std::size_t segment = 0;
};

/// Evaluation grid: stream change times plus every segment-curve jump inside
/// its active window, optionally capped at `horizon`.
inline std::vector<double> dynamic_grid(std::span<const survival_curve<>> segments,
                                        std::span<const double> change_times,
                                        double horizon = std::numeric_limits<double>::infinity()) {
  detail::check_segments(segments, change_times);
  std::vector<double> grid(change_times.begin(), change_times.end());
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const double lo = change_times[j];
    const double hi = j + 1 < change_times.size() ? change_times[j + 1] : std::numeric_limits<double>::infinity();
    for (double t : segments[j].times()) {
      if (t > lo && t < hi) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::upper_bound(grid.begin(), grid.end(), horizon), grid.end());
  return grid;
}

inline std::vector<dynamic_point> dynamic_table(std::span<const survival_curve<>> segments,
                                                std::span<const double> change_times,
                                                double horizon = std::numeric_limits<double>::infinity()) {
  std::vector<dynamic_point> out;
  for (double t : dynamic_grid(segments, change_times, horizon)) {
    out.push_back({t, dynamic_estimate(segments, change_times, t), detail::active_segment(change_times, t)});
  }
  return out;
}

/// The dynamic estimate as a step function; equals 1 before the first change time.
inline survival_curve<> dynamic_curve(std::span<const survival_curve<>> segments,
                                      std::span<const double> change_times,
                                      double horizon = std::numeric_limits<double>::infinity()) {
  std::vector<double> times;
  std::vector<double> values;
  for (const auto& p : dynamic_table(segments, change_times, horizon)) {
    times.push_back(p.time);
    values.push_back(p.survival);
  }
  return {1.0, std::move(times), std::move(values)};
}

// =============================================================================
// Empirical segment curves
// =============================================================================

/// Cohort holding one covariate value over [start, end): at_risk subjects at
/// start, survivors still event-free at end.
struct segment_counts {
  double start = 0.0;
  double end = 0.0;
  int at_risk = 0;
  int survivors = 0;
};

/// Each cohort's surviving fraction as a curve that is 1 on [start, end) and
/// drops to survivors / at_risk at end.
inline std::vector<survival_curve<>> empirical_segment_curves(std::span<const segment_counts> cohorts) {
  std::vector<survival_curve<>> out;
  out.reserve(cohorts.size());
  for (const auto& c : cohorts) {
    if (c.at_risk <= 0) throw degenerate("segment starting at " + std::to_string(c.start) + " has nobody at risk");
    if (c.survivors < 0 || c.survivors > c.at_risk) throw invalid_argument("survivors must lie in [0, at_risk]");
    if (!(c.end > c.start)) throw invalid_argument("segment must end after it starts");
    out.push_back({1.0, {c.end}, {static_cast<double>(c.survivors) / c.at_risk}});
  }
  return out;
}

inline std::vector<double> change_times_of(std::span<const segment_counts> cohorts) {
  std::vector<double> out;
  for (const auto& c : cohorts) out.push_back(c.start);
  return out;
}

// =============================================================================
// Diagnostics
// =============================================================================

/// The dynamic curve with every change from index `update` onward applied,
/// and the same curve with those changes ignored (segment update-1 continued).
/// Both are returned on a shared grid.
inline std::pair<survival_curve<>, survival_curve<>> curve_with_and_without_update(
    std::span<const survival_curve<>> segments, std::span<const double> change_times, std::size_t update,
    double horizon = std::numeric_limits<double>::infinity()) {
  detail::check_segments(segments, change_times);
  if (update == 0 || update > segments.size()) throw invalid_argument("update index must be in [1, segments]");
  auto grid = dynamic_grid(segments, change_times, horizon);
  const auto frozen_grid = dynamic_grid(segments.first(update), change_times.first(update), horizon);
  grid.insert(grid.end(), frozen_grid.begin(), frozen_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> updated, frozen;
  for (double t : grid) {
    updated.push_back(dynamic_estimate(segments, change_times, t));
    frozen.push_back(dynamic_estimate(segments.first(update), change_times.first(update), t));
  }
  return {survival_curve<>{1.0, grid, std::move(updated)}, survival_curve<>{1.0, grid, std::move(frozen)}};
}

}  // namespace ltrcf
