#pragma once

// Product-limit and Nelson-Aalen estimators for LTRC data.
//
// Risk-set convention: a row (L, R] is at risk at t when L < t <= R. Curves are
// right-continuous step functions stored at their jump times only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ltrcf/error.hpp"
#include "ltrcf/ltrc_core.hpp"

namespace ltrcf {

// =============================================================================
// Step functions
// =============================================================================

struct survival_tag {};
struct cumulative_hazard_tag {};

/// Right-continuous step function: `initial` before the first jump time, then
/// values[k] on [times[k], times[k+1]).
template <class Real, class Tag>
class step_function {
 public:
  step_function() : initial_(default_initial()) {}
  step_function(Real initial, std::vector<double> times, std::vector<Real> values)
      : initial_(std::move(initial)), times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) throw invalid_argument("step function size mismatch");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (!(times_[k] > times_[k - 1])) throw invalid_argument("step function times must increase");
    }
  }

  static Real default_initial() {
    if constexpr (std::is_same_v<Tag, survival_tag>) {
      return Real(1);
    } else {
      return Real(0);
    }
  }

  /// Value at t (right-continuous).
  const Real& operator()(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? initial_ : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  /// Left limit at t.
  const Real& before(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? initial_ : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  const Real& initial() const { return initial_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Real>& values() const { return values_; }
  std::size_t jumps() const { return times_.size(); }

 private:
  Real initial_;
  std::vector<double> times_;
  std::vector<Real> values_;
};

template <class Real = double>
using survival_curve = step_function<Real, survival_tag>;
template <class Real = double>
using cumulative_hazard_curve = step_function<Real, cumulative_hazard_tag>;

// =============================================================================
// Risk sets
// =============================================================================

/// Per distinct event time: weighted event count d and at-risk total Y.
template <class Real>
struct risk_table {
  std::vector<double> times;
  std::vector<Real> events;
  std::vector<Real> at_risk;
};

/// Precomputed positions of each row relative to the sorted event times, so
/// risk tables for many weight vectors over the same rows cost O(n + K).
class ltrc_risk_index {
 public:
  explicit ltrc_risk_index(std::span<const ltrc_interval> rows) : n_(rows.size()) {
    for (const auto& r : rows) {
      if (!(r.left < r.right)) throw invalid_argument("LTRC row needs left < right");
      if (r.event) times_.push_back(r.right);
    }
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
    first_.resize(n_);
    last_.resize(n_);
    event_slot_.assign(n_, -1);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& r = rows[i];
      first_[i] = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), r.left) - times_.begin());
      last_[i] = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), r.right) - times_.begin());
      if (r.event) event_slot_[i] = last_[i] - 1;
    }
  }

  std::size_t rows() const { return n_; }
  const std::vector<double>& event_times() const { return times_; }

  /// Row i is at risk at event times [first(i), last(i)).
  int first(std::size_t i) const { return first_[i]; }
  int last(std::size_t i) const { return last_[i]; }
  int event_slot(std::size_t i) const { return event_slot_[i]; }

  template <class Real>
  risk_table<Real> table(std::span<const Real> weights) const {
    const bool weighted = !weights.empty();
    if (weighted && weights.size() != n_) throw invalid_argument("weights do not match rows");
    const std::size_t K = times_.size();
    std::vector<Real> delta(K + 1, Real(0));
    std::vector<Real> d(K, Real(0));
    for (std::size_t i = 0; i < n_; ++i) {
      const Real w = weighted ? weights[i] : Real(1);
      if (w < Real(0)) throw invalid_argument("weights must be non-negative");
      if (w == Real(0)) continue;
      delta[static_cast<std::size_t>(first_[i])] += w;
      delta[static_cast<std::size_t>(last_[i])] -= w;
      if (event_slot_[i] >= 0) d[static_cast<std::size_t>(event_slot_[i])] += w;
    }
    risk_table<Real> out;
    Real y(0);
    for (std::size_t k = 0; k < K; ++k) {
      y += delta[k];
      if (d[k] == Real(0)) continue;
      if (!(y > Real(0))) {
        throw degenerate("empty risk set at event time " + std::to_string(times_[k]));
      }
      out.times.push_back(times_[k]);
      out.events.push_back(d[k]);
      out.at_risk.push_back(y);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<double> times_;
  std::vector<int> first_;
  std::vector<int> last_;
  std::vector<int> event_slot_;
};

namespace detail {

template <class Real>
void check_weights(std::span<const Real> weights, std::size_t n) {
  if (weights.empty()) return;
  if (weights.size() != n) throw invalid_argument("weights do not match rows");
  bool any = false;
  for (const auto& w : weights) {
    if (w < Real(0)) throw invalid_argument("weights must be non-negative");
    any = any || w > Real(0);
  }
  if (!any) throw invalid_argument("weights are all zero");
}

}  // namespace detail

template <class Real>
survival_curve<Real> km_from_table(const risk_table<Real>& tab) {
  std::vector<Real> values;
  values.reserve(tab.times.size());
  Real s(1);
  for (std::size_t k = 0; k < tab.times.size(); ++k) {
    Real left = tab.at_risk[k] - tab.events[k];
    if (left < Real(0)) left = Real(0);
    s *= left / tab.at_risk[k];
    values.push_back(s);
  }
  return {Real(1), tab.times, std::move(values)};
}

template <class Real>
cumulative_hazard_curve<Real> na_from_table(const risk_table<Real>& tab) {
  std::vector<Real> values;
  values.reserve(tab.times.size());
  Real h(0);
  for (std::size_t k = 0; k < tab.times.size(); ++k) {
    h += tab.events[k] / tab.at_risk[k];
    values.push_back(h);
  }
  return {Real(0), tab.times, std::move(values)};
}

// =============================================================================
// Estimators
// =============================================================================

/// Product-limit estimate from LTRC rows, optionally weighted.
template <class Real = double>
survival_curve<Real> km_ltrc(std::span<const ltrc_interval> rows, std::span<const Real> weights = {}) {
  detail::check_weights(weights, rows.size());
  return km_from_table(ltrc_risk_index(rows).table(weights));
}

/// Nelson-Aalen cumulative hazard from LTRC rows, optionally weighted.
template <class Real = double>
cumulative_hazard_curve<Real> na_ltrc(std::span<const ltrc_interval> rows, std::span<const Real> weights = {}) {
  detail::check_weights(weights, rows.size());
  return na_from_table(ltrc_risk_index(rows).table(weights));
}

struct observed_outcome {
  double time = 0.0;
  bool event = false;
};

/// Kaplan-Meier estimate of the censoring distribution from subject-level
/// outcomes (censorings are the "events").
template <class Real = double>
survival_curve<Real> km_censoring(std::span<const observed_outcome> subjects) {
  std::vector<ltrc_interval> rows;
  rows.reserve(subjects.size());
  for (const auto& s : subjects) {
    if (!(s.time > 0.0) || !std::isfinite(s.time)) throw invalid_argument("observed times must be positive");
    rows.push_back({0.0, s.time, !s.event});
  }
  return km_ltrc<Real>(rows);
}

/// Outcomes (end time, event) of every subject in a dataset.
inline std::vector<observed_outcome> outcomes_of(const dataset& data) {
  std::vector<observed_outcome> out;
  out.reserve(data.size());
  for (const auto& s : data.subjects) out.push_back({s.end_time, s.event});
  return out;
}

/// Floor used before taking log S: 1 / (2n) for n rows in scope.
inline double survival_floor(std::size_t n) { return 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(n, 1))); }

inline double clamped_log_survival(double s, std::size_t n) { return std::log(std::max(s, survival_floor(n))); }

}  // namespace ltrcf
