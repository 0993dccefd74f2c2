#pragma once

// Brier score, integrated Brier score and integrated L2 distance with inverse
// probability of censoring weights, K-fold IBS cross-validation, and the
// selection summaries used to judge how well CV picks a method.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ltrcf/dynamic_curve.hpp"
#include "ltrcf/error.hpp"
#include "ltrcf/ltrc_core.hpp"
#include "ltrcf/npmle.hpp"
#include "ltrcf/random.hpp"

namespace ltrcf {

// =============================================================================
// IPCW weights
// =============================================================================

/// W(t) = (1 - Y(t)) delta / G(T) + Y(t) / G(t), with Y(t) = 1{T > t}.
/// nullopt when the denominator that applies is zero.
inline std::optional<double> ipcw_weight(const observed_outcome& o, const survival_curve<>& censoring, double t) {
  if (o.time > t) {
    const double g = censoring(t);
    if (!(g > 0.0)) return std::nullopt;
    return 1.0 / g;
  }
  if (!o.event) return 0.0;
  const double g = censoring(o.time);
  if (!(g > 0.0)) return std::nullopt;
  return 1.0 / g;
}

struct metric_value {
  double value = 0.0;
  std::size_t dropped = 0;  // terms skipped because G was zero
};

/// Brier score at t; `predicted[i]` is subject i's estimated curve.
inline metric_value brier(double t, std::span<const survival_curve<>> predicted,
                          std::span<const observed_outcome> outcomes, const survival_curve<>& censoring) {
  if (outcomes.empty()) throw invalid_argument("Brier score needs at least one subject");
  if (predicted.size() != outcomes.size()) throw invalid_argument("one curve is needed per subject");
  metric_value out;
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto w = ipcw_weight(outcomes[i], censoring, t);
    if (!w) {
      ++out.dropped;
      continue;
    }
    const double y = outcomes[i].time > t ? 1.0 : 0.0;
    const double r = y - predicted[i](t);
    sum += *w * r * r;
  }
  out.value = sum / static_cast<double>(outcomes.size());
  return out;
}

// =============================================================================
// Integrated Brier score
// =============================================================================

/// Integration horizon per subject: one common horizon (max observed time of
/// the evaluation set, or a fixed value), or each subject's own observed time.
struct tau_policy {
  enum class kind { common_max, per_subject, fixed } mode = kind::common_max;
  double value = 0.0;

  static tau_policy common_max() { return {}; }
  static tau_policy per_subject() { return {kind::per_subject, 0.0}; }
  static tau_policy fixed(double tau) { return {kind::fixed, tau}; }
};

namespace detail {

/// Merged, sorted breakpoints of two step functions inside (0, tau).
inline std::vector<double> breakpoints(const std::vector<double>& a, const std::vector<double>& b, double tau) {
  std::vector<double> out;
  out.reserve(a.size() + b.size() + 2);
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::remove_if(out.begin(), out.end(), [&](double t) { return !(t > 0.0) || !(t < tau); }), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// (1/tau) int_0^tau W(t) (Y(t) - S(t))^2 dt for one subject, integrated exactly
/// over the joint step grid. nullopt when a needed G value is zero.
inline std::optional<double> subject_ibs(const observed_outcome& o, const survival_curve<>& predicted,
                                         const survival_curve<>& censoring, double tau) {
  if (!(tau > 0.0)) throw invalid_argument("integration horizon must be positive");
  auto grid = detail::breakpoints(predicted.times(), censoring.times(), tau);
  if (o.time > 0.0 && o.time < tau) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), o.time), o.time);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  double total = 0.0;
  double a = 0.0;
  for (std::size_t k = 0; k <= grid.size(); ++k) {
    const double b = k < grid.size() ? grid[k] : tau;
    if (b > a) {
      const auto w = ipcw_weight(o, censoring, a);
      const double y = o.time > a ? 1.0 : 0.0;
      const double r = y - predicted(a);
      if (w) {
        total += *w * r * r * (b - a);
      } else if (r != 0.0) {
        return std::nullopt;
      }
    }
    a = b;
  }
  return total / tau;
}

inline double policy_tau(const tau_policy& policy, std::span<const observed_outcome> outcomes, std::size_t i) {
  switch (policy.mode) {
    case tau_policy::kind::per_subject:
      return outcomes[i].time;
    case tau_policy::kind::fixed:
      return policy.value;
    case tau_policy::kind::common_max:
      break;
  }
  double m = 0.0;
  for (const auto& o : outcomes) m = std::max(m, o.time);
  return m;
}

inline metric_value ibs(std::span<const survival_curve<>> predicted, std::span<const observed_outcome> outcomes,
                        const survival_curve<>& censoring, const tau_policy& policy = tau_policy::common_max()) {
  if (outcomes.empty()) throw invalid_argument("IBS needs at least one subject");
  if (predicted.size() != outcomes.size()) throw invalid_argument("one curve is needed per subject");
  const double common = policy_tau(tau_policy::common_max(), outcomes, 0);
  metric_value out;
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double tau = policy.mode == tau_policy::kind::common_max ? common : policy_tau(policy, outcomes, i);
    const auto v = subject_ibs(outcomes[i], predicted[i], censoring, tau);
    if (!v) {
      ++out.dropped;
      continue;
    }
    sum += *v;
  }
  out.value = sum / static_cast<double>(outcomes.size());
  return out;
}

// =============================================================================
// Integrated L2 against a known truth
// =============================================================================

/// A survival function with exact integrals of its first and second powers.
template <class T>
concept integrable_survival = requires(const T& s, double a, double b) {
  { s(a) } -> std::convertible_to<double>;
  { s.integral(a, b, 1) } -> std::convertible_to<double>;
};

/// Step curve adapter for use as a truth.
class step_truth {
 public:
  explicit step_truth(survival_curve<> curve) : curve_(std::move(curve)) {}
  double operator()(double t) const { return curve_(t); }
  double integral(double a, double b, int power) const {
    double total = 0.0;
    double lo = a;
    auto it = std::upper_bound(curve_.times().begin(), curve_.times().end(), a);
    while (lo < b) {
      const double hi = it == curve_.times().end() ? b : std::min(*it, b);
      total += std::pow(curve_(lo), power) * (hi - lo);
      lo = hi;
      if (it != curve_.times().end()) ++it;
    }
    return total;
  }

 private:
  survival_curve<> curve_;
};

/// (1/T) int_0^T (S(t) - Shat(t))^2 dt using exact integrals of S and S^2 on
/// each constant piece of Shat.
template <integrable_survival Truth>
double subject_l2(const Truth& truth, const survival_curve<>& predicted, double horizon) {
  if (!(horizon > 0.0)) throw invalid_argument("integration horizon must be positive");
  double total = 0.0;
  double a = 0.0;
  const auto& jumps = predicted.times();
  auto it = std::upper_bound(jumps.begin(), jumps.end(), 0.0);
  while (a < horizon) {
    const double b = it == jumps.end() ? horizon : std::min(*it, horizon);
    if (b > a) {
      const double c = predicted(a);
      total += truth.integral(a, b, 2) - 2.0 * c * truth.integral(a, b, 1) + c * c * (b - a);
    }
    a = b;
    if (it != jumps.end()) ++it;
  }
  return std::max(total, 0.0) / horizon;
}

/// L2 distance to a continuous prediction, by adaptive Gauss-Kronrod between
/// the given breakpoints (where either curve may kink).
template <class Truth, class Pred>
double subject_l2_continuous(const Truth& truth, const Pred& predicted, std::vector<double> breaks, double horizon) {
  if (!(horizon > 0.0)) throw invalid_argument("integration horizon must be positive");
  breaks.push_back(0.0);
  breaks.push_back(horizon);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const auto sq = [&](double t) {
    const double d = truth(t) - predicted(t);
    return d * d;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size() && breaks[i] < horizon; ++i) {
    const double hi = std::min(breaks[i + 1], horizon);
    if (hi > breaks[i] && breaks[i] >= 0.0) {
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(sq, breaks[i], hi, 15, 1e-12);
    }
  }
  return total / horizon;
}

template <integrable_survival Truth>
double integrated_l2(std::span<const Truth> truths, std::span<const survival_curve<>> predicted,
                     std::span<const observed_outcome> outcomes) {
  if (truths.size() != predicted.size() || truths.size() != outcomes.size()) {
    throw invalid_argument("truths, curves and outcomes must align");
  }
  if (truths.empty()) throw invalid_argument("integrated L2 needs at least one subject");
  double sum = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) sum += subject_l2(truths[i], predicted[i], outcomes[i].time);
  return sum / static_cast<double>(truths.size());
}

// =============================================================================
// Cross-validation
// =============================================================================

/// Maps a subject record to its estimated curve along its own covariate stream.
using subject_predictor = std::function<survival_curve<>(const subject_record&)>;

struct cv_method {
  std::string name;
  std::function<subject_predictor(const dataset& train)> fit;
};

struct cv_result {
  std::vector<double> error;  // per method, averaged over the folds used
  std::size_t chosen = 0;
  std::size_t folds_used = 0;
  std::size_t folds_skipped = 0;
  std::size_t dropped = 0;
};

/// Subject fold labels: a seeded shuffle dealt round-robin into k folds.
inline std::vector<int> subject_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw invalid_argument("cross-validation needs k >= 2");
  if (static_cast<std::size_t>(k) > n) throw invalid_argument("more folds than subjects");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "cv-folds");
  shuffle(order, rng);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return fold;
}

/// K-fold IBS cross-validation; the censoring curve of each test fold is
/// estimated within that fold. Ties go to the method listed first.
inline cv_result ibs_cv(const dataset& data, std::span<const cv_method> methods, int k, std::uint64_t seed,
                        const tau_policy& policy = tau_policy::common_max()) {
  if (methods.empty()) throw invalid_argument("no methods to compare");
  const auto fold = subject_folds(data.size(), k, seed);
  cv_result out;
  out.error.assign(methods.size(), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const auto test = data.subset(test_idx);
    const auto outcomes = outcomes_of(test);
    if (std::none_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.event; })) {
      ++out.folds_skipped;
      continue;
    }
    const auto train = data.subset(train_idx);
    const auto censoring = km_censoring(outcomes);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto predict = methods[m].fit(train);
      std::vector<survival_curve<>> curves;
      curves.reserve(test.size());
      for (const auto& s : test.subjects) curves.push_back(predict(s));
      const auto v = ibs(curves, outcomes, censoring, policy);
      out.error[m] += v.value;
      out.dropped += v.dropped;
    }
    ++out.folds_used;
  }
  if (out.folds_used == 0) throw degenerate("every fold lacks events");
  for (auto& e : out.error) e /= static_cast<double>(out.folds_used);
  out.chosen = static_cast<std::size_t>(std::min_element(out.error.begin(), out.error.end()) - out.error.begin());
  return out;
}

// =============================================================================
// Selection summaries
// =============================================================================

struct mean_sd {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

inline mean_sd summarize(std::span<const double> v) {
  mean_sd out;
  out.count = v.size();
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

struct selection_summary_result {
  double p_best = 0.0;
  mean_sd r_best;
  mean_sd r_worst;
  std::size_t excluded = 0;  // replicates with a zero best (or worst) error
};

/// l2[r][m]: error of method m in replicate r; choice[r]: index CV picked.
inline selection_summary_result selection_summary(const std::vector<std::vector<double>>& l2,
                                                  std::span<const std::size_t> choice) {
  if (l2.empty()) throw invalid_argument("selection summary needs at least one replicate");
  if (l2.size() != choice.size()) throw invalid_argument("one choice is needed per replicate");
  selection_summary_result out;
  std::vector<double> rb, rw;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < l2.size(); ++r) {
    const auto& row = l2[r];
    if (row.size() < 2) throw invalid_argument("selection summary needs at least two methods");
    if (choice[r] >= row.size()) throw invalid_argument("choice index out of range");
    const double lo = *std::min_element(row.begin(), row.end());
    const double hi = *std::max_element(row.begin(), row.end());
    const double cv = row[choice[r]];
    if (cv == lo) ++hits;
    if (lo == 0.0 || hi == 0.0) {
      ++out.excluded;
      continue;
    }
    rb.push_back(std::abs(lo - cv) / lo);
    rw.push_back(std::abs(hi - cv) / hi);
  }
  out.p_best = static_cast<double>(hits) / static_cast<double>(l2.size());
  out.r_best = summarize(rb);
  out.r_worst = summarize(rw);
  return out;
}

}  // namespace ltrcf
