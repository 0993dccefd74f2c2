#pragma once

// LTRC conditional-inference tree.
//
// Each node computes log-rank scores from the node-local product-limit
// estimate, tests the association between every candidate covariate and those
// scores with the permutation-framework linear statistic, and splits the
// covariate with the smallest p-value when the Bonferroni-adjusted minimum is
// at most alpha. The cutpoint maximizes the standardized two-sample statistic.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ltrcf/npmle.hpp"
#include "ltrcf/random.hpp"
#include "ltrcf/tree.hpp"

namespace ltrcf {

/// How log S is obtained for the scores. product_limit uses log of the
/// Kaplan-Meier curve; nelson_aalen uses -Lambda (the Savage-score form).
enum class score_type { product_limit, nelson_aalen };

struct cif_params {
  int mtry = 1;
  int minsplit = 20;
  int minbucket = 7;
  double alpha = 0.05;
  int permutations = 10000;
  /// Nodes smaller than this use Monte-Carlo permutation p-values.
  int asymptotic_min_rows = 30;
  score_type scores = score_type::product_limit;
};

struct cif_leaf {
  std::vector<row_id> rows;  // in-bag training rows, with bootstrap multiplicity
};

using cif_tree = tree<cif_leaf>;

// =============================================================================
// Scores
// =============================================================================

/// U = delta + log S(R) - log S(L), with S fitted on exactly these rows.
inline std::vector<double> logrank_scores(std::span<const ltrc_interval> rows,
                                          score_type type = score_type::product_limit) {
  std::vector<double> u(rows.size());
  if (rows.empty()) return u;
  if (type == score_type::product_limit) {
    const auto s = km_ltrc(rows);
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      u[i] = (rows[i].event ? 1.0 : 0.0) + clamped_log_survival(s(rows[i].right), n) -
             clamped_log_survival(s(rows[i].left), n);
    }
  } else {
    const auto h = na_ltrc(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      u[i] = (rows[i].event ? 1.0 : 0.0) - (h(rows[i].right) - h(rows[i].left));
    }
  }
  return u;
}

// =============================================================================
// Association tests
// =============================================================================

struct association_test {
  int variable = -1;
  double statistic = 0.0;  // |z| for numeric, quadratic form for categorical
  double p_value = 1.0;
  int df = 1;
};

struct split_selection {
  int variable = -1;
  double p_value = 1.0;
  double adjusted_p_value = 1.0;
};

namespace detail {

inline double normal_two_sided(double z) { return std::erfc(z / std::sqrt(2.0)); }

/// Centered scores and their (1/n) variance.
struct centered_scores {
  std::vector<double> h;
  double variance = 0.0;
};

inline centered_scores center(std::span<const double> scores) {
  centered_scores c;
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  c.h.resize(scores.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    c.h[i] = scores[i] - mean;
    ss += c.h[i] * c.h[i];
  }
  c.variance = ss / n;
  return c;
}

inline bool tiny_variance(double variance, std::span<const double> scores) {
  double scale = 0.0;
  for (double s : scores) scale = std::max(scale, std::abs(s));
  return !(variance > 1e-24 * std::max(1.0, scale * scale));
}

/// Numeric covariate: standardized |sum (x - xbar) h| with its permutation variance.
class numeric_statistic {
 public:
  numeric_statistic(std::span<const double> x, const centered_scores& c) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    g_.resize(x.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g_[i] = x[i] - mean;
      ss += g_[i] * g_[i];
    }
    sd_ = std::sqrt(c.variance * n / (n - 1.0) * ss);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    constant_ = *lo == *hi || !(sd_ > 0.0);
  }

  bool constant() const { return constant_; }

  double operator()(std::span<const double> h) const {
    double t = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) t += g_[i] * h[i];
    return std::abs(t) / sd_;
  }

 private:
  std::vector<double> g_;
  double sd_ = 0.0;
  bool constant_ = true;
};

/// Categorical covariate with indicator coding: quadratic form with the
/// generalized inverse of the permutation covariance, df = levels present - 1.
class categorical_statistic {
 public:
  categorical_statistic(std::span<const double> x, int levels, const centered_scores& c)
      : level_(x.size()), counts_(static_cast<std::size_t>(levels), 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      level_[i] = static_cast<int>(x[i]);
      counts_[static_cast<std::size_t>(level_[i])] += 1.0;
    }
    present_ = 0;
    for (double m : counts_) present_ += m > 0 ? 1 : 0;
    const double n = static_cast<double>(x.size());
    scale_ = (n - 1.0) / (n * c.variance);
  }

  bool constant() const { return present_ < 2; }
  int df() const { return present_ - 1; }

  double operator()(std::span<const double> h) const {
    sums_.assign(counts_.size(), 0.0);
    for (std::size_t i = 0; i < h.size(); ++i) sums_[static_cast<std::size_t>(level_[i])] += h[i];
    double q = 0.0;
    for (std::size_t l = 0; l < counts_.size(); ++l) {
      if (counts_[l] > 0) q += sums_[l] * sums_[l] / counts_[l];
    }
    return scale_ * q;
  }

 private:
  std::vector<int> level_;
  std::vector<double> counts_;
  mutable std::vector<double> sums_;
  int present_ = 0;
  double scale_ = 1.0;
};

template <class Statistic>
double permutation_p_value(const Statistic& stat, double observed, const centered_scores& c, int draws,
                           rng_engine& rng) {
  std::vector<double> h = c.h;
  int exceed = 0;
  const double bar = observed * (1.0 - 1e-12);
  for (int b = 0; b < draws; ++b) {
    shuffle(h, rng);
    if (stat(h) >= bar) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(draws);
}

}  // namespace detail

/// Tests one covariate against the node's scores. Returns nullopt when the
/// covariate (or the scores) have zero variance in the node.
inline std::optional<association_test> test_association(std::span<const double> x, bool categorical, int levels,
                                                        std::span<const double> scores, const cif_params& params,
                                                        rng_engine& rng) {
  if (x.size() < 2) return std::nullopt;
  const auto c = detail::center(scores);
  if (detail::tiny_variance(c.variance, scores)) return std::nullopt;
  const bool small = static_cast<int>(x.size()) < params.asymptotic_min_rows;
  association_test out;
  if (categorical) {
    detail::categorical_statistic stat(x, levels, c);
    if (stat.constant()) return std::nullopt;
    out.statistic = stat(c.h);
    out.df = stat.df();
    out.p_value = small ? detail::permutation_p_value(stat, out.statistic, c, params.permutations, rng)
                        : boost::math::gamma_q(0.5 * out.df, 0.5 * out.statistic);
  } else {
    detail::numeric_statistic stat(x, c);
    if (stat.constant()) return std::nullopt;
    out.statistic = stat(c.h);
    out.p_value = small ? detail::permutation_p_value(stat, out.statistic, c, params.permutations, rng)
                        : detail::normal_two_sided(out.statistic);
  }
  return out;
}

namespace detail {

inline std::vector<double> gather(const std::vector<double>& column, std::span<const row_id> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = column[rows[i]];
  return out;
}

}  // namespace detail

/// Picks the candidate with the smallest p-value when the Bonferroni-adjusted
/// minimum is <= alpha; nullopt means the node stops splitting.
inline std::optional<split_selection> select_split_variable(const training_table& table,
                                                            std::span<const row_id> rows,
                                                            std::span<const double> scores,
                                                            std::span<const int> candidates,
                                                            const cif_params& params, rng_engine& rng) {
  if (candidates.empty()) throw invalid_argument("no candidate covariates");
  std::optional<association_test> best;
  for (int k : candidates) {
    const auto ku = static_cast<std::size_t>(k);
    const auto x = detail::gather(table.columns[ku], rows);
    auto t = test_association(x, table.schema.is_categorical(ku), table.schema.level_count(ku), scores, params, rng);
    if (!t) continue;
    t->variable = k;
    if (!best || t->p_value < best->p_value || (t->p_value == best->p_value && k < best->variable)) best = t;
  }
  if (!best) return std::nullopt;
  const double adjusted = std::min(1.0, best->p_value * static_cast<double>(candidates.size()));
  if (!(adjusted <= params.alpha)) return std::nullopt;
  return split_selection{best->variable, best->p_value, adjusted};
}

// =============================================================================
// Cutpoints
// =============================================================================

namespace detail {

/// Running best two-sample split: maximizes S_L^2 / (n_L n_R) over cuts visited
/// in increasing n_L; near-ties keep the earlier (smaller left child) cut.
struct cut_tracker {
  double best = -1.0;
  std::size_t n_left = 0;
  bool offer(double s_left, std::size_t n_left_, std::size_t n) {
    const double nl = static_cast<double>(n_left_);
    const double crit = s_left * s_left / (nl * (static_cast<double>(n) - nl));
    if (crit > best * (1.0 + 1e-12) + 1e-300) {
      best = crit;
      n_left = n_left_;
      return true;
    }
    return false;
  }
};

}  // namespace detail

/// Best binary split of `variable` for the given scores honoring minbucket on
/// both sides, or nullopt when no feasible cut exists.
inline std::optional<split_rule> best_cutpoint(const training_table& table, std::span<const row_id> rows,
                                               std::span<const double> scores, int variable, int minbucket) {
  const auto k = static_cast<std::size_t>(variable);
  const std::size_t n = rows.size();
  const auto min_side = static_cast<std::size_t>(std::max(minbucket, 1));
  if (n < 2 * min_side) return std::nullopt;
  const auto c = detail::center(scores);
  const auto& col = table.columns[k];
  detail::cut_tracker track;

  if (!table.schema.is_categorical(k)) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return col[rows[a]] < col[rows[b]]; });
    double s_left = 0.0;
    std::optional<double> threshold;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      s_left += c.h[order[i]];
      const double here = col[rows[order[i]]];
      const double next = col[rows[order[i + 1]]];
      if (here == next) continue;
      const std::size_t nl = i + 1;
      if (nl < min_side || n - nl < min_side) continue;
      if (track.offer(s_left, nl, n)) threshold = here;
    }
    if (!threshold) return std::nullopt;
    return split_rule{variable, *threshold, {}};
  }

  // Categorical: order present levels by mean score, then cut as if ordinal.
  const auto levels = static_cast<std::size_t>(table.schema.level_count(k));
  std::vector<double> sum(levels, 0.0);
  std::vector<std::size_t> count(levels, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(col[rows[i]]);
    sum[l] += c.h[i];
    ++count[l];
  }
  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < levels; ++l) {
    if (count[l] > 0) order.push_back(l);
  }
  if (order.size() < 2) return std::nullopt;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return sum[a] / static_cast<double>(count[a]) < sum[b] / static_cast<double>(count[b]);
  });
  double s_left = 0.0;
  std::size_t nl = 0;
  std::optional<std::size_t> cut;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    s_left += sum[order[j]];
    nl += count[order[j]];
    if (nl < min_side || n - nl < min_side) continue;
    if (track.offer(s_left, nl, n)) cut = j;
  }
  if (!cut) return std::nullopt;
  split_rule rule{variable, 0.0, std::vector<std::uint8_t>(levels, 0)};
  std::vector<std::uint8_t> present(levels, 0);
  for (auto l : order) present[l] = 1;
  for (std::size_t j = 0; j <= *cut; ++j) rule.left_levels[order[j]] = 1;
  detail::assign_absent_levels(rule.left_levels, present, track.n_left, n - track.n_left);
  return rule;
}

// =============================================================================
// Growth
// =============================================================================

/// Grows one tree on the given training rows (duplicates carry bootstrap
/// weight). Nodes are expanded depth-first, left child first, so the random
/// stream is consumed in a fixed order.
inline cif_tree grow_cif_tree(const training_table& table, std::vector<row_id> rows, const cif_params& params,
                              rng_engine& rng) {
  if (rows.empty()) throw invalid_argument("cannot grow a tree on zero rows");
  const int p = static_cast<int>(table.covariates());
  const int mtry = std::clamp(params.mtry, 1, std::max(p, 1));
  cif_tree t;
  auto& nodes = t.nodes();
  nodes.emplace_back();
  std::vector<std::pair<int, std::vector<row_id>>> stack;
  stack.emplace_back(0, std::move(rows));
  while (!stack.empty()) {
    const int at = stack.back().first;
    std::vector<row_id> node_rows = std::move(stack.back().second);
    stack.pop_back();
    const auto make_terminal = [&] { nodes[static_cast<std::size_t>(at)].leaf.rows = std::move(node_rows); };
    if (static_cast<int>(node_rows.size()) < params.minsplit || p == 0) {
      make_terminal();
      continue;
    }
    const auto times = table.gather_times(node_rows);
    const auto scores = logrank_scores(times, params.scores);
    const auto candidates = sample_without_replacement(rng, p, mtry);
    const auto chosen = select_split_variable(table, node_rows, scores, candidates, params, rng);
    if (!chosen) {
      make_terminal();
      continue;
    }
    auto rule = best_cutpoint(table, node_rows, scores, chosen->variable, params.minbucket);
    if (!rule) {
      make_terminal();
      continue;
    }
    std::vector<row_id> left, right;
    detail::partition_rows(table, node_rows, *rule, left, right);
    const int li = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    auto& node = nodes[static_cast<std::size_t>(at)];
    node.rule = std::move(*rule);
    node.left = li;
    node.right = li + 1;
    stack.emplace_back(li + 1, std::move(right));
    stack.emplace_back(li, std::move(left));
  }
  return t;
}

}  // namespace ltrcf
