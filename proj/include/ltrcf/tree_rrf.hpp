#pragma once

// LTRC relative-risk tree: Poisson deviance splitting with exposure
// s = Lambda0(R) - Lambda0(L) and count c = delta for each pseudo-subject row.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ltrcf/npmle.hpp"
#include "ltrcf/random.hpp"
#include "ltrcf/tree.hpp"

namespace ltrcf {

struct poisson_datum {
  double exposure = 0.0;
  double count = 0.0;
};

struct rrf_params {
  int mtry = 1;
  int nodesize = 15;
};

struct rrf_leaf {
  double relative_risk = 0.0;
  double events = 0.0;
  double exposure = 0.0;
};

using rrf_tree = tree<rrf_leaf>;

inline std::vector<poisson_datum> make_poisson_data(std::span<const ltrc_interval> rows,
                                                    const cumulative_hazard_curve<>& baseline) {
  std::vector<poisson_datum> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = baseline(rows[i].right) - baseline(rows[i].left);
    if (rows[i].event && !(s > 0.0)) {
      throw degenerate("event at " + std::to_string(rows[i].right) + " has zero baseline exposure");
    }
    out[i] = {std::max(s, 0.0), rows[i].event ? 1.0 : 0.0};
  }
  return out;
}

/// Maximum-likelihood relative risk sum(c) / sum(s); 0 when there are no events.
inline double relative_risk(double events, double exposure) {
  return events > 0.0 ? events / exposure : 0.0;
}

/// Poisson deviance of a node, with 0 log 0 = 0.
inline double node_deviance(std::span<const poisson_datum> data) {
  double c_sum = 0.0, s_sum = 0.0;
  for (const auto& d : data) {
    c_sum += d.count;
    s_sum += d.exposure;
  }
  const double phi = relative_risk(c_sum, s_sum);
  double dev = 0.0;
  for (const auto& d : data) {
    const double mu = d.exposure * phi;
    const double log_term = d.count > 0.0 ? d.count * std::log(d.count / mu) : 0.0;
    dev += 2.0 * (log_term - (d.count - mu));
  }
  return dev;
}

namespace detail {

/// C log(C/S): the only part of the deviance that changes under a split.
inline double poisson_profile(double events, double exposure) {
  return events > 0.0 ? events * std::log(events / exposure) : 0.0;
}

}  // namespace detail

struct rrf_split {
  split_rule rule;
  double reduction = 0.0;
  std::size_t n_left = 0;
};

/// Deviance-maximizing split over the candidate covariates with at least
/// `nodesize` rows per child; nullopt when no split reduces the deviance.
inline std::optional<rrf_split> best_rrf_split(const training_table& table, std::span<const row_id> rows,
                                               std::span<const poisson_datum> pdata, std::span<const int> candidates,
                                               int nodesize) {
  const std::size_t n = rows.size();
  const auto min_side = static_cast<std::size_t>(std::max(nodesize, 1));
  if (n < 2 * min_side) return std::nullopt;
  double c_total = 0.0, s_total = 0.0;
  for (auto r : rows) {
    c_total += pdata[r].count;
    s_total += pdata[r].exposure;
  }
  if (!(c_total > 0.0)) return std::nullopt;
  const double parent = detail::poisson_profile(c_total, s_total);
  const double tol = 1e-12 * (1.0 + c_total);

  std::optional<rrf_split> best;
  const auto offer = [&](int variable, double c_left, double s_left, std::size_t nl, auto&& make_rule) {
    if (nl < min_side || n - nl < min_side) return;
    const double red = 2.0 * (detail::poisson_profile(c_left, s_left) +
                              detail::poisson_profile(c_total - c_left, s_total - s_left) - parent);
    if (!(red > tol)) return;
    bool take = !best;
    if (best) {
      const double scale = 1e-12 * std::max(1.0, std::abs(best->reduction));
      if (red > best->reduction + scale) {
        take = true;
      } else if (red >= best->reduction - scale) {
        take = nl < best->n_left || (nl == best->n_left && variable < best->rule.variable);
      }
    }
    if (take) best = rrf_split{make_rule(), red, nl};
  };

  for (int k : candidates) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& col = table.columns[ku];
    if (!table.schema.is_categorical(ku)) {
      std::vector<row_id> sorted(rows.begin(), rows.end());
      std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return col[a] < col[b]; });
      double c_left = 0.0, s_left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        c_left += pdata[sorted[i]].count;
        s_left += pdata[sorted[i]].exposure;
        const double here = col[sorted[i]];
        if (here == col[sorted[i + 1]]) continue;
        offer(k, c_left, s_left, i + 1, [&] { return split_rule{k, here, {}}; });
      }
      continue;
    }
    const auto levels = static_cast<std::size_t>(table.schema.level_count(ku));
    std::vector<double> cs(levels, 0.0), ss(levels, 0.0);
    std::vector<std::size_t> count(levels, 0);
    for (auto r : rows) {
      const auto l = static_cast<std::size_t>(col[r]);
      cs[l] += pdata[r].count;
      ss[l] += pdata[r].exposure;
      ++count[l];
    }
    std::vector<std::size_t> order;
    std::vector<std::uint8_t> present(levels, 0);
    for (std::size_t l = 0; l < levels; ++l) {
      if (count[l] > 0) {
        order.push_back(l);
        present[l] = 1;
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return relative_risk(cs[a], ss[a]) < relative_risk(cs[b], ss[b]); });
    double c_left = 0.0, s_left = 0.0;
    std::size_t nl = 0;
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      c_left += cs[order[j]];
      s_left += ss[order[j]];
      nl += count[order[j]];
      offer(k, c_left, s_left, nl, [&] {
        split_rule rule{k, 0.0, std::vector<std::uint8_t>(levels, 0)};
        for (std::size_t i = 0; i <= j; ++i) rule.left_levels[order[i]] = 1;
        detail::assign_absent_levels(rule.left_levels, present, nl, n - nl);
        return rule;
      });
    }
  }
  return best;
}

/// Grows one relative-risk tree; pdata is indexed by training row id.
inline rrf_tree grow_rrf_tree(const training_table& table, std::vector<row_id> rows,
                              std::span<const poisson_datum> pdata, const rrf_params& params, rng_engine& rng) {
  if (rows.empty()) throw invalid_argument("cannot grow a tree on zero rows");
  if (pdata.size() != table.rows()) throw invalid_argument("poisson data must cover every training row");
  const int p = static_cast<int>(table.covariates());
  const int mtry = std::clamp(params.mtry, 1, std::max(p, 1));
  rrf_tree t;
  auto& nodes = t.nodes();
  nodes.emplace_back();
  std::vector<std::pair<int, std::vector<row_id>>> stack;
  stack.emplace_back(0, std::move(rows));
  while (!stack.empty()) {
    const int at = stack.back().first;
    std::vector<row_id> node_rows = std::move(stack.back().second);
    stack.pop_back();
    std::optional<rrf_split> split;
    if (static_cast<int>(node_rows.size()) >= 2 * params.nodesize && p > 0) {
      const auto candidates = sample_without_replacement(rng, p, mtry);
      split = best_rrf_split(table, node_rows, pdata, candidates, params.nodesize);
    }
    if (!split) {
      auto& leaf = nodes[static_cast<std::size_t>(at)].leaf;
      for (auto r : node_rows) {
        leaf.events += pdata[r].count;
        leaf.exposure += pdata[r].exposure;
      }
      leaf.relative_risk = relative_risk(leaf.events, leaf.exposure);
      continue;
    }
    std::vector<row_id> left, right;
    detail::partition_rows(table, node_rows, split->rule, left, right);
    const int li = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    auto& node = nodes[static_cast<std::size_t>(at)];
    node.rule = std::move(split->rule);
    node.left = li;
    node.right = li + 1;
    stack.emplace_back(li + 1, std::move(right));
    stack.emplace_back(li, std::move(left));
  }
  return t;
}

}  // namespace ltrcf
