#pragma once

// Bagged ensembles of LTRC conditional-inference or relative-risk trees:
// subject (or pseudo-subject) bootstrap, hypothetical-curve prediction for a
// fixed covariate vector, out-of-bag estimates and OOB-based mtry tuning.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "ltrcf/dynamic_curve.hpp"
#include "ltrcf/metrics.hpp"
#include "ltrcf/npmle.hpp"
#include "ltrcf/random.hpp"
#include "ltrcf/tree_cif.hpp"
#include "ltrcf/tree_rrf.hpp"

namespace ltrcf {

enum class forest_kind { cif, rrf };
enum class bootstrap_unit { subject, pseudo_subject };

struct forest_params {
  forest_kind kind = forest_kind::cif;
  int trees = 100;
  int mtry = 0;  // 0 selects ceil(sqrt(p))
  int minsplit = 20;
  int minbucket = 7;
  int nodesize = 15;
  bootstrap_unit unit = bootstrap_unit::subject;
  bool resample = true;  // false grows every tree on the full data
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int permutations = 10000;
  score_type scores = score_type::product_limit;
  int threads = 1;

  friend bool operator==(const forest_params&, const forest_params&) = default;
};

inline int default_mtry(std::size_t p) {
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));
}

/// Node-size settings scaled to the pseudo-subject count n: each is the
/// larger of its usual default and ceil(sqrt(n)).
inline forest_params proposed_params(std::size_t n, std::size_t p, forest_kind kind, forest_params base = {}) {
  if (n == 0) throw invalid_argument("proposed parameters need n >= 1");
  const int root = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  base.kind = kind;
  base.minsplit = std::max(20, root);
  base.minbucket = std::max(7, root);
  base.nodesize = std::max(15, root);
  base.mtry = default_mtry(p);
  return base;
}

/// {1, 2, 3, ceil(sqrt p), ceil(p/2), p} restricted to [1, p], without repeats.
inline std::vector<int> default_mtry_grid(std::size_t p) {
  const int pi = static_cast<int>(p);
  std::vector<int> g{1, 2, 3, default_mtry(p), (pi + 1) / 2, pi};
  g.erase(std::remove_if(g.begin(), g.end(), [&](int m) { return m < 1 || m > pi; }), g.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

class forest {
 public:
  forest_params params;
  training_table table;
  std::vector<std::vector<row_id>> inbag;  // sorted multiset of rows per tree
  std::vector<cif_tree> cif_trees;
  std::vector<rrf_tree> rrf_trees;
  std::vector<cumulative_hazard_curve<>> baselines;  // per tree, relative-risk forests only
  cumulative_hazard_curve<> pooled_baseline;
  std::size_t degenerate_trees = 0;  // trees whose bootstrap sample had no events

  std::size_t size() const { return inbag.size(); }

  /// Rebuilds lookup structures; call after filling the public members.
  void finalize() {
    index_ = std::make_shared<ltrc_risk_index>(table.times);
    subject_inbag_.assign(inbag.size(), std::vector<std::uint16_t>(table.subjects(), 0));
    for (std::size_t b = 0; b < inbag.size(); ++b) {
      for (auto r : inbag[b]) {
        auto& c = subject_inbag_[b][table.subject[r]];
        if (c < UINT16_MAX) ++c;
      }
    }
  }

  bool subject_in_bag(std::size_t tree, std::size_t subject) const { return subject_inbag_[tree][subject] > 0; }

  std::size_t oob_tree_count(std::size_t subject) const {
    std::size_t n = 0;
    for (std::size_t b = 0; b < size(); ++b) n += subject_in_bag(b, subject) ? 0 : 1;
    return n;
  }

  /// Hypothetical survival curve for covariate vector x, aggregated over the
  /// trees accepted by `use`.
  template <class Filter>
  survival_curve<> aggregate(std::span<const double> x, Filter&& use) const {
    table.schema.validate(x);
    if (params.kind == forest_kind::rrf) {
      double phi = 0.0;
      std::size_t used = 0;
      for (std::size_t b = 0; b < rrf_trees.size(); ++b) {
        if (!use(b)) continue;
        phi += rrf_trees[b].leaf_of(x).relative_risk;
        ++used;
      }
      if (used == 0) throw no_oob_trees("no trees available for this estimate");
      phi /= static_cast<double>(used);
      std::vector<double> values;
      values.reserve(pooled_baseline.jumps());
      for (double h : pooled_baseline.values()) values.push_back(std::exp(-h * phi));
      return {1.0, pooled_baseline.times(), std::move(values)};
    }
    std::vector<double> w(table.rows(), 0.0);
    std::size_t used = 0;
    for (std::size_t b = 0; b < cif_trees.size(); ++b) {
      if (!use(b)) continue;
      const auto& rows = cif_trees[b].leaf_of(x).rows;
      if (rows.empty()) continue;
      const double share = 1.0 / static_cast<double>(rows.size());
      for (auto r : rows) w[r] += share;
      ++used;
    }
    if (used == 0) throw no_oob_trees("no trees available for this estimate");
    return km_from_table(index_->table<double>(w));
  }

  survival_curve<> predict(std::span<const double> x) const {
    return aggregate(x, [](std::size_t) { return true; });
  }

  /// Aggregation restricted to trees for which `subject` is out of bag.
  survival_curve<> predict_oob(std::span<const double> x, std::size_t subject) const {
    if (oob_tree_count(subject) == 0) {
      throw no_oob_trees("subject '" + table.subject_ids[subject] + "' is in bag for every tree");
    }
    return aggregate(x, [&](std::size_t b) { return !subject_in_bag(b, subject); });
  }

 private:
  std::shared_ptr<const ltrc_risk_index> index_;
  std::vector<std::vector<std::uint16_t>> subject_inbag_;
};

// =============================================================================
// Fitting
// =============================================================================

namespace detail {

inline std::vector<row_id> draw_inbag(const training_table& table, const forest_params& params, rng_engine& rng) {
  std::vector<row_id> rows;
  if (!params.resample) {
    rows.resize(table.rows());
    std::iota(rows.begin(), rows.end(), row_id{0});
    return rows;
  }
  if (params.unit == bootstrap_unit::subject) {
    const auto n = table.subjects();
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = uniform_index(rng, n);
      for (auto r = table.subject_begin[s]; r < table.subject_begin[s + 1]; ++r) rows.push_back(r);
    }
  } else {
    const auto n = table.rows();
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<row_id>(uniform_index(rng, n)));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

inline cif_params cif_params_of(const forest_params& p, int mtry) {
  cif_params c;
  c.mtry = mtry;
  c.minsplit = p.minsplit;
  c.minbucket = p.minbucket;
  c.alpha = p.alpha;
  c.permutations = p.permutations;
  c.scores = p.scores;
  return c;
}

inline forest fit_forest(const dataset& data, forest_params params) {
  if (data.size() == 0) throw invalid_argument("cannot fit a forest on an empty dataset");
  data.validate();
  if (params.trees < 1) throw invalid_argument("a forest needs at least one tree");
  const auto p = data.schema.size();
  if (params.mtry == 0) params.mtry = default_mtry(p);
  if (params.mtry < 1 || static_cast<std::size_t>(params.mtry) > std::max<std::size_t>(p, 1)) {
    throw invalid_argument("mtry must lie in [1, p]");
  }
  if (params.minsplit < 1 || params.minbucket < 1 || params.nodesize < 1) {
    throw invalid_argument("node sizes must be positive");
  }

  forest f;
  f.params = params;
  f.table = training_table::from(data);
  const auto B = static_cast<std::size_t>(params.trees);
  f.inbag.resize(B);
  if (params.kind == forest_kind::cif) {
    f.cif_trees.resize(B);
  } else {
    f.rrf_trees.resize(B);
    f.baselines.resize(B);
  }
  std::vector<std::uint8_t> degenerate_flags(B, 0);

  detail::parallel_for(B, params.threads, [&](std::size_t b) {
    auto rng = make_rng(params.seed, "tree", b);
    auto rows = detail::draw_inbag(f.table, params, rng);
    const bool any_event = std::any_of(rows.begin(), rows.end(), [&](row_id r) { return f.table.times[r].event; });
    degenerate_flags[b] = any_event ? 0 : 1;
    f.inbag[b] = rows;
    if (params.kind == forest_kind::cif) {
      f.cif_trees[b] = grow_cif_tree(f.table, std::move(rows), cif_params_of(params, params.mtry), rng);
      return;
    }
    std::vector<poisson_datum> pdata(f.table.rows());
    if (any_event) {
      f.baselines[b] = na_ltrc<double>(f.table.gather_times(rows));
      std::vector<row_id> unique_rows(rows);
      unique_rows.erase(std::unique(unique_rows.begin(), unique_rows.end()), unique_rows.end());
      const auto data_b = make_poisson_data(f.table.gather_times(unique_rows), f.baselines[b]);
      for (std::size_t i = 0; i < unique_rows.size(); ++i) pdata[unique_rows[i]] = data_b[i];
    }
    f.rrf_trees[b] = grow_rrf_tree(f.table, std::move(rows), pdata, rrf_params{params.mtry, params.nodesize}, rng);
  });

  f.degenerate_trees = static_cast<std::size_t>(std::count(degenerate_flags.begin(), degenerate_flags.end(), 1));
  if (params.kind == forest_kind::rrf) f.pooled_baseline = na_ltrc<double>(f.table.times);
  f.finalize();
  return f;
}

// =============================================================================
// Curves along covariate streams
// =============================================================================

/// Dynamic estimate along a query stream.
inline survival_curve<> predict_stream(const forest& f, const covariate_stream& stream) {
  stream.validate();
  std::vector<survival_curve<>> segments;
  segments.reserve(stream.segments());
  for (const auto& x : stream.values) segments.push_back(f.predict(x));
  return dynamic_curve(segments, stream.change_times);
}

/// Out-of-bag hypothetical curves for each pseudo-subject row of a training subject.
inline std::vector<survival_curve<>> oob_survival(const forest& f, std::size_t subject) {
  if (subject >= f.table.subjects()) throw invalid_argument("subject index out of range");
  std::vector<survival_curve<>> out;
  for (auto r = f.table.subject_begin[subject]; r < f.table.subject_begin[subject + 1]; ++r) {
    out.push_back(f.predict_oob(f.table.row_x(r), subject));
  }
  return out;
}

/// Out-of-bag dynamic curve along the subject's own observed stream.
inline survival_curve<> oob_dynamic_curve(const forest& f, std::size_t subject) {
  const auto segments = oob_survival(f, subject);
  std::vector<double> starts;
  for (auto r = f.table.subject_begin[subject]; r < f.table.subject_begin[subject + 1]; ++r) {
    starts.push_back(f.table.times[r].left);
  }
  return dynamic_curve(segments, starts);
}

inline subject_predictor forest_predictor(std::shared_ptr<const forest> f) {
  return [f](const subject_record& s) { return predict_stream(*f, stream_of(s)); };
}

// =============================================================================
// mtry tuning
// =============================================================================

/// OOB integrated Brier score of a fitted forest over subjects with OOB trees.
inline metric_value oob_ibs(const forest& f, const dataset& data, const tau_policy& policy = tau_policy::common_max()) {
  const auto all = outcomes_of(data);
  const auto censoring = km_censoring(all);
  std::vector<survival_curve<>> curves;
  std::vector<observed_outcome> used;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (f.oob_tree_count(i) == 0) {
      ++skipped;
      continue;
    }
    curves.push_back(oob_dynamic_curve(f, i));
    used.push_back(all[i]);
  }
  if (used.empty()) throw no_oob_trees("no subject has out-of-bag trees");
  auto v = ibs(curves, used, censoring, policy);
  v.dropped += skipped;
  return v;
}

struct tune_result {
  int best = 0;
  std::vector<int> grid;
  std::vector<double> oob_error;
  std::vector<std::shared_ptr<const forest>> fits;  // one per grid value

  std::shared_ptr<const forest> best_fit() const {
    return fits[static_cast<std::size_t>(std::find(grid.begin(), grid.end(), best) - grid.begin())];
  }
};

/// Fits one forest per grid value with the same seed and keeps the mtry with
/// the lowest OOB IBS (ties to the smaller mtry).
inline tune_result tune_mtry(const dataset& data, const forest_params& params, std::vector<int> grid) {
  const auto p = static_cast<int>(data.schema.size());
  if (grid.empty()) grid = default_mtry_grid(data.schema.size());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (int m : grid) {
    if (m < 1 || m > p) throw invalid_argument("mtry grid values must lie in [1, p]");
  }
  tune_result out;
  out.grid = grid;
  for (int m : grid) {
    auto q = params;
    q.mtry = m;
    auto f = std::make_shared<const forest>(fit_forest(data, q));
    out.oob_error.push_back(oob_ibs(*f, data).value);
    out.fits.push_back(std::move(f));
  }
  const auto best = std::min_element(out.oob_error.begin(), out.oob_error.end()) - out.oob_error.begin();
  out.best = grid[static_cast<std::size_t>(best)];
  return out;
}

}  // namespace ltrcf
