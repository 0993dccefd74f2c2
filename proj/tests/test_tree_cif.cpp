#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>

#include <numeric>
#include <set>

#include "support.hpp"

using namespace ltrcf;

namespace {

training_table table_of(std::vector<ltrc_interval> times, std::vector<std::vector<double>> columns, schema s) {
  training_table t;
  t.schema = std::move(s);
  t.times = std::move(times);
  t.columns = std::move(columns);
  for (std::uint32_t i = 0; i < t.times.size(); ++i) {
    t.subject.push_back(i);
    t.subject_ids.push_back(std::to_string(i));
    t.subject_begin.push_back(i);
  }
  t.subject_begin.push_back(static_cast<std::uint32_t>(t.times.size()));
  return t;
}

schema numeric_only(std::size_t p) {
  std::vector<covariate_spec> specs;
  for (std::size_t k = 0; k < p; ++k) specs.push_back({"x" + std::to_string(k), covariate_type::numeric, {}});
  return schema(std::move(specs));
}

std::vector<row_id> all_rows(std::size_t n) {
  std::vector<row_id> r(n);
  std::iota(r.begin(), r.end(), row_id{0});
  return r;
}

/// Two-sample criterion S_L^2 / (n_L n_R) on centered scores for a given left set.
double cut_criterion(std::span<const double> u, const std::vector<bool>& left) {
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  double s = 0.0;
  double nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (left[i]) {
      s += u[i] - mean;
      nl += 1.0;
    }
  }
  const double nr = static_cast<double>(u.size()) - nl;
  return s * s / (nl * nr);
}

std::vector<ltrc_interval> distinct_event_rows(rng_engine& rng, std::size_t n) {
  std::vector<ltrc_interval> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({0.0, 0.1 + uniform_open(rng) * 10.0, true});
  return rows;
}

}  // namespace

TEST(Scores, Examples) {
  const std::vector<ltrc_interval> single{{0, 3, false}};
  EXPECT_EQ(logrank_scores(single)[0], 0.0);

  const std::vector<ltrc_interval> rows{{0, 2, true}, {0, 3, true}, {0, 4, false}};
  const auto u = logrank_scores(rows);
  EXPECT_NEAR(u[0], 1.0 + std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(u[1], 1.0 + std::log(1.0 / 3.0) - 0.0, 1e-15);
  EXPECT_NEAR(u[2], std::log(1.0 / 3.0), 1e-15);

  const std::vector<ltrc_interval> late{{0, 1, true}, {0, 5, false}, {2, 4, false}};
  EXPECT_EQ(logrank_scores(late)[2], 0.0);
}

TEST(Scores, FloorKeepsScoresFinite) {
  const std::vector<ltrc_interval> rows{{0, 1, true}, {0, 2, true}};
  for (double v : logrank_scores(rows)) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(logrank_scores(rows)[1], 1.0 + std::log(0.25), 1e-15);
}

TEST(Scores, NelsonAalenScoresMatchSavageOracle) {
  auto rng = make_rng(31, "savage");
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + uniform_index(rng, 40);
    const auto rows = distinct_event_rows(rng, n);
    const auto u = logrank_scores(rows, score_type::nelson_aalen);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a].right < rows[b].right; });
    double cum = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cum += 1.0 / static_cast<double>(n - i);
      EXPECT_NEAR(u[order[i]], 1.0 - cum, 1e-12);
      total += u[order[i]];
    }
    EXPECT_NEAR(total, 0.0, 1e-10);
  }
}

TEST(Scores, ProductLimitScoresAreRankEquivalentToSavage) {
  auto rng = make_rng(32, "savage-rank");
  const auto rows = distinct_event_rows(rng, 30);
  const auto pl = logrank_scores(rows, score_type::product_limit);
  const auto na = logrank_scores(rows, score_type::nelson_aalen);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < rows.size(); ++b) {
      if (na[a] < na[b]) {
        EXPECT_LT(pl[a], pl[b]);
      }
    }
  }
}

TEST(Selection, PerfectOrderIsSignificantAgainstPermutationOracle) {
  auto rng = make_rng(33, "perfect");
  const auto rows = distinct_event_rows(rng, 20);
  const auto u = logrank_scores(rows);
  std::vector<double> x(rows.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u[i];  // strictly increasing with U

  // Independent oracle: |sum (x - xbar) U| over 1e5 random permutations.
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const auto stat = [&](const std::vector<double>& scores) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - xbar) * scores[i];
    return std::abs(s);
  };
  const double observed = stat(u);
  std::mt19937 oracle_rng(99);
  auto perm = u;
  int exceed = 0;
  for (int b = 0; b < 100000; ++b) {
    std::shuffle(perm.begin(), perm.end(), oracle_rng);
    if (stat(perm) >= observed * (1 - 1e-12)) ++exceed;
  }
  EXPECT_LT(exceed / 1e5, 0.01);

  const auto table = table_of(rows, {x}, numeric_only(1));
  const auto ids = all_rows(rows.size());
  const std::vector<int> cand{0};
  const auto pick = select_split_variable(table, ids, u, cand, cif_params{}, rng);
  ASSERT_TRUE(pick.has_value());
  EXPECT_EQ(pick->variable, 0);
  EXPECT_LT(pick->p_value, 0.01);
}

TEST(Selection, NullSelectionRateIsCalibrated) {
  auto rng = make_rng(34, "null");
  const int resamples = 500;
  int selected = 0;
  const cif_params params;
  for (int r = 0; r < resamples; ++r) {
    auto rows = fixtures::random_ltrc_rows(rng, 100, true, 1000);
    std::vector<double> x(rows.size());
    for (auto& v : x) v = uniform_open(rng);
    const auto u = logrank_scores(rows);
    const auto table = table_of(rows, {x}, numeric_only(1));
    const std::vector<int> cand{0};
    if (select_split_variable(table, all_rows(rows.size()), u, cand, params, rng)) ++selected;
  }
  const boost::math::binomial_distribution<> nominal(resamples, params.alpha);
  const double lo = boost::math::quantile(nominal, 0.005);
  const double hi = boost::math::quantile(boost::math::complement(nominal, 0.005));
  EXPECT_GE(selected, lo);
  EXPECT_LE(selected, hi);
}

TEST(Selection, ConstantCandidatesDoNotSplit) {
  auto rng = make_rng(35, "const");
  const auto rows = distinct_event_rows(rng, 40);
  const auto u = logrank_scores(rows);
  const auto table = table_of(rows, {std::vector<double>(40, 1.0), std::vector<double>(40, -2.0)}, numeric_only(2));
  const std::vector<int> cand{0, 1};
  EXPECT_FALSE(select_split_variable(table, all_rows(40), u, cand, cif_params{}, rng).has_value());
}

TEST(Cutpoint, MaximalSeparation) {
  const std::vector<ltrc_interval> rows(4, ltrc_interval{0, 1, false});
  const auto table = table_of(rows, {{1, 2, 3, 4}}, numeric_only(1));
  const std::vector<double> u{-1, -1, 1, 1};
  const auto rule = best_cutpoint(table, all_rows(4), u, 0, 1);
  ASSERT_TRUE(rule.has_value());
  EXPECT_EQ(rule->threshold, 2.0);
}

TEST(Cutpoint, AllEqualIsTerminal) {
  const std::vector<ltrc_interval> rows(6, ltrc_interval{0, 1, false});
  const auto table = table_of(rows, {std::vector<double>(6, 3.0)}, numeric_only(1));
  const std::vector<double> u{-1, 2, 0, 1, -2, 0};
  EXPECT_FALSE(best_cutpoint(table, all_rows(6), u, 0, 1).has_value());
}

TEST(Cutpoint, NumericMatchesExhaustiveOracle) {
  auto rng = make_rng(36, "cut-num");
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 6 + uniform_index(rng, 30);
    const int minbucket = 1 + static_cast<int>(uniform_index(rng, 3));
    std::vector<double> x(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(uniform_index(rng, 8));
      u[i] = uniform_open(rng) * 2 - 1 + 0.1 * x[i];
    }
    const auto table = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {x}, numeric_only(1));
    double oracle = -1.0;
    for (double c : std::set<double>(x.begin(), x.end())) {
      std::vector<bool> left(n);
      std::size_t nl = 0;
      for (std::size_t i = 0; i < n; ++i) nl += (left[i] = x[i] <= c) ? 1 : 0;
      if (nl < static_cast<std::size_t>(minbucket) || n - nl < static_cast<std::size_t>(minbucket)) continue;
      oracle = std::max(oracle, cut_criterion(u, left));
    }
    const auto rule = best_cutpoint(table, all_rows(n), u, 0, minbucket);
    if (oracle < 0) {
      EXPECT_FALSE(rule.has_value());
      continue;
    }
    ASSERT_TRUE(rule.has_value());
    std::vector<bool> left(n);
    for (std::size_t i = 0; i < n; ++i) left[i] = rule->goes_left(x[i]);
    EXPECT_NEAR(cut_criterion(u, left), oracle, 1e-12 * (1 + oracle));
  }
}

TEST(Cutpoint, CategoricalMatchesExhaustiveSubsetOracle) {
  auto rng = make_rng(37, "cut-cat");
  for (int rep = 0; rep < 100; ++rep) {
    const int levels = 3 + static_cast<int>(uniform_index(rng, 3));
    std::vector<std::string> names;
    for (int l = 0; l < levels; ++l) names.push_back("l" + std::to_string(l));
    const schema s({{"g", covariate_type::categorical, names}});
    const std::size_t n = 10 + uniform_index(rng, 30);
    std::vector<double> x(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(levels)));
      u[i] = uniform_open(rng) - 0.5 + 0.3 * std::sin(3.0 * x[i]);
    }
    const auto table = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {x}, s);
    double oracle = -1.0;
    for (int mask = 1; mask + 1 < (1 << levels); ++mask) {
      std::vector<bool> left(n);
      std::size_t nl = 0;
      for (std::size_t i = 0; i < n; ++i) nl += (left[i] = (mask >> static_cast<int>(x[i])) & 1) ? 1 : 0;
      if (nl == 0 || nl == n) continue;
      oracle = std::max(oracle, cut_criterion(u, left));
    }
    const auto rule = best_cutpoint(table, all_rows(n), u, 0, 1);
    if (oracle < 0) {
      EXPECT_FALSE(rule.has_value());
      continue;
    }
    ASSERT_TRUE(rule.has_value());
    std::vector<bool> left(n);
    for (std::size_t i = 0; i < n; ++i) left[i] = rule->goes_left(x[i]);
    EXPECT_NEAR(cut_criterion(u, left), oracle, 1e-12 * (1 + oracle));
  }
}

TEST(Cutpoint, ThreeLevelMeansIsolateAnExtremeLevel) {
  const schema s({{"g", covariate_type::categorical, {"a", "b", "c"}}});
  const std::vector<double> x{0, 0, 1, 1, 2, 2};
  const std::vector<double> u{-1, -1, 0, 0, 1, 1};
  const auto table = table_of(std::vector<ltrc_interval>(6, ltrc_interval{0, 1, false}), {x}, s);
  const auto rule = best_cutpoint(table, all_rows(6), u, 0, 1);
  ASSERT_TRUE(rule.has_value());
  const bool a = rule->goes_left(0), c = rule->goes_left(2);
  EXPECT_NE(a, c);
}

TEST(Cutpoint, MonotoneTransformPreservesPartition) {
  auto rng = make_rng(38, "monotone");
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 20 + uniform_index(rng, 30);
    std::vector<double> x(n), ex(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = uniform_open(rng) * 4 - 2;
      ex[i] = std::exp(3 * x[i]) + 5;
      u[i] = uniform_open(rng) - (x[i] > 0.3 ? 0.2 : 0.0);
    }
    const auto rows = std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false});
    const auto a = best_cutpoint(table_of(rows, {x}, numeric_only(1)), all_rows(n), u, 0, 3);
    const auto b = best_cutpoint(table_of(rows, {ex}, numeric_only(1)), all_rows(n), u, 0, 3);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) continue;
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(a->goes_left(x[i]), b->goes_left(ex[i]));
    EXPECT_NEAR(std::exp(3 * a->threshold) + 5, b->threshold, 1e-9 * b->threshold);
  }
}

TEST(Growth, BelowMinsplitIsSingleNode) {
  auto rng = make_rng(39, "small");
  const auto rows = distinct_event_rows(rng, 10);
  const auto table = table_of(rows, {std::vector<double>(10, 0.0)}, numeric_only(1));
  const auto t = grow_cif_tree(table, all_rows(10), cif_params{}, rng);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.nodes()[0].leaf.rows.size(), 10u);
}

TEST(Growth, TwoGroupsGiveDepthOneTree) {
  auto rng = make_rng(40, "groups");
  std::vector<ltrc_interval> rows;
  std::vector<double> x;
  for (int i = 0; i < 80; ++i) {
    const bool fast = i % 2 == 0;
    rows.push_back({0.0, (fast ? 0.1 : 10.0) + uniform_open(rng), true});
    x.push_back(fast ? 0.0 : 1.0);
  }
  const auto table = table_of(rows, {x}, numeric_only(1));
  cif_params params;
  params.minsplit = 10;
  params.minbucket = 3;
  const auto t = grow_cif_tree(table, all_rows(rows.size()), params, rng);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.nodes()[0].rule.variable, 0);
  EXPECT_EQ(t.nodes()[0].rule.threshold, 0.0);
  EXPECT_EQ(t.nodes()[1].leaf.rows.size(), 40u);
}

TEST(Growth, NodeSizeInvariantsAndPartition) {
  auto rng = make_rng(41, "sizes");
  const auto d = fixtures::random_dataset(rng, 200, 3);
  const auto table = training_table::from(d);
  cif_params params;
  params.mtry = 2;
  params.minsplit = 15;
  params.minbucket = 5;
  const auto t = grow_cif_tree(table, all_rows(table.rows()), params, rng);
  ASSERT_GT(t.size(), 1u);
  std::vector<std::size_t> reach(t.size(), 0);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto x = table.row_x(i);
    int at = 0;
    while (true) {
      ++reach[static_cast<std::size_t>(at)];
      const auto& node = t.nodes()[static_cast<std::size_t>(at)];
      if (node.terminal()) break;
      at = node.rule.goes_left(x[static_cast<std::size_t>(node.rule.variable)]) ? node.left : node.right;
    }
  }
  std::size_t leaf_total = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& node = t.nodes()[k];
    if (node.terminal()) {
      EXPECT_GE(node.leaf.rows.size(), static_cast<std::size_t>(params.minbucket));
      EXPECT_EQ(node.leaf.rows.size(), reach[k]);
      leaf_total += node.leaf.rows.size();
    } else {
      EXPECT_GE(reach[k], static_cast<std::size_t>(params.minsplit));
      EXPECT_EQ(reach[k], reach[static_cast<std::size_t>(node.left)] + reach[static_cast<std::size_t>(node.right)]);
    }
  }
  EXPECT_EQ(leaf_total, table.rows());
}

TEST(Growth, SameSeedSameTree) {
  auto data_rng = make_rng(42, "det");
  const auto d = fixtures::random_dataset(data_rng, 150, 3);
  const auto table = training_table::from(d);
  cif_params params;
  params.mtry = 2;
  auto r1 = make_rng(5, "tree");
  auto r2 = make_rng(5, "tree");
  const auto a = grow_cif_tree(table, all_rows(table.rows()), params, r1);
  const auto b = grow_cif_tree(table, all_rows(table.rows()), params, r2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.nodes()[k].rule, b.nodes()[k].rule);
    EXPECT_EQ(a.nodes()[k].left, b.nodes()[k].left);
    EXPECT_EQ(a.nodes()[k].leaf.rows, b.nodes()[k].leaf.rows);
  }
}
