#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "oracles.hpp"
#include "support.hpp"

using namespace ltrcf;

namespace {

training_table table_of(std::vector<ltrc_interval> times, std::vector<std::vector<double>> columns) {
  training_table t;
  std::vector<covariate_spec> specs;
  for (std::size_t k = 0; k < columns.size(); ++k) specs.push_back({"x" + std::to_string(k), covariate_type::numeric, {}});
  t.schema = schema(std::move(specs));
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

std::vector<row_id> all_rows(std::size_t n) {
  std::vector<row_id> r(n);
  std::iota(r.begin(), r.end(), row_id{0});
  return r;
}

double deviance_of(std::span<const poisson_datum> pdata, std::span<const row_id> ids) {
  std::vector<poisson_datum> sub;
  for (auto r : ids) sub.push_back(pdata[r]);
  return node_deviance(sub);
}

}  // namespace

TEST(PoissonData, Examples) {
  const cumulative_hazard_curve<> step(0.0, {2.0}, {1.0 / 3.0});
  const std::vector<ltrc_interval> a{{0, 2, true}, {0, 1, false}};
  const auto pa = make_poisson_data(a, step);
  EXPECT_DOUBLE_EQ(pa[0].exposure, 1.0 / 3.0);
  EXPECT_EQ(pa[0].count, 1.0);
  EXPECT_EQ(pa[1].exposure, 0.0);
  EXPECT_EQ(pa[1].count, 0.0);

  const cumulative_hazard_curve<> half(0.0, {1.0, 3.0}, {0.25, 0.75});
  const std::vector<ltrc_interval> b{{2, 4, false}};
  EXPECT_DOUBLE_EQ(make_poisson_data(b, half)[0].exposure, 0.5);
}

TEST(PoissonData, EventWithoutExposureIsDegenerate) {
  const cumulative_hazard_curve<> step(0.0, {2.0}, {1.0});
  const std::vector<ltrc_interval> rows{{0, 1, true}};
  try {
    make_poisson_data(rows, step);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::degenerate);
  }
}

TEST(Deviance, Examples) {
  const std::vector<poisson_datum> sat{{1, 1}};
  EXPECT_NEAR(node_deviance(sat), 0.0, 1e-15);
  const std::vector<poisson_datum> two{{1, 1}, {1, 0}};
  EXPECT_NEAR(node_deviance(two), 2.0 * std::log(2.0), 1e-14);
  const std::vector<poisson_datum> none{{1, 0}, {3, 0}};
  EXPECT_EQ(node_deviance(none), 0.0);
}

TEST(Deviance, MatchesDirectRightCensoredFormOnRandomNodes) {
  auto rng = make_rng(51, "eq4");
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 10 + uniform_index(rng, 40);
    std::vector<ltrc_interval> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({0.0, 0.05 + uniform_open(rng) * 5, uniform_open(rng) < 0.7});
    rows.push_back({0.0, 0.01, true});
    const auto baseline = na_ltrc(std::span<const ltrc_interval>(rows));
    const auto pdata = make_poisson_data(rows, baseline);

    std::vector<row_id> node;
    for (row_id i = 0; i < rows.size(); ++i)
      if (uniform_open(rng) < 0.6) node.push_back(i);
    if (node.empty()) node.push_back(0);

    const double direct = fixtures::direct_deviance(rows, node);
    EXPECT_NEAR(deviance_of(pdata, node), direct, 1e-12 * (1.0 + direct));
  }
}

TEST(Split, MatchesExhaustiveOracleAndConservesMass) {
  auto rng = make_rng(52, "rrf-split");
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 20 + uniform_index(rng, 40);
    std::vector<double> x0(n), x1(n);
    std::vector<poisson_datum> pdata(n);
    for (std::size_t i = 0; i < n; ++i) {
      x0[i] = static_cast<double>(uniform_index(rng, 10));
      x1[i] = uniform_open(rng);
      pdata[i] = {0.05 + uniform_open(rng), uniform_open(rng) < 0.2 + 0.06 * x0[i] ? 1.0 : 0.0};
    }
    const auto table = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {x0, x1});
    const int nodesize = 1 + static_cast<int>(uniform_index(rng, 5));
    const std::vector<int> cand{0, 1};
    const auto ids = all_rows(n);
    const double parent = deviance_of(pdata, ids);

    double oracle = 0.0;
    for (int k = 0; k < 2; ++k) {
      const auto& col = table.columns[static_cast<std::size_t>(k)];
      for (double c : std::set<double>(col.begin(), col.end())) {
        std::vector<row_id> l, r;
        for (auto i : ids) (col[i] <= c ? l : r).push_back(i);
        if (l.size() < static_cast<std::size_t>(nodesize) || r.size() < static_cast<std::size_t>(nodesize)) continue;
        oracle = std::max(oracle, parent - deviance_of(pdata, l) - deviance_of(pdata, r));
      }
    }
    const auto split = best_rrf_split(table, ids, pdata, cand, nodesize);
    if (oracle <= 1e-9) {
      if (split) {
        EXPECT_LE(split->reduction, 1e-9);
      }
      continue;
    }
    ASSERT_TRUE(split.has_value());
    EXPECT_NEAR(split->reduction, oracle, 1e-9 * (1 + oracle));

    std::vector<row_id> l, r;
    double cl = 0, sl = 0, cr = 0, sr = 0, cp = 0, sp = 0;
    for (auto i : ids) {
      const bool left = split->rule.goes_left(table.columns[static_cast<std::size_t>(split->rule.variable)][i]);
      (left ? l : r).push_back(i);
      (left ? cl : cr) += pdata[i].count;
      (left ? sl : sr) += pdata[i].exposure;
      cp += pdata[i].count;
      sp += pdata[i].exposure;
    }
    EXPECT_NEAR(split->reduction, parent - deviance_of(pdata, l) - deviance_of(pdata, r), 1e-9 * (1 + parent));
    EXPECT_GE(deviance_of(pdata, l), -1e-12);
    EXPECT_GE(deviance_of(pdata, r), -1e-12);
    EXPECT_DOUBLE_EQ(cl + cr, cp);
    EXPECT_NEAR(sl + sr, sp, 1e-12 * sp);
  }
}

TEST(Split, TwoClustersSplitOnTheSeparatingCovariate) {
  auto rng = make_rng(53, "clusters");
  const std::size_t n = 60;
  std::vector<double> x0(n), x1(n);
  std::vector<poisson_datum> pdata(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hot = i % 2 == 0;
    x0[i] = uniform_open(rng);
    x1[i] = hot ? 1.0 + uniform_open(rng) : uniform_open(rng);
    pdata[i] = {hot ? 0.1 : 10.0, 1.0};
  }
  const auto table = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {x0, x1});
  const std::vector<int> cand{0, 1};
  const auto split = best_rrf_split(table, all_rows(n), pdata, cand, 5);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->rule.variable, 1);
  EXPECT_GT(split->reduction, 0.0);
  EXPECT_EQ(split->n_left, n / 2);
}

TEST(Split, NoEventsOrExchangeableRowsDoNotSplit) {
  const std::size_t n = 30;
  std::vector<double> x(n);
  std::iota(x.begin(), x.end(), 0.0);
  const auto table = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {x});
  const std::vector<int> cand{0};
  const std::vector<poisson_datum> none(n, poisson_datum{1.0, 0.0});
  EXPECT_FALSE(best_rrf_split(table, all_rows(n), none, cand, 2).has_value());
  const auto same = table_of(std::vector<ltrc_interval>(n, ltrc_interval{0, 1, false}), {std::vector<double>(n, 1.0)});
  const std::vector<poisson_datum> flat(n, poisson_datum{0.5, 1.0});
  EXPECT_FALSE(best_rrf_split(same, all_rows(n), flat, cand, 2).has_value());
}

TEST(Growth, SmallNodeIsRootOnly) {
  auto rng = make_rng(54, "small");
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<poisson_datum> pdata{{1, 1}, {2, 0}, {0.5, 1}, {0.5, 0}};
  const auto table = table_of(std::vector<ltrc_interval>(4, ltrc_interval{0, 1, false}), {x});
  const auto t = grow_rrf_tree(table, all_rows(4), pdata, rrf_params{1, 3}, rng);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.nodes()[0].leaf.relative_risk, 2.0 / 4.0);
}

TEST(Growth, RootSplitMatchesOracleAndTreeIsDeterministic) {
  auto data_rng = make_rng(55, "rrf-grow");
  const auto d = fixtures::random_dataset(data_rng, 200, 3);
  const auto table = training_table::from(d);
  const auto baseline = na_ltrc(std::span<const ltrc_interval>(table.times));
  const auto pdata = make_poisson_data(table.times, baseline);
  const rrf_params params{4, 5};
  auto r1 = make_rng(1, "t");
  auto r2 = make_rng(1, "t");
  const auto a = grow_rrf_tree(table, all_rows(table.rows()), pdata, params, r1);
  const auto b = grow_rrf_tree(table, all_rows(table.rows()), pdata, params, r2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.nodes()[k].rule, b.nodes()[k].rule);
    EXPECT_EQ(a.nodes()[k].leaf.relative_risk, b.nodes()[k].leaf.relative_risk);
  }
  const std::vector<int> every{0, 1, 2, 3};
  const auto root = best_rrf_split(table, all_rows(table.rows()), pdata, every, params.nodesize);
  ASSERT_TRUE(root.has_value());
  EXPECT_EQ(a.nodes()[0].rule, root->rule);

  double events = 0.0, exposure = 0.0;
  for (const auto& node : a.nodes()) {
    if (!node.terminal()) continue;
    EXPECT_GE(node.leaf.relative_risk, 0.0);
    EXPECT_DOUBLE_EQ(node.leaf.relative_risk, relative_risk(node.leaf.events, node.leaf.exposure));
    events += node.leaf.events;
    exposure += node.leaf.exposure;
  }
  double c = 0.0, s = 0.0;
  for (const auto& p : pdata) {
    c += p.count;
    s += p.exposure;
  }
  EXPECT_DOUBLE_EQ(events, c);
  EXPECT_NEAR(exposure, s, 1e-9 * s);
}
