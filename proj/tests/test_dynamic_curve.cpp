#include <gtest/gtest.h>

#include "support.hpp"

using namespace ltrcf;

namespace {

std::vector<segment_counts> branch(std::initializer_list<segment_counts> c) { return c; }

const auto b012 = branch({{0, 1, 100, 95}, {1, 2, 70, 63}, {2, 3, 60, 54}});
const auto b000 = branch({{0, 1, 100, 95}, {1, 2, 25, 20}, {2, 3, 8, 4}});
const auto b001 = branch({{0, 1, 100, 95}, {1, 2, 25, 20}, {2, 3, 12, 9}});
const auto b011 = branch({{0, 1, 100, 95}, {1, 2, 70, 63}, {2, 3, 3, 2}});

double at(const std::vector<segment_counts>& b, double t) {
  const auto seg = empirical_segment_curves(b);
  const auto ct = change_times_of(b);
  return dynamic_estimate(seg, ct, t);
}

survival_curve<> random_curve(rng_engine& rng, double lo) {
  std::vector<double> times, values;
  double t = lo - 0.5, s = 1.0;
  const int k = 1 + static_cast<int>(uniform_index(rng, 8));
  for (int i = 0; i < k; ++i) {
    t += 0.05 + uniform_open(rng);
    s *= 0.4 + 0.6 * uniform_open(rng);
    times.push_back(t);
    values.push_back(s);
  }
  return {1.0, times, values};
}

}  // namespace

TEST(Segments, EmpiricalRatios) {
  const std::vector<segment_counts> c{{1, 2, 70, 63}, {1, 2, 25, 20}, {0, 1, 100, 100}};
  const auto seg = empirical_segment_curves(c);
  EXPECT_DOUBLE_EQ(seg[0](2.0), 0.9);
  EXPECT_DOUBLE_EQ(seg[1](2.0), 0.8);
  EXPECT_EQ(seg[2](1.0), 1.0);
  EXPECT_EQ(seg[0](1.5), 1.0);
  const std::vector<segment_counts> empty{{0, 1, 0, 0}};
  EXPECT_THROW(empirical_segment_curves(empty), error);
}

TEST(Appendix, BranchValues) {
  EXPECT_NEAR(at(b012, 1), 0.95, 1e-12);
  EXPECT_NEAR(at(b012, 2), 0.855, 1e-12);
  EXPECT_NEAR(at(b012, 3), 0.7695, 1e-12);
  EXPECT_NEAR(at(b000, 2), 0.76, 1e-12);
  EXPECT_NEAR(at(b000, 3), 0.38, 1e-12);
  EXPECT_NEAR(at(b001, 3), 0.57, 1e-12);
  EXPECT_NEAR(at(b011, 3), 0.57, 1e-12);
  EXPECT_NEAR(at(b012, 0), 1.0, 1e-15);
}

TEST(Appendix, WithoutUpdateComparison) {
  std::vector<segment_counts> b01f{{0, 1, 100, 95}, {1, 2, 70, 63}};
  const std::vector<segment_counts> b00{{0, 1, 100, 95}, {1, 2, 25, 20}};
  const auto seg01 = empirical_segment_curves(b01f);
  const auto seg00 = empirical_segment_curves(b00);
  const auto ct = change_times_of(b01f);
  EXPECT_NEAR(dynamic_estimate(seg01, ct, 2.0), 0.855, 1e-12);
  EXPECT_NEAR(dynamic_estimate(seg00, ct, 2.0), 0.76, 1e-12);

  const auto seg = empirical_segment_curves(b012);
  const auto ctb = change_times_of(b012);
  const auto [updated, frozen] = curve_with_and_without_update(seg, ctb, 2);
  EXPECT_NEAR(updated(3.0), 0.7695, 1e-12);
  EXPECT_NEAR(frozen(3.0), 0.855, 1e-12);
  for (double t : updated.times()) EXPECT_NEAR(updated(t), dynamic_estimate(seg, ctb, t), 1e-15);
}

TEST(Dynamic, SingleSegmentIsIdentity) {
  auto rng = make_rng(61, "single");
  const std::vector<survival_curve<>> seg{random_curve(rng, 0.6)};
  const std::vector<double> ct{0.0};
  for (double t : {0.0, 0.3, 1.0, 2.5, 9.0}) EXPECT_DOUBLE_EQ(dynamic_estimate(seg, ct, t), seg[0](t));
  const auto [u, f] = curve_with_and_without_update(seg, ct, 1);
  EXPECT_EQ(u.values(), f.values());
}

TEST(Dynamic, RecursiveEqualsExpandedForm) {
  auto rng = make_rng(62, "forms");
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + static_cast<int>(uniform_index(rng, 5));
    std::vector<double> ct{0.0};
    for (int j = 1; j < m; ++j) ct.push_back(ct.back() + 0.1 + uniform_open(rng));
    std::vector<survival_curve<>> seg;
    for (int j = 0; j < m; ++j) seg.push_back(random_curve(rng, ct[static_cast<std::size_t>(j)]));
    for (int q = 0; q < 20; ++q) {
      const double t = uniform_open(rng) * (ct.back() + 3.0);
      EXPECT_NEAR(dynamic_estimate(seg, ct, t), dynamic_estimate_recursive(seg, ct, t), 1e-12);
    }
  }
}

TEST(Dynamic, MonotoneStartsAtOneAndCarriesOverAtBoundaries) {
  auto rng = make_rng(63, "mono");
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 1 + static_cast<int>(uniform_index(rng, 5));
    std::vector<double> ct{0.2};
    for (int j = 1; j < m; ++j) ct.push_back(ct.back() + 0.1 + uniform_open(rng));
    std::vector<survival_curve<>> seg;
    for (int j = 0; j < m; ++j) seg.push_back(random_curve(rng, ct[static_cast<std::size_t>(j)]));
    const auto curve = dynamic_curve(seg, ct);
    EXPECT_TRUE(fixtures::is_survival_curve(curve));
    EXPECT_DOUBLE_EQ(dynamic_estimate(seg, ct, ct[0]), 1.0);
    EXPECT_THROW(dynamic_estimate(seg, ct, 0.1), error);
    double carried = 1.0;
    for (std::size_t j = 0; j + 1 < ct.size(); ++j) {
      carried *= seg[j](ct[j + 1]) / seg[j](ct[j]);
      EXPECT_NEAR(dynamic_estimate(seg, ct, ct[j + 1]), carried, 1e-14);
    }
  }
}

TEST(Dynamic, ZeroDenominatorAbsorbsToZero) {
  const std::vector<survival_curve<>> seg{survival_curve<>{1.0, {0.5}, {0.5}}, survival_curve<>{1.0, {0.5}, {0.0}},
                                          survival_curve<>{1.0, {}, {}}};
  const std::vector<double> ct{0.0, 1.0, 2.0};
  EXPECT_EQ(dynamic_estimate(seg, ct, 2.5), 0.0);
  EXPECT_EQ(dynamic_estimate_recursive(seg, ct, 2.5), 0.0);
  EXPECT_EQ(dynamic_estimate(seg, ct, 1.5), 0.0);
}

TEST(Dynamic, InputValidation) {
  const std::vector<survival_curve<>> seg{survival_curve<>{}, survival_curve<>{}};
  const std::vector<double> bad{1.0, 1.0};
  EXPECT_THROW(dynamic_estimate(seg, bad, 2.0), error);
  const std::vector<double> one{0.0};
  EXPECT_THROW(dynamic_estimate(seg, one, 2.0), error);
}

TEST(Dynamic, GridIsUnionOfJumpsAndChanges) {
  const std::vector<survival_curve<>> seg{survival_curve<>{1.0, {0.5, 1.5}, {0.9, 0.8}},
                                          survival_curve<>{1.0, {0.7, 1.2, 2.0}, {0.9, 0.7, 0.6}}};
  const std::vector<double> ct{0.0, 1.0};
  EXPECT_EQ(dynamic_grid(seg, ct), (std::vector<double>{0.0, 0.5, 1.0, 1.2, 2.0}));
  EXPECT_EQ(dynamic_grid(seg, ct, 1.2), (std::vector<double>{0.0, 0.5, 1.0, 1.2}));
}
