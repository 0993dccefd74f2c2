#include <gtest/gtest.h>

#include "support.hpp"

using namespace ltrcf;

namespace {

subject_record make_subject(std::string id, std::vector<double> times, std::vector<double> x, double end, bool event) {
  subject_record s;
  s.id = std::move(id);
  s.obs_times = std::move(times);
  for (double v : x) s.covariates.push_back({v});
  s.end_time = end;
  s.event = event;
  return s;
}

}  // namespace

TEST(Reformat, ThreeIntervalsEndingInEvent) {
  const std::vector<subject_record> subjects{make_subject("a", {0, 1, 2}, {10, 11, 12}, 2.5, true)};
  const auto rows = reformat(subjects);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].time, (ltrc_interval{0, 1, false}));
  EXPECT_EQ(rows[1].time, (ltrc_interval{1, 2, false}));
  EXPECT_EQ(rows[2].time, (ltrc_interval{2, 2.5, true}));
  EXPECT_EQ(rows[1].x, covariate_vector{11});
  EXPECT_EQ(rows[2].interval_index, 2);
  EXPECT_EQ(rows[2].subject_id, "a");
}

TEST(Reformat, SingleIntervalCensored) {
  const std::vector<subject_record> subjects{make_subject("b", {0}, {3}, 4, false)};
  const auto rows = reformat(subjects);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].time, (ltrc_interval{0, 4, false}));
}

TEST(Reformat, VaccinatedSubjectBranch) {
  const std::vector<subject_record> subjects{make_subject("b01", {0, 1}, {0, 1}, 1.7, true)};
  const auto rows = reformat(subjects);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].time, (ltrc_interval{0, 1, false}));
  EXPECT_EQ(rows[0].x, covariate_vector{0});
  EXPECT_EQ(rows[1].time, (ltrc_interval{1, 1.7, true}));
  EXPECT_EQ(rows[1].x, covariate_vector{1});
}

TEST(Reformat, RejectsNonIncreasingTimesNamingSubject) {
  const std::vector<subject_record> subjects{make_subject("bad", {0, 2, 2}, {1, 2, 3}, 5, false)};
  try {
    reformat(subjects);
    FAIL() << "expected malformed_record";
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::malformed_record);
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(Reformat, RejectsEndAtLastObservation) {
  dataset d;
  d.schema = schema({{"x", covariate_type::numeric, {}}});
  d.subjects.push_back(make_subject("z", {0, 1}, {1, 2}, 1, true));
  EXPECT_THROW(d.validate(), error);
}

TEST(Reformat, RoundTripProperty) {
  auto rng = make_rng(11, "roundtrip");
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = fixtures::random_dataset(rng, 1 + uniform_index(rng, 30));
    const auto rows = reformat(d.subjects);
    EXPECT_EQ(rows.size(), d.pseudo_subject_count());
    const auto back = regroup(rows);
    ASSERT_EQ(back.size(), d.subjects.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].id, d.subjects[i].id);
      EXPECT_EQ(back[i].obs_times, d.subjects[i].obs_times);
      EXPECT_EQ(back[i].covariates, d.subjects[i].covariates);
      EXPECT_EQ(back[i].end_time, d.subjects[i].end_time);
      EXPECT_EQ(back[i].event, d.subjects[i].event);
    }
  }
}

TEST(Reformat, RowsTileEachSubjectAndCarryOneEventFlag) {
  auto rng = make_rng(12, "tiling");
  const auto d = fixtures::random_dataset(rng, 40);
  const auto rows = reformat(d.subjects);
  std::size_t at = 0;
  for (const auto& s : d.subjects) {
    double cursor = s.obs_times.front();
    int events = 0;
    for (std::size_t j = 0; j < s.intervals(); ++j, ++at) {
      EXPECT_EQ(rows[at].time.left, cursor);
      EXPECT_LT(rows[at].time.left, rows[at].time.right);
      cursor = rows[at].time.right;
      events += rows[at].time.event ? 1 : 0;
    }
    EXPECT_EQ(cursor, s.end_time);
    EXPECT_EQ(events, s.event ? 1 : 0);
  }
}

TEST(Regroup, RejectsGapsAndEarlyEvents) {
  std::vector<pseudo_subject> rows(2);
  rows[0] = {{0, 1, false}, {0}, "a", 0};
  rows[1] = {{1.5, 2, true}, {0}, "a", 1};
  EXPECT_THROW(regroup(rows), error);
  rows[1].time.left = 1;
  rows[0].time.event = true;
  EXPECT_THROW(regroup(rows), error);
}

TEST(Stream, LookupUsesNewValueAtChange) {
  covariate_stream s{{0, 1, 2}, {{1}, {2}, {3}}};
  EXPECT_EQ(stream_at(s, 1.5), covariate_vector{2});
  EXPECT_EQ(stream_at(s, 2.0), covariate_vector{3});
  EXPECT_EQ(stream_at(s, 0.0), covariate_vector{1});
}

TEST(Stream, BeforeEntryIsAnError) {
  covariate_stream s{{1, 2}, {{1}, {2}}};
  try {
    stream_at(s, 0.5);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::before_entry);
  }
}

TEST(Schema, EncodesLabelsAndRejectsUnknownLevels) {
  const auto s = fixtures::mixed_schema(1);
  EXPECT_EQ(s.encode_label(0, "c"), 2.0);
  EXPECT_THROW(s.encode_label(0, "d"), error);
  const std::vector<covariate_value> values{level{1}, 0.25};
  EXPECT_EQ(s.encode(values), (covariate_vector{1.0, 0.25}));
  const std::vector<covariate_value> wrong{0.5, 0.25};
  EXPECT_THROW(s.encode(wrong), error);
  EXPECT_THROW(s.validate(std::vector<double>{3.0, 0.1}), error);
  EXPECT_THROW(s.validate(std::vector<double>{1.0, std::nan("")}), error);
}

TEST(Schema, CategoricalNeedsLevels) {
  EXPECT_THROW(schema({{"g", covariate_type::categorical, {}}}), error);
}

TEST(Dataset, SubsetKeepsSchemaAndOrder) {
  auto rng = make_rng(3, "subset");
  const auto d = fixtures::random_dataset(rng, 10);
  const std::vector<std::size_t> idx{7, 2};
  const auto s = d.subset(idx);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.subjects[0].id, d.subjects[7].id);
  EXPECT_EQ(s.schema, d.schema);
}
