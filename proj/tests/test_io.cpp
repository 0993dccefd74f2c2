#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"

using namespace ltrcf;

namespace {

csv_table table(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

}  // namespace

TEST(Csv, SplitsQuotedFieldsAndSkipsComments) {
  const auto t = table("# comment\nid,tstart,tstop,event,x\n\n\"a,b\",0,1,0, 2.5\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "a,b");
  EXPECT_EQ(t.rows[0][4], "2.5");
}

TEST(Csv, LongFormatRoundTrip) {
  auto rng = make_rng(91, "csv");
  const auto d = fixtures::random_dataset(rng, 25);
  std::ostringstream out;
  write_long_csv(d, out, "stamp");
  const auto back = read_long_csv(table(out.str()), &d.schema);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.subjects[i].obs_times, d.subjects[i].obs_times);
    EXPECT_EQ(back.subjects[i].covariates, d.subjects[i].covariates);
    EXPECT_EQ(back.subjects[i].end_time, d.subjects[i].end_time);
    EXPECT_EQ(back.subjects[i].event, d.subjects[i].event);
  }
}

TEST(Csv, LongFormatErrors) {
  EXPECT_THROW(read_long_csv(table("id,start,stop,event\n")), error);
  try {
    read_long_csv(table("id,tstart,tstop,event,x\ns1,0,1,0,1\ns1,1.5,2,1,1\n"));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::malformed_record);
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos);
  }
  EXPECT_THROW(read_long_csv(table("id,tstart,tstop,event,x\ns1,0,1,0,abc\n")), error);
  EXPECT_THROW(read_long_csv(table("id,tstart,tstop,event,x\ns1,0,1,2,1\n")), error);
}

TEST(Csv, SchemaMismatchIsReported) {
  const schema s({{"g", covariate_type::categorical, {"a", "b"}}});
  try {
    read_long_csv(table("id,tstart,tstop,event,g\ns1,0,1,1,c\n"), &s);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::schema_mismatch);
  }
  try {
    read_long_csv(table("id,tstart,tstop,event,h\ns1,0,1,1,a\n"), &s);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::schema_mismatch);
  }
  const auto ok = read_long_csv(table("id,tstart,tstop,event,g\ns1,0,1,1,b\n"), &s);
  EXPECT_EQ(ok.subjects[0].covariates[0], covariate_vector{1.0});
}

TEST(Csv, WideFormat) {
  const auto d = read_wide_csv(table("id,time,event,x\na,0,0,1\na,1,0,2\na,2.5,1,\nb,0,0,5\nb,4,0,\n"));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.subjects[0].obs_times, (std::vector<double>{0, 1}));
  EXPECT_EQ(d.subjects[0].end_time, 2.5);
  EXPECT_TRUE(d.subjects[0].event);
  EXPECT_FALSE(d.subjects[1].event);
  EXPECT_THROW(read_wide_csv(table("id,time,event,x\na,0,1,1\na,1,1,\n")), error);
}

TEST(Csv, StreamAndCohortCounts) {
  const auto s = numeric_schema(std::vector<std::string>{"x"});
  const auto stream = read_stream(table("time,x\n0,1\n2,3\n"), s);
  EXPECT_EQ(stream_at(stream, 2.5), covariate_vector{3});
  EXPECT_THROW(read_stream(table("time,x\n1,1\n1,3\n"), s), error);
  const auto counts = read_segment_counts(table("branch,start,end,at_risk,survivors\nb,0,1,100,95\nb,1,2,70,63\n"));
  ASSERT_EQ(counts.at("b").size(), 2u);
  EXPECT_EQ(counts.at("b")[1].survivors, 63);
}

TEST(Config, ParsesChoicesAndCoefficients) {
  const auto c = parse_dgp_config(R"(
scenario = "2TI+1TV"
relationship = "interaction"
hazard = "PH"
snr = "low"
knowledge = "half"
censor_rate = 0.5
subjects = 300
categorical = ["x5", "x9"]
set_b = [2, 3]
[coefficients]
gamma = [0, 1, 1, 1, 1, 1, 1]
)");
  EXPECT_EQ(c.scenario, scenario::ti2_tv1);
  EXPECT_EQ(c.relationship, relationship::interaction);
  EXPECT_EQ(c.snr, snr_level::low);
  EXPECT_EQ(c.knowledge, knowledge::half);
  EXPECT_EQ(c.subjects, 300);
  EXPECT_EQ(c.categorical, (std::vector<int>{5, 9}));
  EXPECT_EQ(c.set_b, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.coefficients.gamma[1], 1.0);
  const auto j = dgp_config_to_json(c);
  EXPECT_EQ(j["relationship"], "interaction");
}

TEST(Config, RejectsInvalidConfigs) {
  for (const char* text : {"relationship = \"cubic\"", "censor_rate = 1.5", "subjects = 0", "categorical = [\"x2\"]",
                           "[coefficients]\nbeta = [1, 2]", "this is not toml"}) {
    try {
      parse_dgp_config(text);
      ADD_FAILURE() << text;
    } catch (const error& e) {
      EXPECT_EQ(e.kind(), error_kind::config_invalid) << text;
    }
  }
}

TEST(Config, ShippedSampleParses) {
  const auto c = read_dgp_config(std::filesystem::path(LTRCF_SAMPLES_DIR) / "dgp_ph_linear_low.toml");
  EXPECT_EQ(c.snr, snr_level::low);
}

TEST(Truth, JsonAndCborRoundTrip) {
  std::vector<truth_record> recs{{"1", truth_curve({0.0, 1.0}, {0.1, 0.2}, {2.0, 2.0}), 1.5, 3.0},
                                 {"2", truth_curve({0.0}, {0.3}, {1.0}), 0.4, std::numeric_limits<double>::infinity()}};
  const auto doc = truth_to_json(recs, {{"seed", 7}});
  const auto dir = std::filesystem::temp_directory_path() / "ltrcf_io_test";
  std::filesystem::create_directories(dir);
  for (const char* name : {"t.json", "t.cbor"}) {
    save_json_document(doc, dir / name);
    const auto back = truth_from_json(load_json_document(dir / name));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].curve.rates(), recs[0].curve.rates());
    EXPECT_EQ(back[0].censor_time, 3.0);
    EXPECT_TRUE(std::isinf(back[1].censor_time));
    EXPECT_DOUBLE_EQ(back[0].curve(1.2), recs[0].curve(1.2));
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(truth_from_json(json{{"format", "other"}}), error);
}
