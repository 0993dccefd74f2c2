#pragma once

// File formats: long (counting-process) and wide CSV datasets, JSON schema
// sidecars, query streams, cohort-count fixtures, curve tables, TOML
// simulation configs and truth files.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "ltrcf/dynamic_curve.hpp"
#include "ltrcf/ltrc_core.hpp"
#include "ltrcf/model_io.hpp"
#include "ltrcf/simgen.hpp"

namespace ltrcf {

// =============================================================================
// CSV
// =============================================================================

using csv_row = std::vector<std::string>;

namespace detail {

inline csv_row split_csv_line(const std::string& line) {
  csv_row out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    throw malformed_record(where + ": '" + s + "' is not a number");
  }
  return v;
}

inline bool parse_flag(const std::string& s, const std::string& where) {
  if (s == "1" || s == "true" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "FALSE") return false;
  throw malformed_record(where + ": event flag must be 0 or 1, got '" + s + "'");
}

}  // namespace detail

struct csv_table {
  csv_row header;
  std::vector<csv_row> rows;
};

/// Reads a header plus rows; blank lines and lines starting with '#' are skipped.
inline csv_table read_csv(std::istream& in) {
  csv_table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    auto row = detail::split_csv_line(line);
    if (!have_header) {
      t.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != t.header.size()) {
      throw malformed_record("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                             std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw malformed_record("CSV input is empty");
  return t;
}

inline csv_table read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path.string());
  return read_csv(in);
}

// =============================================================================
// Schema
// =============================================================================

inline schema read_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path.string());
  try {
    return schema_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw schema_mismatch(std::string("malformed schema file: ") + e.what());
  }
}

inline void write_schema_file(const schema& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << json{{"covariates", schema_to_json(s)}}.dump(2) << '\n';
}

/// All-numeric schema for the given covariate column names.
inline schema numeric_schema(std::span<const std::string> names) {
  std::vector<covariate_spec> specs;
  for (const auto& n : names) specs.push_back({n, covariate_type::numeric, {}});
  return schema(std::move(specs));
}

namespace detail {

/// Covariate columns must match the schema names in order.
inline void check_columns(const csv_row& header, std::size_t first, const schema& s) {
  if (header.size() - first != s.size()) {
    throw schema_mismatch("expected " + std::to_string(s.size()) + " covariate columns, found " +
                          std::to_string(header.size() - first));
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (header[first + k] != s[k].name) {
      throw schema_mismatch("column '" + header[first + k] + "' does not match covariate '" + s[k].name + "'");
    }
  }
}

inline covariate_vector encode_row(const csv_row& row, std::size_t first, const schema& s, const std::string& where) {
  covariate_vector x(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& cell = row[first + k];
    x[k] = s.is_categorical(k) ? s.encode_label(k, cell) : parse_number(cell, where);
  }
  s.validate(x);
  return x;
}

inline std::string format_value(const schema& s, std::size_t k, double v) {
  if (s.is_categorical(k)) return s.label(k, v);
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// =============================================================================
// Datasets
// =============================================================================

/// Long format: id,tstart,tstop,event,x... with one row per pseudo-subject.
inline dataset read_long_csv(const csv_table& t, const schema* s = nullptr) {
  const csv_row expected{"id", "tstart", "tstop", "event"};
  if (t.header.size() < 4 || !std::equal(expected.begin(), expected.end(), t.header.begin())) {
    throw malformed_record("long CSV must start with columns id,tstart,tstop,event");
  }
  dataset d;
  d.schema = s ? *s : numeric_schema(std::span(t.header).subspan(4));
  detail::check_columns(t.header, 4, d.schema);
  std::vector<pseudo_subject> rows;
  std::unordered_map<std::string, int> next_index;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = "row " + std::to_string(i + 2) + " (subject '" + r[0] + "')";
    pseudo_subject p;
    p.subject_id = r[0];
    p.time = {detail::parse_number(r[1], where), detail::parse_number(r[2], where), detail::parse_flag(r[3], where)};
    p.x = detail::encode_row(r, 4, d.schema, where);
    p.interval_index = next_index[r[0]]++;
    rows.push_back(std::move(p));
  }
  d.subjects = regroup(rows);
  d.validate();
  return d;
}

/// Wide format: id,time,event,x... listing each subject's observation times;
/// the subject's last row gives its end time and event flag.
inline dataset read_wide_csv(const csv_table& t, const schema* s = nullptr) {
  const csv_row expected{"id", "time", "event"};
  if (t.header.size() < 3 || !std::equal(expected.begin(), expected.end(), t.header.begin())) {
    throw malformed_record("wide CSV must start with columns id,time,event");
  }
  dataset d;
  d.schema = s ? *s : numeric_schema(std::span(t.header).subspan(3));
  detail::check_columns(t.header, 3, d.schema);
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(t.rows[i][0]);
    if (inserted) order.push_back(t.rows[i][0]);
    it->second.push_back(i);
  }
  for (const auto& id : order) {
    const auto& idx = groups[id];
    if (idx.size() < 2) throw malformed_record("subject '" + id + "': needs an observation row and an end row");
    subject_record rec;
    rec.id = id;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto& r = t.rows[idx[j]];
      const std::string where = "row " + std::to_string(idx[j] + 2) + " (subject '" + id + "')";
      const double time = detail::parse_number(r[1], where);
      const bool event = detail::parse_flag(r[2], where);
      if (j + 1 == idx.size()) {
        rec.end_time = time;
        rec.event = event;
      } else {
        if (event) throw malformed_record("subject '" + id + "': event flag on a non-terminal row");
        rec.obs_times.push_back(time);
        rec.covariates.push_back(detail::encode_row(r, 3, d.schema, where));
      }
    }
    d.subjects.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

/// Reads either format, deciding by the header.
inline dataset read_dataset(const std::filesystem::path& path, const schema* s = nullptr) {
  const auto t = read_csv_file(path);
  if (t.header.size() >= 2 && t.header[1] == "tstart") return read_long_csv(t, s);
  return read_wide_csv(t, s);
}

inline void write_long_csv(const dataset& d, std::ostream& out, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "id,tstart,tstop,event";
  for (const auto& c : d.schema.covariates()) out << ',' << c.name;
  out << '\n';
  out.precision(17);
  for (const auto& row : reformat(d.subjects)) {
    out << row.subject_id << ',' << row.time.left << ',' << row.time.right << ',' << (row.time.event ? 1 : 0);
    for (std::size_t k = 0; k < row.x.size(); ++k) out << ',' << detail::format_value(d.schema, k, row.x[k]);
    out << '\n';
  }
}

// =============================================================================
// Streams, cohort counts and curves
// =============================================================================

/// Query stream: time,x... with one row per covariate change.
inline covariate_stream read_stream(const csv_table& t, const schema& s) {
  if (t.header.empty() || t.header[0] != "time") throw malformed_record("stream CSV must start with a time column");
  detail::check_columns(t.header, 1, s);
  covariate_stream out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = "stream row " + std::to_string(i + 2);
    out.change_times.push_back(detail::parse_number(t.rows[i][0], where));
    out.values.push_back(detail::encode_row(t.rows[i], 1, s, where));
  }
  out.validate();
  return out;
}

/// Cohort counts: branch,start,end,at_risk,survivors; rows of a branch in order.
inline std::map<std::string, std::vector<segment_counts>> read_segment_counts(const csv_table& t) {
  const csv_row expected{"branch", "start", "end", "at_risk", "survivors"};
  if (t.header != expected) throw malformed_record("cohort CSV must have columns branch,start,end,at_risk,survivors");
  std::map<std::string, std::vector<segment_counts>> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = "cohort row " + std::to_string(i + 2);
    out[r[0]].push_back({detail::parse_number(r[1], where), detail::parse_number(r[2], where),
                         static_cast<int>(detail::parse_number(r[3], where)),
                         static_cast<int>(detail::parse_number(r[4], where))});
  }
  return out;
}

inline void write_curve_csv(std::span<const dynamic_point> points, std::ostream& out, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "time,survival,segment\n";
  out.precision(17);
  for (const auto& p : points) out << p.time << ',' << p.survival << ',' << p.segment << '\n';
}

// =============================================================================
// Simulation configs
// =============================================================================

namespace detail {

template <std::size_t N>
void read_array(const toml::table& tbl, std::string_view key, std::array<double, N>& out) {
  const auto* arr = tbl[key].as_array();
  if (!arr) return;
  if (arr->size() != N) {
    throw config_invalid(std::string(key) + " needs " + std::to_string(N) + " values");
  }
  for (std::size_t i = 0; i < N; ++i) {
    const auto v = (*arr)[i].template value<double>();
    if (!v) throw config_invalid(std::string(key) + " must hold numbers");
    out[i] = *v;
  }
}

template <class Enum>
Enum read_choice(const toml::table& tbl, std::string_view key, Enum fallback,
                 std::initializer_list<std::pair<std::string_view, Enum>> choices) {
  const auto v = tbl[key].value<std::string>();
  if (!v) return fallback;
  for (const auto& [name, e] : choices) {
    if (*v == name) return e;
  }
  throw config_invalid("unknown value '" + *v + "' for " + std::string(key));
}

}  // namespace detail

inline dgp_config parse_dgp_config(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw config_invalid(std::string("config parse error: ") + std::string(e.description()));
  }
  dgp_config c;
  c.scenario = detail::read_choice(tbl, "scenario", c.scenario,
                                   {{"2TI+1TV", scenario::ti2_tv1}, {"2TI+4TV", scenario::ti2_tv4}});
  c.relationship = detail::read_choice(tbl, "relationship", c.relationship,
                                       {{"linear", relationship::linear},
                                        {"nonlinear", relationship::nonlinear},
                                        {"interaction", relationship::interaction}});
  c.hazard = detail::read_choice(tbl, "hazard", c.hazard, {{"PH", hazard_form::ph}, {"nonPH", hazard_form::non_ph}});
  c.snr = detail::read_choice(tbl, "snr", c.snr, {{"high", snr_level::high}, {"low", snr_level::low}});
  c.knowledge = detail::read_choice(tbl, "knowledge", c.knowledge, {{"full", knowledge::full}, {"half", knowledge::half}});
  c.censor_rate = tbl["censor_rate"].value_or(c.censor_rate);
  c.subjects = tbl["subjects"].value_or(c.subjects);
  c.observations = tbl["observations"].value_or(c.observations);
  c.shape = tbl["shape"].value_or(c.shape);
  c.scale = tbl["scale"].value_or(c.scale);
  c.low_snr_factor = tbl["low_snr_factor"].value_or(c.low_snr_factor);
  c.horizon = tbl["horizon"].value_or(c.horizon);
  c.pilot_subjects = tbl["pilot_subjects"].value_or(c.pilot_subjects);
  c.seed = static_cast<std::uint64_t>(tbl["seed"].value_or(static_cast<std::int64_t>(c.seed)));
  c.set_a_cut = tbl["set_a_cut"].value_or(c.set_a_cut);
  if (const auto* b = tbl["set_b"].as_array()) {
    c.set_b.clear();
    for (const auto& v : *b) c.set_b.push_back(static_cast<int>(v.value<std::int64_t>().value_or(0)));
  }
  if (const auto* cat = tbl["categorical"].as_array()) {
    c.categorical.clear();
    for (const auto& v : *cat) {
      auto name = v.value<std::string>().value_or("");
      if (name.size() < 2 || name[0] != 'x') throw config_invalid("categorical entries are names like \"x5\"");
      c.categorical.push_back(std::atoi(name.c_str() + 1));
    }
  }
  if (const auto* co = tbl["coefficients"].as_table()) {
    detail::read_array(*co, "beta", c.coefficients.beta);
    detail::read_array(*co, "phi", c.coefficients.phi);
    detail::read_array(*co, "psi", c.coefficients.psi);
    detail::read_array(*co, "gamma", c.coefficients.gamma);
    detail::read_array(*co, "alpha", c.coefficients.alpha);
    detail::read_array(*co, "eta", c.coefficients.eta);
    c.coefficients.psi_offset = (*co)["psi_offset"].value_or(c.coefficients.psi_offset);
  }
  detail::read_array(tbl, "reference", c.reference);
  validate(c);
  return c;
}

inline dgp_config read_dgp_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dgp_config(ss.str());
}

inline json dgp_config_to_json(const dgp_config& c) {
  const char* scen = c.scenario == scenario::ti2_tv1 ? "2TI+1TV" : "2TI+4TV";
  const char* rel = c.relationship == relationship::linear      ? "linear"
                    : c.relationship == relationship::nonlinear ? "nonlinear"
                                                                : "interaction";
  const auto& co = c.coefficients;
  return {{"scenario", scen},
          {"relationship", rel},
          {"hazard", c.hazard == hazard_form::ph ? "PH" : "nonPH"},
          {"snr", c.snr == snr_level::high ? "high" : "low"},
          {"knowledge", c.knowledge == knowledge::full ? "full" : "half"},
          {"censor_rate", c.censor_rate},
          {"subjects", c.subjects},
          {"observations", c.observations},
          {"shape", c.shape},
          {"scale", c.scale},
          {"low_snr_factor", c.low_snr_factor},
          {"horizon", c.horizon},
          {"pilot_subjects", c.pilot_subjects},
          {"seed", c.seed},
          {"set_a_cut", c.set_a_cut},
          {"set_b", c.set_b},
          {"categorical", c.categorical},
          {"reference", c.reference},
          {"coefficients",
           {{"beta", co.beta},
            {"phi", co.phi},
            {"psi", co.psi},
            {"psi_offset", co.psi_offset},
            {"gamma", co.gamma},
            {"alpha", co.alpha},
            {"eta", co.eta}}}};
}

// =============================================================================
// Truth files
// =============================================================================

struct truth_record {
  std::string id;
  truth_curve curve;
  double event_time = 0.0;
  double censor_time = 0.0;
};

inline json truth_to_json(std::span<const truth_record> records, const json& meta) {
  json subjects = json::array();
  for (const auto& r : records) {
    subjects.push_back({{"id", r.id},
                        {"starts", r.curve.starts()},
                        {"rates", r.curve.rates()},
                        {"shapes", r.curve.shapes()},
                        {"event_time", r.event_time},
                        {"censor_time", std::isfinite(r.censor_time) ? json(r.censor_time) : json("inf")}});
  }
  return {{"format", "ltrcf-truth"}, {"version", 1}, {"meta", meta}, {"subjects", std::move(subjects)}};
}

inline std::vector<truth_record> truth_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "ltrcf-truth") throw invalid_argument("not a truth file");
    std::vector<truth_record> out;
    for (const auto& s : doc.at("subjects")) {
      truth_record r;
      r.id = s.at("id").get<std::string>();
      r.curve = truth_curve(s.at("starts").get<std::vector<double>>(), s.at("rates").get<std::vector<double>>(),
                            s.at("shapes").get<std::vector<double>>());
      r.event_time = s.at("event_time").get<double>();
      const auto& c = s.at("censor_time");
      r.censor_time = c.is_string() ? std::numeric_limits<double>::infinity() : c.get<double>();
      out.push_back(std::move(r));
    }
    return out;
  } catch (const json::exception& e) {
    throw invalid_argument(std::string("malformed truth file: ") + e.what());
  }
}

inline void save_json_document(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  if (path.extension() == ".json") {
    out << doc.dump() << '\n';
  } else {
    const auto bytes = json::to_cbor(doc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw io_error("failed writing " + path.string());
}

inline json load_json_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    if (!bytes.empty() && bytes.front() == '{') return json::parse(bytes.begin(), bytes.end());
    return json::from_cbor(bytes);
  } catch (const json::exception& e) {
    throw invalid_argument("cannot decode " + path.string() + ": " + e.what());
  }
}

}  // namespace ltrcf
