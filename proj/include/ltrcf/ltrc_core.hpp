#pragma once

// Domain types for left-truncated right-censored data with time-varying
// covariates, and the counting-process reformatter that splits each subject
// into one pseudo-subject row per covariate interval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ltrcf/error.hpp"

namespace ltrcf {

// =============================================================================
// Covariates and schema
// =============================================================================

enum class covariate_type { numeric, categorical };

/// Level id of a categorical covariate, an index into the declared level set.
struct level {
  int id = 0;
  friend bool operator==(level, level) = default;
};

using covariate_value = std::variant<double, level>;

/// Encoded covariate vector: numeric values as-is, categorical level ids as
/// small integral doubles.
using covariate_vector = std::vector<double>;

struct covariate_spec {
  std::string name;
  covariate_type type = covariate_type::numeric;
  std::vector<std::string> levels;  // categorical only

  friend bool operator==(const covariate_spec&, const covariate_spec&) = default;
};

class schema {
 public:
  schema() = default;
  explicit schema(std::vector<covariate_spec> covariates) : covariates_(std::move(covariates)) {
    for (const auto& c : covariates_) {
      if (c.type == covariate_type::categorical && c.levels.empty()) {
        throw schema_mismatch("categorical covariate '" + c.name + "' declares no levels");
      }
    }
  }

  std::size_t size() const { return covariates_.size(); }
  const covariate_spec& operator[](std::size_t k) const { return covariates_[k]; }
  const std::vector<covariate_spec>& covariates() const { return covariates_; }

  bool is_categorical(std::size_t k) const {
    return covariates_[k].type == covariate_type::categorical;
  }
  int level_count(std::size_t k) const { return static_cast<int>(covariates_[k].levels.size()); }

  int index_of(const std::string& name) const {
    for (std::size_t k = 0; k < covariates_.size(); ++k) {
      if (covariates_[k].name == name) return static_cast<int>(k);
    }
    throw schema_mismatch("unknown covariate '" + name + "'");
  }

  /// Maps a categorical label to its level id; unseen labels are an error.
  double encode_label(std::size_t k, const std::string& label) const {
    const auto& levels = covariates_[k].levels;
    const auto it = std::find(levels.begin(), levels.end(), label);
    if (it == levels.end()) {
      throw schema_mismatch("covariate '" + covariates_[k].name + "' has no level '" + label + "'");
    }
    return static_cast<double>(it - levels.begin());
  }

  const std::string& label(std::size_t k, double code) const {
    return covariates_[k].levels.at(static_cast<std::size_t>(code));
  }

  covariate_vector encode(std::span<const covariate_value> values) const {
    if (values.size() != size()) {
      throw schema_mismatch("expected " + std::to_string(size()) + " covariates, got " +
                            std::to_string(values.size()));
    }
    covariate_vector out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (is_categorical(k)) {
        const auto* lv = std::get_if<level>(&values[k]);
        if (lv == nullptr) throw schema_mismatch("covariate '" + covariates_[k].name + "' is categorical");
        out[k] = static_cast<double>(lv->id);
      } else {
        const auto* v = std::get_if<double>(&values[k]);
        if (v == nullptr) throw schema_mismatch("covariate '" + covariates_[k].name + "' is numeric");
        out[k] = *v;
      }
    }
    validate(out);
    return out;
  }

  /// Checks width, finiteness and level ranges of an encoded vector.
  void validate(std::span<const double> x) const {
    if (x.size() != size()) {
      throw schema_mismatch("expected " + std::to_string(size()) + " covariates, got " +
                            std::to_string(x.size()));
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x[k])) {
        throw schema_mismatch("covariate '" + covariates_[k].name + "' is not finite");
      }
      if (is_categorical(k)) {
        const double id = x[k];
        if (id < 0 || id >= level_count(k) || id != std::floor(id)) {
          throw schema_mismatch("covariate '" + covariates_[k].name + "' level id out of range");
        }
      }
    }
  }

  friend bool operator==(const schema&, const schema&) = default;

 private:
  std::vector<covariate_spec> covariates_;
};

// =============================================================================
// Subjects and pseudo-subjects
// =============================================================================

/// One subject's intermittent covariate observations and outcome.
/// covariates[j] holds the values in force on [obs_times[j], obs_times[j+1]).
struct subject_record {
  std::string id;
  std::vector<double> obs_times;
  std::vector<covariate_vector> covariates;
  double end_time = 0.0;
  bool event = false;

  std::size_t intervals() const { return obs_times.size(); }

  void validate(std::size_t p) const {
    const auto fail = [&](const std::string& why) {
      throw malformed_record("subject '" + id + "': " + why);
    };
    if (obs_times.empty()) fail("no observation times");
    if (covariates.size() != obs_times.size()) fail("covariate rows do not match observation times");
    if (!(obs_times.front() >= 0.0)) fail("entry time is negative");
    for (std::size_t j = 0; j < obs_times.size(); ++j) {
      if (!std::isfinite(obs_times[j])) fail("observation time is not finite");
      if (j > 0 && !(obs_times[j] > obs_times[j - 1])) fail("observation times are not strictly increasing");
      if (covariates[j].size() != p) fail("covariate row has the wrong width");
    }
    if (!std::isfinite(end_time) || !(end_time > obs_times.back())) {
      fail("end time must be finite and after the last observation time");
    }
  }
};

/// An LTRC time interval (left, right] with its event flag.
struct ltrc_interval {
  double left = 0.0;
  double right = 0.0;
  bool event = false;

  friend bool operator==(const ltrc_interval&, const ltrc_interval&) = default;
};

struct pseudo_subject {
  ltrc_interval time;
  covariate_vector x;
  std::string subject_id;
  int interval_index = 0;
};

struct dataset {
  ltrcf::schema schema;
  std::vector<subject_record> subjects;

  std::size_t size() const { return subjects.size(); }

  void validate() const {
    std::unordered_map<std::string, int> seen;
    for (const auto& s : subjects) {
      s.validate(schema.size());
      for (const auto& x : s.covariates) schema.validate(x);
      if (++seen[s.id] > 1) throw malformed_record("duplicate subject id '" + s.id + "'");
    }
  }

  std::size_t pseudo_subject_count() const {
    std::size_t n = 0;
    for (const auto& s : subjects) n += s.intervals();
    return n;
  }

  dataset subset(std::span<const std::size_t> indices) const {
    dataset out{schema, {}};
    out.subjects.reserve(indices.size());
    for (auto i : indices) out.subjects.push_back(subjects[i]);
    return out;
  }
};

/// Splits every subject into its pseudo-subject rows
/// (t_j, t_{j+1}, event * [j is last], x_j), subjects in input order.
inline std::vector<pseudo_subject> reformat(std::span<const subject_record> subjects) {
  std::vector<pseudo_subject> rows;
  for (const auto& s : subjects) {
    const std::size_t J = s.intervals();
    if (J == 0 || s.covariates.size() != J) {
      throw malformed_record("subject '" + s.id + "': inconsistent record");
    }
    for (std::size_t j = 0; j < J; ++j) {
      if (j > 0 && !(s.obs_times[j] > s.obs_times[j - 1])) {
        throw malformed_record("subject '" + s.id + "': observation times are not strictly increasing");
      }
      const double right = j + 1 < J ? s.obs_times[j + 1] : s.end_time;
      if (!(right > s.obs_times[j])) {
        throw malformed_record("subject '" + s.id + "': zero-length or reversed interval");
      }
      rows.push_back({{s.obs_times[j], right, s.event && j + 1 == J}, s.covariates[j], s.id,
                      static_cast<int>(j)});
    }
  }
  return rows;
}

/// Inverse of reformat: groups rows by subject (first-appearance order) and
/// rebuilds each record. Rows of a subject must tile its follow-up.
inline std::vector<subject_record> regroup(std::span<const pseudo_subject> rows) {
  std::vector<subject_record> out;
  std::unordered_map<std::string, std::size_t> where;
  std::vector<std::vector<const pseudo_subject*>> groups;
  for (const auto& r : rows) {
    auto [it, inserted] = where.try_emplace(r.subject_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  out.reserve(groups.size());
  for (auto& g : groups) {
    std::sort(g.begin(), g.end(), [](auto* a, auto* b) { return a->interval_index < b->interval_index; });
    subject_record s;
    s.id = g.front()->subject_id;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j > 0 && g[j]->time.left != g[j - 1]->time.right) {
        throw malformed_record("subject '" + s.id + "': intervals leave a gap or overlap");
      }
      if (j + 1 < g.size() && g[j]->time.event) {
        throw malformed_record("subject '" + s.id + "': event flag on a non-terminal interval");
      }
      s.obs_times.push_back(g[j]->time.left);
      s.covariates.push_back(g[j]->x);
    }
    s.end_time = g.back()->time.right;
    s.event = g.back()->time.event;
    out.push_back(std::move(s));
  }
  return out;
}

// =============================================================================
// Covariate streams
// =============================================================================

/// A query-time covariate path: values[j] holds on [change_times[j], change_times[j+1]).
struct covariate_stream {
  std::vector<double> change_times;
  std::vector<covariate_vector> values;

  std::size_t segments() const { return change_times.size(); }

  void validate() const {
    if (change_times.empty()) throw invalid_argument("covariate stream is empty");
    if (values.size() != change_times.size()) throw invalid_argument("covariate stream size mismatch");
    if (!(change_times.front() >= 0.0)) throw invalid_argument("covariate stream starts before 0");
    for (std::size_t j = 1; j < change_times.size(); ++j) {
      if (!(change_times[j] > change_times[j - 1])) {
        throw invalid_argument("covariate stream change times are not strictly increasing");
      }
    }
  }

  /// Index of the segment in force at t (largest j with change_times[j] <= t).
  std::size_t segment_at(double t) const {
    if (change_times.empty() || t < change_times.front()) {
      throw before_entry("time " + std::to_string(t) + " precedes the stream's entry time");
    }
    const auto it = std::upper_bound(change_times.begin(), change_times.end(), t);
    return static_cast<std::size_t>(it - change_times.begin()) - 1;
  }
};

inline const covariate_vector& stream_at(const covariate_stream& stream, double t) {
  return stream.values[stream.segment_at(t)];
}

/// The observed covariate history of a subject as a stream.
inline covariate_stream stream_of(const subject_record& s) {
  return {s.obs_times, s.covariates};
}

}  // namespace ltrcf
