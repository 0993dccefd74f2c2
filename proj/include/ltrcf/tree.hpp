#pragma once

// Storage shared by both tree flavours: a column-major training table built
// from the pseudo-subject rows, binary split rules, and a flat node array.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltrcf/ltrc_core.hpp"

namespace ltrcf {

using row_id = std::uint32_t;

/// Pseudo-subject rows of a dataset, covariates stored by column.
/// Rows of a subject are contiguous: [subject_begin[i], subject_begin[i+1]).
struct training_table {
  ltrcf::schema schema;
  std::vector<ltrc_interval> times;
  std::vector<std::vector<double>> columns;
  std::vector<std::uint32_t> subject;
  std::vector<std::string> subject_ids;
  std::vector<std::uint32_t> subject_begin;

  static training_table from(const dataset& data) {
    training_table t;
    t.schema = data.schema;
    t.columns.assign(data.schema.size(), {});
    const auto rows = reformat(data.subjects);
    t.times.reserve(rows.size());
    for (auto& c : t.columns) c.reserve(rows.size());
    std::uint32_t subject_index = 0;
    for (const auto& s : data.subjects) {
      t.subject_ids.push_back(s.id);
      t.subject_begin.push_back(static_cast<std::uint32_t>(t.times.size()));
      for (std::size_t j = 0; j < s.intervals(); ++j) {
        const auto& r = rows[t.times.size()];
        t.times.push_back(r.time);
        for (std::size_t k = 0; k < r.x.size(); ++k) t.columns[k].push_back(r.x[k]);
        t.subject.push_back(subject_index);
      }
      ++subject_index;
    }
    t.subject_begin.push_back(static_cast<std::uint32_t>(t.times.size()));
    return t;
  }

  std::size_t rows() const { return times.size(); }
  std::size_t covariates() const { return columns.size(); }
  std::size_t subjects() const { return subject_ids.size(); }

  covariate_vector row_x(std::size_t i) const {
    covariate_vector x(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) x[k] = columns[k][i];
    return x;
  }

  std::vector<ltrc_interval> gather_times(std::span<const row_id> ids) const {
    std::vector<ltrc_interval> out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(times[i]);
    return out;
  }
};

/// Binary split: numeric x <= threshold goes left; categorical goes left when
/// left_levels[level] is set.
struct split_rule {
  int variable = -1;
  double threshold = 0.0;
  std::vector<std::uint8_t> left_levels;

  bool categorical() const { return !left_levels.empty(); }

  bool goes_left(double x) const {
    if (!categorical()) return x <= threshold;
    const auto id = static_cast<std::size_t>(x);
    return id < left_levels.size() && left_levels[id] != 0;
  }

  friend bool operator==(const split_rule&, const split_rule&) = default;
};

template <class Leaf>
struct tree_node {
  int left = -1;
  int right = -1;
  split_rule rule;
  Leaf leaf{};

  bool terminal() const { return left < 0; }
};

template <class Leaf>
class tree {
 public:
  std::vector<tree_node<Leaf>>& nodes() { return nodes_; }
  const std::vector<tree_node<Leaf>>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  /// Index of the terminal node reached by covariate vector x.
  int terminal_of(std::span<const double> x) const {
    int at = 0;
    while (!nodes_[static_cast<std::size_t>(at)].terminal()) {
      const auto& n = nodes_[static_cast<std::size_t>(at)];
      at = n.rule.goes_left(x[static_cast<std::size_t>(n.rule.variable)]) ? n.left : n.right;
    }
    return at;
  }

  const Leaf& leaf_of(std::span<const double> x) const {
    return nodes_[static_cast<std::size_t>(terminal_of(x))].leaf;
  }

  std::size_t terminal_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.terminal() ? 1 : 0;
    return n;
  }

 private:
  std::vector<tree_node<Leaf>> nodes_;
};

namespace detail {

/// Splits node rows by a rule, preserving order.
inline void partition_rows(const training_table& table, std::span<const row_id> rows, const split_rule& rule,
                           std::vector<row_id>& left, std::vector<row_id>& right) {
  const auto& col = table.columns[static_cast<std::size_t>(rule.variable)];
  for (auto r : rows) (rule.goes_left(col[r]) ? left : right).push_back(r);
}

/// For categorical splits: levels not present in the node follow the larger child.
inline void assign_absent_levels(std::vector<std::uint8_t>& left_levels, const std::vector<std::uint8_t>& present,
                                 std::size_t n_left, std::size_t n_right) {
  const std::uint8_t side = n_left >= n_right ? 1 : 0;
  for (std::size_t l = 0; l < left_levels.size(); ++l) {
    if (!present[l]) left_levels[l] = side;
  }
}

}  // namespace detail

}  // namespace ltrcf
