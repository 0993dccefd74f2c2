#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ltrcf/ltrcf.hpp"

namespace ltrcf::fixtures {

/// LTRC rows on a coarse integer grid so that ties are common.
inline std::vector<ltrc_interval> random_ltrc_rows(rng_engine& rng, std::size_t n, bool truncated, int grid = 8) {
  std::vector<ltrc_interval> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = truncated ? static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(grid / 2))) : 0.0;
    const double r = l + 1.0 + static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(grid)));
    rows.push_back({l, r, uniform_open(rng) < 0.6});
  }
  return rows;
}

/// Small mixed-type schema: numeric z0, categorical g (3 levels), numeric z1...
inline schema mixed_schema(std::size_t numeric) {
  std::vector<covariate_spec> specs;
  specs.push_back({"g", covariate_type::categorical, {"a", "b", "c"}});
  for (std::size_t k = 0; k < numeric; ++k) specs.push_back({"z" + std::to_string(k), covariate_type::numeric, {}});
  return schema(std::move(specs));
}

/// Subjects with a few covariate changes; hazard rises with z0.
inline dataset random_dataset(rng_engine& rng, std::size_t n, std::size_t numeric = 2) {
  dataset d;
  d.schema = mixed_schema(numeric);
  for (std::size_t i = 0; i < n; ++i) {
    subject_record s;
    s.id = "s" + std::to_string(i);
    const int changes = static_cast<int>(uniform_index(rng, 3));
    double t = 0.0;
    for (int j = 0; j <= changes; ++j) {
      covariate_vector x(d.schema.size());
      x[0] = static_cast<double>(uniform_index(rng, 3));
      for (std::size_t k = 1; k < x.size(); ++k) x[k] = uniform_open(rng);
      s.obs_times.push_back(t);
      s.covariates.push_back(x);
      t += 0.2 + uniform_open(rng);
    }
    const double rate = 0.3 + 2.0 * s.covariates.back()[1];
    s.end_time = s.obs_times.back() + -std::log(uniform_open(rng)) / rate + 1e-3;
    s.event = uniform_open(rng) < 0.75;
    d.subjects.push_back(std::move(s));
  }
  return d;
}

inline bool is_survival_curve(const survival_curve<>& c) {
  double prev = c.initial();
  if (!(prev >= 0.0 && prev <= 1.0)) return false;
  for (double v : c.values()) {
    if (!(v >= 0.0 && v <= 1.0) || v > prev) return false;
    prev = v;
  }
  return true;
}

}  // namespace ltrcf::fixtures
