#pragma once

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "ltrcf/ltrcf.hpp"

namespace ltrcf::fixtures {

using rational = boost::multiprecision::cpp_rational;

/// Product-limit by direct enumeration of the risk set at each event time.
inline std::vector<std::pair<double, rational>> brute_km(const std::vector<ltrc_interval>& rows) {
  std::set<double> times;
  for (const auto& r : rows)
    if (r.event) times.insert(r.right);
  std::vector<std::pair<double, rational>> out;
  rational s = 1;
  for (double t : times) {
    int y = 0, d = 0;
    for (const auto& r : rows) {
      if (r.left < t && t <= r.right) ++y;
      if (r.event && r.right == t) ++d;
    }
    s *= rational(y - d, y);
    out.emplace_back(t, s);
  }
  return out;
}

inline std::vector<std::pair<double, rational>> brute_na(const std::vector<ltrc_interval>& rows) {
  std::set<double> times;
  for (const auto& r : rows)
    if (r.event) times.insert(r.right);
  std::vector<std::pair<double, rational>> out;
  rational h = 0;
  for (double t : times) {
    int y = 0, d = 0;
    for (const auto& r : rows) {
      if (r.left < t && t <= r.right) ++y;
      if (r.event && r.right == t) ++d;
    }
    h += rational(d, y);
    out.emplace_back(t, h);
  }
  return out;
}

template <class Curve>
bool matches_exactly(const Curve& c, const std::vector<std::pair<double, rational>>& oracle) {
  if (c.jumps() != oracle.size()) return false;
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    if (c.times()[k] != oracle[k].first || c.values()[k] != oracle[k].second) return false;
  }
  return true;
}

/// Nelson-Aalen at t on right-censored rows, enumerated in floating point.
inline double brute_na_at(const std::vector<ltrc_interval>& rows, double t) {
  std::set<double> times;
  for (const auto& r : rows)
    if (r.event && r.right <= t) times.insert(r.right);
  double h = 0.0;
  for (double u : times) {
    double y = 0.0, d = 0.0;
    for (const auto& r : rows) {
      y += r.right >= u ? 1.0 : 0.0;
      d += r.event && r.right == u ? 1.0 : 0.0;
    }
    h += d / y;
  }
  return h;
}

/// Node deviance written out over right-censored rows with the maximum
/// likelihood relative risk of the node.
inline double direct_deviance(const std::vector<ltrc_interval>& rows, const std::vector<row_id>& node) {
  double events = 0.0, hazard = 0.0;
  for (auto r : node) {
    events += rows[r].event ? 1.0 : 0.0;
    hazard += brute_na_at(rows, rows[r].right);
  }
  const double phi = events / hazard;
  double dev = 0.0;
  for (auto r : node) {
    const double lam = brute_na_at(rows, rows[r].right);
    const double delta = rows[r].event ? 1.0 : 0.0;
    dev += 2.0 * ((delta > 0 ? delta * std::log(delta / (lam * phi)) : 0.0) - (delta - lam * phi));
  }
  return dev;
}

/// Cumulative hazard of a truth curve by adaptive quadrature, piece by piece.
/// The piece at the origin is integrated after t = b w^m, which smooths the
/// t^(shape-1) singularity.
inline double quadrature_hazard(const truth_curve& truth, double t) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  std::vector<double> edges{0.0};
  for (double s : truth.starts())
    if (s > 0 && s < t) edges.push_back(s);
  edges.push_back(t);
  const double nu = truth.shapes().front();
  const double m = nu < 1.0 ? std::ceil(2.0 / nu) : 1.0;
  const double b = edges[1];
  double h = gk::integrate([&](double w) { return truth.hazard(b * std::pow(w, m)) * m * b * std::pow(w, m - 1.0); },
                           0.0, 1.0, 12, 1e-11);
  for (std::size_t k = 1; k + 1 < edges.size(); ++k) {
    h += gk::integrate([&](double u) { return truth.hazard(u); }, edges[k], edges[k + 1], 12, 1e-11);
  }
  return h;
}

}  // namespace ltrcf::fixtures
