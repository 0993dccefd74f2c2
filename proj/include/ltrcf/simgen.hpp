#pragma once

// Simulation of 20-covariate time-varying survival data: covariate paths on
// random observation grids, piecewise-Weibull survival times (PH on the scale,
// non-PH on the shape) inverted in closed form, uniform censoring calibrated to
// a target rate, and random masking of covariate changes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ltrcf/error.hpp"
#include "ltrcf/ltrc_core.hpp"
#include "ltrcf/random.hpp"

namespace ltrcf {

inline constexpr std::size_t sim_covariates = 20;
using sim_vector = std::array<double, sim_covariates>;  // X1..X20 at indices 0..19

enum class scenario { ti2_tv1, ti2_tv4 };
enum class relationship { linear, nonlinear, interaction };
enum class hazard_form { ph, non_ph };
enum class snr_level { high, low };
enum class knowledge { full, half };

/// Coefficients of the three relationships. Index 0 of the 7-vectors is the
/// intercept; indices 1..6 multiply X1..X6.
struct dgp_coefficients {
  std::array<double, 7> beta{-3.3125, 0.875, 0.875, 0.875, 0.875, 0.3125, 0.625};
  std::array<double, 3> phi{1.0, 2.0, 0.1};
  std::array<double, 7> psi{0.5, 0.5, 0.5, 0.5, 0.5, 0.25, 0.5};
  double psi_offset = -2.0;  // constant added to the nonlinear predictor
  std::array<double, 7> gamma{-2.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.5};
  std::array<double, 7> alpha{0.5, -1.0, 1.0, -1.0, 1.5, -0.2, 0.5};
  std::array<double, 4> eta{1.0, 0.5, 1.0, -0.5};
};

struct dgp_config {
  ltrcf::scenario scenario = scenario::ti2_tv4;
  ltrcf::relationship relationship = relationship::linear;
  hazard_form hazard = hazard_form::ph;
  snr_level snr = snr_level::high;
  double censor_rate = 0.2;
  int subjects = 100;
  int observations = 11;  // m
  double shape = 2.0;     // nu
  double scale = 0.1;     // lambda
  dgp_coefficients coefficients;
  double low_snr_factor = 0.8;  // contraction of the predictor under low SNR
  double set_a_cut = 0.5;       // A = {X4 <= cut}
  std::vector<int> set_b{1, 2};  // B = {X5 in set}
  sim_vector reference{0.5, 0.5, 0.5, 0.5, 3.0, 1.0, 0.5, 1.5, 3.0, 0.5,
                       0.5, 1.0, 0.5, 3.0, 0.5, 1.0, 0.5, 1.0, 0.5, 0.5};  // inactive covariates
  ltrcf::knowledge knowledge = knowledge::full;
  double horizon = 0.0;  // 0 calibrates the observation window from a pilot
  std::vector<int> categorical{5, 9, 12, 14};  // 1-based covariate numbers
  int pilot_subjects = 10000;
  std::uint64_t seed = 1;
};

// =============================================================================
// Covariate paths
// =============================================================================

struct covariate_path {
  std::vector<double> times;    // t_0 = 0 < t_1 < ... < t_{m-1}
  std::vector<sim_vector> values;
};

namespace detail {

inline double bernoulli(rng_engine& rng) { return uniform_open(rng) < 0.5 ? 1.0 : 0.0; }
inline double uniform_level(rng_engine& rng, int lo, int hi) {
  return static_cast<double>(lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1))));
}
inline std::size_t change_index(rng_engine& rng, std::size_t m) { return 1 + uniform_index(rng, m - 1); }

}  // namespace detail

/// One subject's path over m observation times drawn in (0, horizon).
inline covariate_path draw_covariate_path(rng_engine& rng, int m, double horizon) {
  if (m < 1) throw config_invalid("observation count must be at least 1");
  if (!(horizon > 0.0)) throw config_invalid("observation horizon must be positive");
  const auto mu = static_cast<std::size_t>(m);
  covariate_path path;
  path.times.push_back(0.0);
  for (std::size_t j = 1; j < mu; ++j) path.times.push_back(horizon * uniform_open(rng));
  std::sort(path.times.begin(), path.times.end());
  for (std::size_t j = 2; j < mu; ++j) {
    if (!(path.times[j] > path.times[j - 1])) path.times[j] = std::nextafter(path.times[j - 1], horizon * 2);
  }
  path.values.assign(mu, sim_vector{});

  sim_vector base{};
  base[0] = detail::bernoulli(rng);
  base[1] = uniform_open(rng);
  base[6] = uniform_open(rng);
  base[7] = 1.0 + uniform_open(rng);
  base[8] = detail::uniform_level(rng, 1, 5);
  base[9] = uniform_open(rng);
  base[10] = detail::bernoulli(rng);
  base[11] = detail::uniform_level(rng, 0, 2);

  // patterned covariates
  const double x6_start = detail::uniform_level(rng, 0, 2);
  std::vector<double> x6(mu, x6_start);
  for (std::size_t j = 1; j < mu; ++j) x6[j] = std::min(2.0, x6[j - 1] + detail::bernoulli(rng));
  const std::size_t x13_at = mu > 1 ? detail::change_index(rng, mu) : mu;
  const double x16_start = detail::bernoulli(rng);
  const std::size_t x16_at = mu > 1 ? detail::change_index(rng, mu) : mu;
  std::size_t x18_first = mu, x18_second = mu;
  if (mu > 2) {
    const auto picks = sample_without_replacement(rng, m - 1, 2);
    x18_first = 1 + static_cast<std::size_t>(std::min(picks[0], picks[1]));
    x18_second = 1 + static_cast<std::size_t>(std::max(picks[0], picks[1]));
  } else if (mu == 2) {
    x18_first = 1;
  }
  const double a = uniform_open(rng);
  const double b = uniform_open(rng);

  for (std::size_t j = 0; j < mu; ++j) {
    auto& v = path.values[j];
    v = base;
    v[2] = detail::bernoulli(rng);
    v[3] = uniform_open(rng);
    v[4] = detail::uniform_level(rng, 1, 5);
    v[13] = detail::uniform_level(rng, 1, 5);
    v[14] = uniform_open(rng);
    v[16] = uniform_open(rng);
    v[18] = detail::bernoulli(rng);
    v[5] = x6[j];
    v[12] = j >= x13_at ? 1.0 : 0.0;
    v[15] = x16_start + (j >= x16_at ? 1.0 : 0.0);
    v[17] = (j >= x18_first ? 1.0 : 0.0) + (j >= x18_second ? 1.0 : 0.0);
    v[19] = a + b * path.times[j];
  }
  return path;
}

// =============================================================================
// Linear predictor
// =============================================================================

inline bool covariate_active(scenario s, std::size_t k) {
  if (s == scenario::ti2_tv4) return k < 6;
  return k == 0 || k == 1 || k == 4;
}

/// The six driving covariates with inactive ones replaced by reference values.
inline std::array<double, 7> driving_covariates(const sim_vector& x, const dgp_config& c) {
  std::array<double, 7> out{};
  for (std::size_t k = 0; k < 6; ++k) out[k + 1] = covariate_active(c.scenario, k) ? x[k] : c.reference[k];
  return out;
}

/// Linear predictor at full signal strength.
inline double raw_theta(const sim_vector& x, const dgp_config& c) {
  const auto X = driving_covariates(x, c);
  const auto& co = c.coefficients;
  const auto linear = [&](const std::array<double, 7>& w) {
    double v = w[0];
    for (std::size_t k = 1; k <= 6; ++k) v += w[k] * X[k];
    return v;
  };
  switch (c.relationship) {
    case relationship::linear:
      return linear(co.beta);
    case relationship::nonlinear: {
      double sum = 0.0, lin = co.psi[0];
      for (std::size_t k = 1; k <= 6; ++k) {
        sum += X[k];
        lin += co.psi[k] * X[k];
      }
      if (!(lin > 0.0)) throw config_invalid("nonlinear relationship takes the log of a non-positive value");
      return co.phi[0] * std::cos(sum) + co.phi[1] * std::log(lin) +
             co.phi[2] * X[1] * std::pow(2.0 * X[2], 4.0 * X[4]) + co.psi_offset;
    }
    case relationship::interaction: {
      const bool in_a = X[4] <= c.set_a_cut;
      const bool in_b = std::find(c.set_b.begin(), c.set_b.end(), static_cast<int>(X[5])) != c.set_b.end();
      if (in_a && in_b) return linear(co.gamma);
      if (in_a) return linear(co.alpha);
      if (in_b) {
        const double arg = X[3] + X[4];
        if (!(arg > 0.0) || X[5] == 0.0) throw config_invalid("interaction branch leaves its domain");
        return co.eta[0] * (X[1] * X[2] - std::log(arg) - X[6] / X[5]) + co.eta[1];
      }
      return co.eta[2] * (std::cos(std::numbers::pi * (X[1] + X[5])) + std::sqrt(X[2] + X[6]) - X[3]) + co.eta[3];
    }
  }
  return 0.0;
}

/// Linear predictor; low SNR contracts it toward its value at the reference
/// covariates by low_snr_factor.
inline double theta(const sim_vector& x, const dgp_config& c) {
  const double v = raw_theta(x, c);
  if (c.snr == snr_level::high) return v;
  const double center = raw_theta(c.reference, c);
  return center + c.low_snr_factor * (v - center);
}

// =============================================================================
// Truth curves and survival times
// =============================================================================

/// Piecewise-Weibull survival function: on [t_j, t_{j+1})
/// H(t) = H_j + B_j (t^nu_j - t_j^nu_j), S = exp(-H).
class truth_curve {
 public:
  truth_curve() = default;
  truth_curve(std::vector<double> starts, std::vector<double> rates, std::vector<double> shapes)
      : starts_(std::move(starts)), rates_(std::move(rates)), shapes_(std::move(shapes)) {
    if (starts_.empty() || starts_.size() != rates_.size() || starts_.size() != shapes_.size()) {
      throw invalid_argument("truth curve needs one rate and shape per segment");
    }
    cumulative_.assign(starts_.size(), 0.0);
    for (std::size_t j = 1; j < starts_.size(); ++j) {
      cumulative_[j] = cumulative_[j - 1] + piece(j - 1, starts_[j]);
    }
  }

  const std::vector<double>& starts() const { return starts_; }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<double>& shapes() const { return shapes_; }

  double hazard_integral(double t) const {
    if (t <= starts_.front()) return 0.0;
    const auto j = segment(t);
    return cumulative_[j] + piece(j, t);
  }

  double operator()(double t) const { return std::exp(-hazard_integral(t)); }

  /// Instantaneous hazard at t.
  double hazard(double t) const {
    const auto j = segment(std::max(t, starts_.front()));
    return rates_[j] * shapes_[j] * std::pow(t, shapes_[j] - 1.0);
  }

  /// Time at which the cumulative hazard reaches `target`.
  double invert(double target) const {
    for (std::size_t j = 0; j < starts_.size(); ++j) {
      const bool last = j + 1 == starts_.size();
      if (last || cumulative_[j + 1] >= target) {
        const double nu = shapes_[j];
        const double base = std::pow(starts_[j], nu) + (target - cumulative_[j]) / rates_[j];
        return std::pow(base, 1.0 / nu);
      }
    }
    return std::numeric_limits<double>::infinity();
  }

  /// int_a^b S(t)^power dt in closed form through incomplete gamma functions.
  double integral(double a, double b, int power) const {
    if (!(b > a)) return 0.0;
    double total = 0.0;
    double lo = std::max(a, starts_.front());
    if (a < starts_.front()) total += std::min(b, starts_.front()) - a;
    while (lo < b) {
      const auto j = segment(lo);
      const double hi = j + 1 < starts_.size() ? std::min(b, starts_[j + 1]) : b;
      total += std::exp(-power * hazard_integral(lo)) * segment_integral(j, lo, hi, power);
      lo = hi;
    }
    return total;
  }

 private:
  std::size_t segment(double t) const {
    return static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), t) - starts_.begin()) - 1;
  }

  double piece(std::size_t j, double t) const {
    return rates_[j] * (std::pow(t, shapes_[j]) - std::pow(starts_[j], shapes_[j]));
  }

  /// int_lo^hi exp(-c (t^nu - lo^nu)) dt with c = power * B_j.
  double segment_integral(std::size_t j, double lo, double hi, int power) const {
    namespace bm = boost::math;
    const double nu = shapes_[j];
    const double c = power * rates_[j];
    const double s = 1.0 / nu;
    const double xa = c * std::pow(lo, nu);
    const double xb = c * std::pow(hi, nu);
    if (xb - xa < 1e-300) return hi - lo;
    if (xa < 600.0) {
      const double scale = std::pow(c, -s) / nu * bm::tgamma(s) * std::exp(xa);
      const double diff = xb < s + 1.0 ? bm::gamma_p(s, xb) - bm::gamma_p(s, xa) : bm::gamma_q(s, xa) - bm::gamma_q(s, xb);
      return scale * diff;
    }
    const double lo_nu = std::pow(lo, nu);
    const auto f = [&](double t) { return std::exp(-c * (std::pow(t, nu) - lo_nu)); };
    return bm::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-13);
  }

  std::vector<double> starts_, rates_, shapes_, cumulative_;
};

/// Truth curve of a full covariate path under the configured hazard form.
inline truth_curve make_truth_curve(const covariate_path& path, const dgp_config& c) {
  std::vector<double> rates, shapes;
  for (const auto& x : path.values) {
    const double th = theta(x, c);
    if (c.hazard == hazard_form::ph) {
      rates.push_back(c.scale * std::exp(th));
      shapes.push_back(c.shape);
    } else {
      const double k = std::exp(th);
      rates.push_back(std::pow(c.scale, k));
      shapes.push_back(k);
    }
  }
  return {path.times, std::move(rates), std::move(shapes)};
}

/// Survival time solving H(T) = -log u.
inline double draw_survival_time(const truth_curve& truth, double u) {
  if (!(u > 0.0 && u < 1.0)) throw invalid_argument("uniform draw must lie in (0, 1)");
  return truth.invert(-std::log(u));
}

// =============================================================================
// Validation
// =============================================================================

/// Support grid of the six driving covariates used for domain checks.
inline std::vector<std::array<double, 7>> driving_support(const dgp_config& c) {
  std::vector<double> unit;
  for (int i = 0; i <= 20; ++i) unit.push_back(i / 20.0);
  const std::vector<double> binary{0.0, 1.0};
  const std::vector<double> five{1, 2, 3, 4, 5};
  const std::vector<double> three{0, 1, 2};
  const std::array<const std::vector<double>*, 6> support{&binary, &unit, &binary, &unit, &five, &three};
  std::vector<std::array<double, 7>> out;
  std::array<std::size_t, 6> at{};
  while (true) {
    std::array<double, 7> x{};
    for (std::size_t k = 0; k < 6; ++k) {
      x[k + 1] = covariate_active(c.scenario, k) ? (*support[k])[at[k]] : c.reference[k];
    }
    out.push_back(x);
    std::size_t k = 0;
    while (k < 6) {
      const std::size_t size = covariate_active(c.scenario, k) ? support[k]->size() : 1;
      if (++at[k] < size) break;
      at[k] = 0;
      ++k;
    }
    if (k == 6) break;
  }
  return out;
}

/// Rejects configurations whose linear predictor leaves its domain, or leaves
/// [-3, 3] under the non-PH hazard, anywhere on the covariate support.
/// Value range of the discrete covariates (1-based numbers); continuous ones
/// have none and cannot be declared categorical.
inline std::optional<std::pair<int, int>> discrete_range(int k) {
  switch (k) {
    case 1: case 3: case 11: case 13: case 19:
      return std::pair{0, 1};
    case 6: case 12: case 16: case 18:
      return std::pair{0, 2};
    case 5: case 9: case 14:
      return std::pair{1, 5};
    default:
      return std::nullopt;
  }
}

inline void validate(const dgp_config& c) {
  if (c.subjects < 1) throw config_invalid("subject count must be positive");
  if (c.observations < 1) throw config_invalid("observation count must be positive");
  if (!(c.scale > 0.0) || !(c.shape > 0.0)) throw config_invalid("Weibull scale and shape must be positive");
  if (!(c.censor_rate >= 0.0 && c.censor_rate < 1.0)) throw config_invalid("censoring rate must lie in [0, 1)");
  if (c.horizon < 0.0) throw config_invalid("horizon must be non-negative");
  if (c.pilot_subjects < 100) throw config_invalid("pilot needs at least 100 subjects");
  for (int k : c.categorical) {
    if (k < 1 || k > 20) throw config_invalid("categorical covariate numbers must lie in 1..20");
    if (!discrete_range(k)) throw config_invalid("x" + std::to_string(k) + " is continuous and cannot be categorical");
  }
  for (const auto& X : driving_support(c)) {
    sim_vector x = c.reference;
    for (std::size_t k = 0; k < 6; ++k) x[k] = X[k + 1];
    const double th = theta(x, c);
    if (!std::isfinite(th)) throw config_invalid("linear predictor is not finite on the covariate support");
    if (c.hazard == hazard_form::non_ph && (th < -3.0 || th > 3.0)) {
      throw config_invalid("linear predictor leaves [-3, 3] on the covariate support (" + std::to_string(th) + ")");
    }
  }
}

// =============================================================================
// Calibration
// =============================================================================

/// Observation window: the 0.95 quantile of T, found by fixed-point iteration
/// because the paths themselves depend on the window.
inline double calibrate_horizon(const dgp_config& c, int pilot = 2000, int iterations = 3) {
  double horizon = std::numeric_limits<double>::infinity();
  std::vector<double> times(static_cast<std::size_t>(pilot));
  for (int it = 0; it <= iterations; ++it) {
    for (int i = 0; i < pilot; ++i) {
      auto rng = make_rng(c.seed, "pilot-horizon", static_cast<std::uint64_t>(i));
      const auto path = draw_covariate_path(rng, std::isfinite(horizon) ? c.observations : 1,
                                            std::isfinite(horizon) ? horizon : 1.0);
      times[static_cast<std::size_t>(i)] = draw_survival_time(make_truth_curve(path, c), uniform_open(rng));
    }
    auto sorted = times;
    const auto q = static_cast<std::size_t>(0.95 * (pilot - 1));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
    horizon = sorted[q];
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw calibration_failure("could not calibrate the horizon");
  return horizon;
}

/// Expected censored fraction under Unif(0, c) censoring: mean(min(T, c)) / c.
inline double expected_censoring(std::span<const double> times, double c) {
  double sum = 0.0;
  for (double t : times) sum += std::min(t, c);
  return sum / (c * static_cast<double>(times.size()));
}

/// c_max such that Unif(0, c_max) censoring censors the target fraction of
/// the given event times; infinity for a zero target.
inline double calibrate_censoring(std::span<const double> event_times, double target) {
  if (target == 0.0) return std::numeric_limits<double>::infinity();
  if (!(target > 0.0 && target < 1.0)) throw calibration_failure("censoring target must lie in [0, 1)");
  if (event_times.empty()) throw calibration_failure("no pilot event times");
  const double tmax = *std::max_element(event_times.begin(), event_times.end());
  double lo = tmax * 1e-9, hi = tmax;
  while (expected_censoring(event_times, hi) > target) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw calibration_failure("censoring target is unreachable");
  }
  if (expected_censoring(event_times, lo) < target) throw calibration_failure("censoring target is unreachable");
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_censoring(event_times, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// =============================================================================
// Masking
// =============================================================================

/// Keeps the baseline and ceil((J-1)/2) random change points; values carry
/// forward across removed changes. Outcome fields are untouched.
inline subject_record mask_changes(const subject_record& s, rng_engine& rng) {
  const std::size_t J = s.intervals();
  if (J <= 1) return s;
  const int changes = static_cast<int>(J - 1);
  auto keep = sample_without_replacement(rng, changes, (changes + 1) / 2);
  std::sort(keep.begin(), keep.end());
  subject_record out;
  out.id = s.id;
  out.end_time = s.end_time;
  out.event = s.event;
  out.obs_times.push_back(s.obs_times[0]);
  out.covariates.push_back(s.covariates[0]);
  for (int k : keep) {
    out.obs_times.push_back(s.obs_times[static_cast<std::size_t>(k) + 1]);
    out.covariates.push_back(s.covariates[static_cast<std::size_t>(k) + 1]);
  }
  return out;
}

// =============================================================================
// Datasets
// =============================================================================


inline bool is_categorical_covariate(const dgp_config& c, int k) {
  return std::find(c.categorical.begin(), c.categorical.end(), k) != c.categorical.end();
}

inline schema simulation_schema(const dgp_config& c) {
  std::vector<covariate_spec> specs;
  for (int k = 1; k <= 20; ++k) {
    covariate_spec s{"x" + std::to_string(k), covariate_type::numeric, {}};
    if (is_categorical_covariate(c, k)) {
      const auto range = discrete_range(k);
      if (!range) throw config_invalid("x" + std::to_string(k) + " is continuous and cannot be categorical");
      s.type = covariate_type::categorical;
      for (int l = range->first; l <= range->second; ++l) s.levels.push_back(std::to_string(l));
    }
    specs.push_back(std::move(s));
  }
  return schema(std::move(specs));
}

/// Encodes simulated values: categorical covariates become level ids.
inline covariate_vector encode_values(const sim_vector& v, const dgp_config& c) {
  covariate_vector out(v.begin(), v.end());
  for (int k : c.categorical) {
    out[static_cast<std::size_t>(k - 1)] -= discrete_range(k)->first;
  }
  return out;
}

struct simulated_data {
  dataset data;                       // observed records (masked under half knowledge)
  std::vector<truth_curve> truths;    // from the full paths
  std::vector<covariate_path> paths;  // full paths
  std::vector<double> event_times;    // T
  std::vector<double> censor_times;   // C
  double horizon = 0.0;
  double censor_max = 0.0;
};

/// Pilot event times used to calibrate censoring.
inline std::vector<double> pilot_event_times(const dgp_config& c, double horizon) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(c.pilot_subjects));
  for (int i = 0; i < c.pilot_subjects; ++i) {
    auto rng = make_rng(c.seed, "pilot-censor", static_cast<std::uint64_t>(i));
    const auto path = draw_covariate_path(rng, c.observations, horizon);
    times.push_back(draw_survival_time(make_truth_curve(path, c), uniform_open(rng)));
  }
  return times;
}

inline simulated_data simulate(const dgp_config& c) {
  validate(c);
  simulated_data out;
  out.horizon = c.horizon > 0.0 ? c.horizon : calibrate_horizon(c);
  out.censor_max = c.censor_rate == 0.0 ? std::numeric_limits<double>::infinity()
                                         : calibrate_censoring(pilot_event_times(c, out.horizon), c.censor_rate);
  out.data.schema = simulation_schema(c);
  for (int i = 0; i < c.subjects; ++i) {
    auto rng = make_rng(c.seed, "subject", static_cast<std::uint64_t>(i));
    auto path = draw_covariate_path(rng, c.observations, out.horizon);
    auto truth = make_truth_curve(path, c);
    const double T = draw_survival_time(truth, uniform_open(rng));
    const double C = std::isfinite(out.censor_max) ? out.censor_max * uniform_open(rng)
                                                    : std::numeric_limits<double>::infinity();
    subject_record s;
    s.id = std::to_string(i + 1);
    s.end_time = std::min(T, C);
    s.event = T <= C;
    for (std::size_t j = 0; j < path.times.size() && path.times[j] < s.end_time; ++j) {
      s.obs_times.push_back(path.times[j]);
      s.covariates.push_back(encode_values(path.values[j], c));
    }
    if (c.knowledge == knowledge::half) s = mask_changes(s, rng);
    out.data.subjects.push_back(std::move(s));
    out.truths.push_back(std::move(truth));
    out.paths.push_back(std::move(path));
    out.event_times.push_back(T);
    out.censor_times.push_back(C);
  }
  return out;
}

}  // namespace ltrcf
