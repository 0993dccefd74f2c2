#pragma once

// Replication driver: simulate a data set, fit Kaplan-Meier and both forests
// under default and proposed settings, score them against the true curves,
// and run IBS cross-validation over {KM, CIF, RRF}.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ltrcf/forest.hpp"
#include "ltrcf/metrics.hpp"
#include "ltrcf/simgen.hpp"

namespace ltrcf {

struct replicate_options {
  dgp_config dgp;
  std::uint64_t seed = 1;
  int trees = 100;
  std::vector<int> mtry_grid;  // empty: default grid
  int cv_folds = 10;           // 0 skips cross-validation
  int threads = 1;             // replicates run concurrently
};

struct method_score {
  std::string name;
  double l2 = 0.0;
  double improvement = 0.0;  // (L2(KM) - L2) / L2(KM)
};

struct mtry_study {
  std::vector<int> grid;
  std::vector<double> l2;         // per grid value, proposed node sizes
  std::vector<double> oob_error;  // per grid value
  int tuned = 0;
  double tuned_l2 = 0.0;
};

struct replicate_outcome {
  std::size_t index = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t forest_seed = 0;
  double censored_fraction = 0.0;
  std::vector<method_score> scores;  // KM, CIF-D, CIF-P, RRF-D, RRF-P
  mtry_study cif_mtry;
  mtry_study rrf_mtry;
  std::vector<std::string> cv_methods;
  std::vector<double> cv_error;
  std::vector<double> cv_l2;  // L2 of each CV candidate on the replicate
  std::size_t cv_choice = 0;
  std::size_t cv_folds_used = 0;
};

/// Kaplan-Meier on the pseudo-subject rows, ignoring covariates.
inline survival_curve<> km_of(const dataset& data) {
  return km_ltrc<double>(training_table::from(data).times);
}

inline subject_predictor km_predictor(const dataset& train) {
  auto curve = std::make_shared<const survival_curve<>>(km_of(train));
  return [curve](const subject_record&) { return *curve; };
}

inline std::vector<survival_curve<>> predict_subjects(const forest& f, const dataset& data) {
  std::vector<survival_curve<>> out;
  out.reserve(data.size());
  for (const auto& s : data.subjects) out.push_back(predict_stream(f, stream_of(s)));
  return out;
}

namespace detail {

inline mtry_study study_of(const tune_result& t, const simulated_data& sim, std::span<const observed_outcome> outcomes) {
  mtry_study s;
  s.grid = t.grid;
  s.oob_error = t.oob_error;
  s.tuned = t.best;
  for (std::size_t g = 0; g < t.grid.size(); ++g) {
    const auto curves = predict_subjects(*t.fits[g], sim.data);
    s.l2.push_back(integrated_l2<truth_curve>(sim.truths, curves, outcomes));
    if (t.grid[g] == t.best) s.tuned_l2 = s.l2.back();
  }
  return s;
}

}  // namespace detail

/// One replicate. Proposed settings use proposed node sizes with the
/// OOB-tuned mtry; cross-validated forests reuse that mtry inside every fold.
inline replicate_outcome run_replicate(const replicate_options& opt, std::size_t index) {
  replicate_outcome out;
  out.index = index;
  out.data_seed = derive_seed(opt.seed, "replicate-data", index);
  out.forest_seed = derive_seed(opt.seed, "replicate-forest", index);

  auto cfg = opt.dgp;
  cfg.seed = out.data_seed;
  const auto sim = simulate(cfg);
  const auto outcomes = outcomes_of(sim.data);
  out.censored_fraction = static_cast<double>(std::count_if(outcomes.begin(), outcomes.end(),
                                                            [](const auto& o) { return !o.event; })) /
                          static_cast<double>(outcomes.size());

  const std::vector<survival_curve<>> km(sim.data.size(), km_of(sim.data));
  const double l2_km = integrated_l2<truth_curve>(sim.truths, km, outcomes);
  const auto score = [&](std::string name, double l2) {
    out.scores.push_back({std::move(name), l2, (l2_km - l2) / l2_km});
  };
  score("KM", l2_km);

  const auto p = sim.data.schema.size();
  const auto n = sim.data.pseudo_subject_count();
  int tuned_mtry[2] = {0, 0};
  for (int k = 0; k < 2; ++k) {
    const auto kind = k == 0 ? forest_kind::cif : forest_kind::rrf;
    const std::string label = k == 0 ? "CIF" : "RRF";
    forest_params base;
    base.kind = kind;
    base.trees = opt.trees;
    base.seed = out.forest_seed;
    score(label + "-D", integrated_l2<truth_curve>(sim.truths, predict_subjects(fit_forest(sim.data, base), sim.data),
                                                   outcomes));
    const auto tuned = tune_mtry(sim.data, proposed_params(n, p, kind, base), opt.mtry_grid);
    auto study = detail::study_of(tuned, sim, outcomes);
    score(label + "-P", study.tuned_l2);
    tuned_mtry[k] = tuned.best;
    (k == 0 ? out.cif_mtry : out.rrf_mtry) = std::move(study);
  }

  if (opt.cv_folds >= 2) {
    std::vector<cv_method> methods;
    methods.push_back({"KM", km_predictor});
    for (int k = 0; k < 2; ++k) {
      const auto kind = k == 0 ? forest_kind::cif : forest_kind::rrf;
      const int mtry = tuned_mtry[k];
      const auto seed = out.forest_seed;
      const int trees = opt.trees;
      methods.push_back({k == 0 ? "CIF" : "RRF", [=](const dataset& train) {
                           forest_params q;
                           q.trees = trees;
                           q.seed = seed;
                           q = proposed_params(train.pseudo_subject_count(), train.schema.size(), kind, q);
                           q.mtry = mtry;
                           return forest_predictor(std::make_shared<const forest>(fit_forest(train, q)));
                         }});
    }
    const auto cv = ibs_cv(sim.data, methods, opt.cv_folds, derive_seed(opt.seed, "replicate-cv", index));
    for (const auto& m : methods) out.cv_methods.push_back(m.name);
    out.cv_error = cv.error;
    out.cv_choice = cv.chosen;
    out.cv_folds_used = cv.folds_used;
    out.cv_l2 = {out.scores[0].l2, out.scores[2].l2, out.scores[4].l2};
  }
  return out;
}

inline std::vector<replicate_outcome> run_replicates(const replicate_options& opt, int reps) {
  if (reps < 1) throw invalid_argument("need at least one replicate");
  std::vector<replicate_outcome> out(static_cast<std::size_t>(reps));
  detail::parallel_for(out.size(), opt.threads, [&](std::size_t r) { out[r] = run_replicate(opt, r); });
  return out;
}

struct improvement_summary {
  std::vector<std::string> methods;  // forests only
  std::vector<mean_sd> improvement;
};

inline improvement_summary summarize_improvements(std::span<const replicate_outcome> reps) {
  improvement_summary out;
  if (reps.empty()) return out;
  for (std::size_t m = 1; m < reps.front().scores.size(); ++m) {
    std::vector<double> v;
    for (const auto& r : reps) v.push_back(r.scores[m].improvement);
    out.methods.push_back(reps.front().scores[m].name);
    out.improvement.push_back(summarize(v));
  }
  return out;
}

inline selection_summary_result summarize_selection(std::span<const replicate_outcome> reps) {
  std::vector<std::vector<double>> l2;
  std::vector<std::size_t> choice;
  for (const auto& r : reps) {
    if (r.cv_l2.empty()) continue;
    l2.push_back(r.cv_l2);
    choice.push_back(r.cv_choice);
  }
  return selection_summary(l2, choice);
}

}  // namespace ltrcf
