// Simulate a cohort, fit both forests and print dynamic survival curves for
// one subject next to the truth.

#include <iomanip>
#include <iostream>

#include "ltrcf/ltrcf.hpp"

int main() {
  ltrcf::dgp_config cfg;
  cfg.subjects = 80;
  cfg.pilot_subjects = 2000;
  cfg.seed = 11;
  const auto sim = ltrcf::simulate(cfg);
  const auto outcomes = ltrcf::outcomes_of(sim.data);

  ltrcf::forest_params params;
  params.trees = 25;
  params.seed = 3;
  const auto n = sim.data.pseudo_subject_count();
  const auto p = sim.data.schema.size();

  const auto& subject = sim.data.subjects.front();
  std::cout << "subject " << subject.id << ": " << subject.intervals() << " intervals, "
            << (subject.event ? "event" : "censored") << " at " << subject.end_time << '\n';
  std::cout << std::fixed << std::setprecision(4);
  const auto km = ltrcf::km_of(sim.data);
  for (auto kind : {ltrcf::forest_kind::cif, ltrcf::forest_kind::rrf}) {
    const auto f = ltrcf::fit_forest(sim.data, ltrcf::proposed_params(n, p, kind, params));
    const auto curve = ltrcf::predict_stream(f, ltrcf::stream_of(subject));
    const auto curves = ltrcf::predict_subjects(f, sim.data);
    std::cout << (kind == ltrcf::forest_kind::cif ? "CIF" : "RRF") << " integrated L2 "
              << ltrcf::integrated_l2<ltrcf::truth_curve>(sim.truths, curves, outcomes) << '\n';
    for (double t : {0.5 * subject.end_time, subject.end_time}) {
      std::cout << "  S(" << t << ") = " << curve(t) << "  truth " << sim.truths.front()(t) << "  KM " << km(t)
                << '\n';
    }
  }
  const std::vector<ltrcf::survival_curve<>> flat(sim.data.size(), km);
  std::cout << "KM integrated L2 " << ltrcf::integrated_l2<ltrcf::truth_curve>(sim.truths, flat, outcomes) << '\n';
  return 0;
}
