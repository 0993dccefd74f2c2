// ltrcf command-line frontend.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltrcf/ltrcf.hpp"

namespace fs = std::filesystem;
using ltrcf::json;

namespace {

constexpr int usage_exit = 2;
constexpr int internal_exit = 1;

struct global_options {
  bool json_output = false;
};

// =============================================================================
// Shared helpers
// =============================================================================

std::string stamp(const std::string& command, const std::string& hash, std::uint64_t seed) {
  return "ltrcf " + command + " config_hash=" + hash + " seed=" + std::to_string(seed);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ltrcf::io_error("cannot write " + path.string());
  out << text;
  if (!out) throw ltrcf::io_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ltrcf::io_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_schema_path(const fs::path& data) {
  auto p = data;
  p.replace_extension(".schema.json");
  return p;
}

ltrcf::dataset load_data(const fs::path& path, const std::string& schema_path) {
  if (!schema_path.empty()) {
    const auto s = ltrcf::read_schema_file(schema_path);
    return ltrcf::read_dataset(path, &s);
  }
  const auto side = sidecar_schema_path(path);
  if (fs::exists(side)) {
    const auto s = ltrcf::read_schema_file(side);
    return ltrcf::read_dataset(path, &s);
  }
  return ltrcf::read_dataset(path);
}

ltrcf::tau_policy parse_tau(const std::string& s) {
  if (s == "common") return ltrcf::tau_policy::common_max();
  if (s == "subject") return ltrcf::tau_policy::per_subject();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && v > 0) return ltrcf::tau_policy::fixed(v);
  } catch (const std::exception&) {
  }
  throw ltrcf::invalid_argument("--tau must be 'common', 'subject' or a positive number");
}

ltrcf::forest_kind parse_kind(const std::string& s) {
  return s == "rrf" ? ltrcf::forest_kind::rrf : ltrcf::forest_kind::cif;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const global_options& g, const json& result, const std::string& human) {
  if (g.json_output) {
    std::cout << result.dump(2) << '\n';
  } else {
    std::cout << human;
  }
}

ltrcf::svg::step_series series_of(const std::string& name, const ltrcf::survival_curve<>& c) {
  return {name, c.times(), c.values(), c.initial()};
}

// =============================================================================
// simulate
// =============================================================================

struct simulate_options {
  std::string config;
  std::string out;
  std::string truth;
  std::string schema_out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int subjects = 0;
};

int run_simulate(const global_options& g, const simulate_options& o) {
  auto cfg = o.config.empty() ? ltrcf::dgp_config{} : ltrcf::read_dgp_config(o.config);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.subjects > 0) cfg.subjects = o.subjects;
  ltrcf::validate(cfg);
  const auto cfg_json = ltrcf::dgp_config_to_json(cfg);
  const auto hash = ltrcf::config_hash(cfg_json);
  const auto sim = ltrcf::simulate(cfg);

  std::ostringstream csv;
  ltrcf::write_long_csv(sim.data, csv, stamp("simulate", hash, cfg.seed));
  write_text(o.out, csv.str());
  const auto schema_path = o.schema_out.empty() ? sidecar_schema_path(o.out) : fs::path(o.schema_out);
  json schema_doc{{"covariates", ltrcf::schema_to_json(sim.data.schema)}, {"config_hash", hash}, {"seed", cfg.seed}};
  write_text(schema_path, schema_doc.dump(2) + "\n");

  std::vector<std::string> outputs{o.out, schema_path.string()};
  if (!o.truth.empty()) {
    std::vector<ltrcf::truth_record> records;
    for (std::size_t i = 0; i < sim.truths.size(); ++i) {
      records.push_back({sim.data.subjects[i].id, sim.truths[i], sim.event_times[i], sim.censor_times[i]});
    }
    json meta{{"config", cfg_json}, {"config_hash", hash}, {"seed", cfg.seed}, {"horizon", sim.horizon}};
    ltrcf::save_json_document(ltrcf::truth_to_json(records, meta), o.truth);
    outputs.push_back(o.truth);
  }

  std::size_t censored = 0;
  for (const auto& s : sim.data.subjects) censored += s.event ? 0 : 1;
  const double frac = static_cast<double>(censored) / static_cast<double>(sim.data.size());
  json result{{"command", "simulate"},
              {"subjects", sim.data.size()},
              {"pseudo_subjects", sim.data.pseudo_subject_count()},
              {"censored_fraction", frac},
              {"horizon", sim.horizon},
              {"censor_max", std::isfinite(sim.censor_max) ? json(sim.censor_max) : json("inf")},
              {"config_hash", hash},
              {"seed", cfg.seed},
              {"outputs", outputs}};
  std::ostringstream human;
  human << "simulated " << sim.data.size() << " subjects (" << sim.data.pseudo_subject_count()
        << " pseudo-subjects), censored fraction " << frac << "\nwrote";
  for (const auto& p : outputs) human << ' ' << p;
  human << '\n';
  emit(g, result, human.str());
  return 0;
}

// =============================================================================
// fit
// =============================================================================

struct fit_options {
  std::string data;
  std::string schema;
  std::string kind = "cif";
  std::string params = "proposed";
  std::string mtry = "default";
  std::vector<int> grid;
  int trees = 100;
  std::uint64_t seed = 1;
  std::string bootstrap = "subject";
  int threads = 1;
  std::string out;
};

ltrcf::forest_params base_params(const std::string& kind, const std::string& params, int trees, std::uint64_t seed,
                                 const ltrcf::dataset& data, int threads) {
  ltrcf::forest_params p;
  p.kind = parse_kind(kind);
  p.trees = trees;
  p.seed = seed;
  p.threads = threads;
  if (params == "proposed") p = ltrcf::proposed_params(data.pseudo_subject_count(), data.schema.size(), p.kind, p);
  return p;
}

int run_fit(const global_options& g, const fit_options& o) {
  const auto data = load_data(o.data, o.schema);
  auto p = base_params(o.kind, o.params, o.trees, o.seed, data, o.threads);
  p.unit = o.bootstrap == "pseudo" ? ltrcf::bootstrap_unit::pseudo_subject : ltrcf::bootstrap_unit::subject;
  json result{{"command", "fit"}};
  std::ostringstream human;
  std::shared_ptr<const ltrcf::forest> model;
  if (o.mtry == "tune") {
    const auto t = ltrcf::tune_mtry(data, p, o.grid);
    model = t.best_fit();
    result["tuning"] = {{"grid", t.grid}, {"oob_ibs", t.oob_error}, {"best", t.best}};
    human << "tuned mtry = " << t.best << " (OOB IBS";
    for (std::size_t i = 0; i < t.grid.size(); ++i) human << ' ' << t.grid[i] << ':' << t.oob_error[i];
    human << ")\n";
  } else {
    if (o.mtry != "default") {
      try {
        p.mtry = std::stoi(o.mtry);
      } catch (const std::exception&) {
        throw ltrcf::invalid_argument("--mtry must be an integer, 'default' or 'tune'");
      }
      if (p.mtry < 1 || p.mtry > static_cast<int>(data.schema.size())) {
        throw ltrcf::invalid_argument("--mtry must lie in [1, p]");
      }
    }
    model = std::make_shared<const ltrcf::forest>(ltrcf::fit_forest(data, p));
  }
  ltrcf::save_forest(*model, o.out);
  const auto params_json = ltrcf::params_to_json(model->params);
  const auto hash = ltrcf::config_hash(params_json);
  result["params"] = params_json;
  result["config_hash"] = hash;
  result["seed"] = model->params.seed;
  result["subjects"] = data.size();
  result["pseudo_subjects"] = data.pseudo_subject_count();
  result["degenerate_trees"] = model->degenerate_trees;
  result["output"] = o.out;
  human << "fitted " << (model->params.kind == ltrcf::forest_kind::cif ? "CIF" : "RRF") << " forest: "
        << model->params.trees << " trees, mtry " << model->params.mtry << ", " << data.size() << " subjects\nwrote "
        << o.out << '\n';
  emit(g, result, human.str());
  return 0;
}

// =============================================================================
// predict
// =============================================================================

struct predict_options {
  std::string model;
  std::string stream;
  std::string counts;
  std::string branch;
  std::string out;
  std::string plot;
  int compare_update = -1;
  double horizon = 0.0;
};

int run_predict(const global_options& g, const predict_options& o) {
  if (o.model.empty() == o.counts.empty()) {
    throw ltrcf::invalid_argument("give exactly one of --model (with --stream) or --segment-counts");
  }
  std::vector<std::pair<std::string, std::vector<ltrcf::survival_curve<>>>> branches;
  std::vector<std::vector<double>> change_times;
  std::string hash;
  std::uint64_t seed = 0;
  if (!o.model.empty()) {
    if (o.stream.empty()) throw ltrcf::invalid_argument("--model needs --stream");
    const auto f = ltrcf::load_forest(o.model);
    const auto stream = ltrcf::read_stream(ltrcf::read_csv_file(o.stream), f.table.schema);
    std::vector<ltrcf::survival_curve<>> segs;
    for (const auto& x : stream.values) segs.push_back(f.predict(x));
    branches.emplace_back("stream", std::move(segs));
    change_times.push_back(stream.change_times);
    hash = ltrcf::config_hash(ltrcf::params_to_json(f.params));
    seed = f.params.seed;
  } else {
    const auto all = ltrcf::read_segment_counts(ltrcf::read_csv_file(o.counts));
    for (const auto& [name, cohorts] : all) {
      if (!o.branch.empty() && name != o.branch) continue;
      branches.emplace_back(name, ltrcf::empirical_segment_curves(cohorts));
      change_times.push_back(ltrcf::change_times_of(cohorts));
    }
    if (branches.empty()) throw ltrcf::invalid_argument("no branch named '" + o.branch + "'");
    hash = ltrcf::config_hash(json{{"segment_counts", read_text(o.counts)}, {"branch", o.branch}});
  }

  const double horizon = o.horizon > 0 ? o.horizon : std::numeric_limits<double>::infinity();
  std::ostringstream csv;
  csv << "# " << stamp("predict", hash, seed) << '\n';
  const bool multi = branches.size() > 1;
  csv << (multi ? "branch," : "") << "time,survival,segment" << (o.compare_update >= 0 ? ",without_update" : "")
      << '\n';
  csv.precision(17);
  json result{{"command", "predict"}, {"config_hash", hash}, {"seed", seed}, {"curves", json::array()}};
  std::vector<ltrcf::svg::step_series> plot;
  std::ostringstream human;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& [name, segs] = branches[b];
    const auto& ct = change_times[b];
    const auto table = ltrcf::dynamic_table(segs, ct, horizon);
    std::optional<ltrcf::survival_curve<>> frozen;
    if (o.compare_update >= 0) {
      if (o.compare_update < 1 || static_cast<std::size_t>(o.compare_update) >= segs.size()) {
        throw ltrcf::invalid_argument("--compare-update must name a change index in [1, segments)");
      }
      auto both = ltrcf::curve_with_and_without_update(segs, ct, static_cast<std::size_t>(o.compare_update), horizon);
      frozen = std::move(both.second);
      plot.push_back(series_of(name, both.first));
      plot.push_back(series_of(name + " (no update at change " + std::to_string(o.compare_update) + ")", *frozen));
    } else {
      plot.push_back(series_of(name, ltrcf::dynamic_curve(segs, ct, horizon)));
    }
    json pts = json::array();
    for (const auto& pt : table) {
      if (multi) csv << name << ',';
      csv << pt.time << ',' << pt.survival << ',' << pt.segment;
      if (frozen) csv << ',' << (*frozen)(pt.time);
      csv << '\n';
      json j{{"time", pt.time}, {"survival", pt.survival}, {"segment", pt.segment}};
      if (frozen) j["without_update"] = (*frozen)(pt.time);
      pts.push_back(std::move(j));
    }
    result["curves"].push_back({{"name", name}, {"points", std::move(pts)}});
    human << name << ": " << table.size() << " points";
    if (!table.empty()) human << ", S(" << table.back().time << ") = " << table.back().survival;
    human << '\n';
  }
  if (!o.out.empty()) {
    write_text(o.out, csv.str());
    result["output"] = o.out;
  }
  if (!o.plot.empty()) {
    double h = o.horizon;
    if (!(h > 0)) {
      for (const auto& s : plot) {
        if (!s.times.empty()) h = std::max(h, s.times.back() * 1.05);
      }
    }
    std::string svg = ltrcf::svg::step_plot(plot, h, "Dynamic survival estimate");
    svg.insert(svg.find('\n') + 1, "<!-- " + stamp("predict", hash, seed) + " -->\n");
    write_text(o.plot, svg);
    result["plot"] = o.plot;
  }
  if (o.out.empty() && !g.json_output) {
    std::cout << csv.str();
    return 0;
  }
  emit(g, result, human.str());
  return 0;
}

// =============================================================================
// km
// =============================================================================

struct km_options {
  std::string data;
  std::string schema;
  std::string out;
};

int run_km(const global_options& g, const km_options& o) {
  const auto data = load_data(o.data, o.schema);
  const auto curve = ltrcf::km_of(data);
  const auto hash = ltrcf::config_hash(json{{"km", read_text(o.data)}});
  std::ostringstream csv;
  csv << "# " << stamp("km", hash, 0) << '\n' << "time,survival\n";
  csv.precision(17);
  csv << 0.0 << ',' << curve.initial() << '\n';
  json pts = json::array();
  for (std::size_t j = 0; j < curve.times().size(); ++j) {
    csv << curve.times()[j] << ',' << curve.values()[j] << '\n';
    pts.push_back({{"time", curve.times()[j]}, {"survival", curve.values()[j]}});
  }
  json result{{"command", "km"}, {"config_hash", hash}, {"subjects", data.size()}, {"points", std::move(pts)}};
  if (!o.out.empty()) {
    write_text(o.out, csv.str());
    result["output"] = o.out;
  } else if (!g.json_output) {
    std::cout << csv.str();
    return 0;
  }
  emit(g, result, std::to_string(curve.times().size()) + " jump times written to " + o.out + "\n");
  return 0;
}

// =============================================================================
// tune-mtry
// =============================================================================

struct tune_options {
  std::string data;
  std::string schema;
  std::string kind = "cif";
  std::string params = "proposed";
  std::vector<int> grid;
  int trees = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

int run_tune(const global_options& g, const tune_options& o) {
  const auto data = load_data(o.data, o.schema);
  const auto p = base_params(o.kind, o.params, o.trees, o.seed, data, o.threads);
  const auto t = ltrcf::tune_mtry(data, p, o.grid);
  auto cfg = ltrcf::params_to_json(p);
  cfg["grid"] = t.grid;
  const auto hash = ltrcf::config_hash(cfg);
  json result{{"command", "tune-mtry"}, {"grid", t.grid},        {"oob_ibs", t.oob_error},
              {"best", t.best},         {"config_hash", hash},   {"seed", o.seed}};
  std::ostringstream human;
  human << "mtry,oob_ibs\n";
  for (std::size_t i = 0; i < t.grid.size(); ++i) human << t.grid[i] << ',' << fmt(t.oob_error[i]) << '\n';
  if (!o.out.empty()) {
    write_text(o.out, "# " + stamp("tune-mtry", hash, o.seed) + "\n" + human.str());
    result["output"] = o.out;
  }
  human << "best mtry = " << t.best << '\n';
  emit(g, result, human.str());
  return 0;
}

// =============================================================================
// evaluate
// =============================================================================

struct evaluate_options {
  std::string data;
  std::string schema;
  std::string metric = "ibs";
  std::string predictor = "model";
  std::string model;
  std::string truth;
  double time = -1.0;
  std::string tau = "common";
};

int run_evaluate(const global_options& g, const evaluate_options& o) {
  const auto data = load_data(o.data, o.schema);
  const auto outcomes = ltrcf::outcomes_of(data);
  std::vector<ltrcf::truth_record> truths;
  if (!o.truth.empty()) {
    truths = ltrcf::truth_from_json(ltrcf::load_json_document(o.truth));
    if (truths.size() != data.size()) throw ltrcf::invalid_argument("truth file and data disagree on subject count");
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (truths[i].id != data.subjects[i].id) {
        throw ltrcf::invalid_argument("truth file subject '" + truths[i].id + "' does not match data order");
      }
    }
  }
  if (o.metric == "l2" && truths.empty()) throw ltrcf::invalid_argument("--metric l2 needs --truth");
  if (o.predictor == "oracle" && truths.empty()) throw ltrcf::invalid_argument("--predictor oracle needs --truth");
  if (o.predictor == "model" && o.model.empty()) throw ltrcf::invalid_argument("--predictor model needs --model");

  std::string hash;
  std::uint64_t seed = 0;
  std::vector<ltrcf::survival_curve<>> curves;
  if (o.predictor == "model") {
    const auto f = ltrcf::load_forest(o.model);
    curves = ltrcf::predict_subjects(f, data);
    hash = ltrcf::config_hash(ltrcf::params_to_json(f.params));
    seed = f.params.seed;
  } else if (o.predictor == "km") {
    curves.assign(data.size(), ltrcf::km_of(data));
    hash = ltrcf::config_hash(json{{"predictor", "km"}});
  } else {
    hash = ltrcf::config_hash(json{{"predictor", "oracle"}});
  }

  json result{{"command", "evaluate"}, {"metric", o.metric}, {"predictor", o.predictor},
              {"config_hash", hash},   {"seed", seed}};
  double value = 0.0;
  if (o.metric == "l2") {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& truth = truths[i].curve;
      if (o.predictor == "oracle") {
        sum += ltrcf::subject_l2_continuous(truth, truth, truth.starts(), outcomes[i].time);
      } else {
        sum += ltrcf::subject_l2(truth, curves[i], outcomes[i].time);
      }
    }
    value = sum / static_cast<double>(data.size());
  } else {
    if (o.predictor == "oracle") throw ltrcf::invalid_argument("the oracle predictor supports --metric l2 only");
    const auto censoring = ltrcf::km_censoring(outcomes);
    ltrcf::metric_value v;
    if (o.metric == "brier") {
      if (!(o.time >= 0)) throw ltrcf::invalid_argument("--metric brier needs --time");
      v = ltrcf::brier(o.time, curves, outcomes, censoring);
      result["time"] = o.time;
    } else {
      v = ltrcf::ibs(curves, outcomes, censoring, parse_tau(o.tau));
      result["tau"] = o.tau;
    }
    value = v.value;
    result["dropped"] = v.dropped;
    if (v.dropped > 0) std::cerr << "warning: " << v.dropped << " terms dropped (censoring survival is zero)\n";
  }
  result["value"] = value;
  emit(g, result, o.metric + " = " + fmt(value) + "\n");
  return 0;
}

// =============================================================================
// cv-select
// =============================================================================

struct cv_options {
  std::string data;
  std::string schema;
  std::vector<std::string> methods{"km", "cif", "rrf"};
  int k = 10;
  std::uint64_t seed = 1;
  std::string params = "proposed";
  std::string mtry = "default";
  int trees = 100;
  int threads = 1;
  std::string tau = "common";
  std::string out;
};

int run_cv(const global_options& g, const cv_options& o) {
  const auto data = load_data(o.data, o.schema);
  std::vector<ltrcf::cv_method> methods;
  for (const auto& name : o.methods) {
    if (name == "km") {
      methods.push_back({"km", ltrcf::km_predictor});
      continue;
    }
    if (name != "cif" && name != "rrf") throw ltrcf::invalid_argument("unknown method '" + name + "'");
    int mtry = 0;
    if (o.mtry == "tune") {
      mtry = ltrcf::tune_mtry(data, base_params(name, o.params, o.trees, o.seed, data, o.threads), {}).best;
    } else if (o.mtry != "default") {
      mtry = std::stoi(o.mtry);
    }
    methods.push_back({name, [=, &o](const ltrcf::dataset& train) {
                         auto p = base_params(name, o.params, o.trees, o.seed, train, o.threads);
                         if (mtry > 0) p.mtry = mtry;
                         return ltrcf::forest_predictor(std::make_shared<const ltrcf::forest>(ltrcf::fit_forest(train, p)));
                       }});
  }
  const auto r = ltrcf::ibs_cv(data, methods, o.k, o.seed, parse_tau(o.tau));
  json cfg{{"methods", o.methods}, {"k", o.k}, {"params", o.params}, {"mtry", o.mtry},
           {"trees", o.trees},     {"tau", o.tau}};
  const auto hash = ltrcf::config_hash(cfg);
  json result{{"command", "cv-select"}, {"methods", o.methods},           {"cv_ibs", r.error},
              {"chosen", o.methods[r.chosen]}, {"folds_used", r.folds_used}, {"folds_skipped", r.folds_skipped},
              {"dropped", r.dropped},   {"config_hash", hash},            {"seed", o.seed}};
  if (r.folds_skipped > 0) std::cerr << "warning: " << r.folds_skipped << " folds without events were skipped\n";
  std::ostringstream table;
  table << "method,cv_ibs\n";
  for (std::size_t m = 0; m < methods.size(); ++m) table << o.methods[m] << ',' << fmt(r.error[m]) << '\n';
  if (!o.out.empty()) {
    write_text(o.out, "# " + stamp("cv-select", hash, o.seed) + "\n" + table.str());
    result["output"] = o.out;
  }
  emit(g, result, table.str() + "chosen: " + o.methods[r.chosen] + " (" + std::to_string(r.folds_used) + " folds)\n");
  return 0;
}

// =============================================================================
// replicate
// =============================================================================

struct replicate_cli_options {
  std::string config;
  int reps = 20;
  std::uint64_t seed = 1;
  int subjects = 0;
  int trees = 100;
  int cv_folds = 10;
  std::vector<int> grid;
  int threads = 1;
  std::string out_dir = "replicate_out";
};

json mean_sd_json(const ltrcf::mean_sd& m) { return {{"mean", m.mean}, {"sd", m.sd}, {"n", m.count}}; }

int run_replicate_cmd(const global_options& g, const replicate_cli_options& o) {
  ltrcf::replicate_options opt;
  opt.dgp = o.config.empty() ? ltrcf::dgp_config{} : ltrcf::read_dgp_config(o.config);
  if (o.subjects > 0) opt.dgp.subjects = o.subjects;
  ltrcf::validate(opt.dgp);
  opt.seed = o.seed;
  opt.trees = o.trees;
  opt.mtry_grid = o.grid;
  opt.cv_folds = o.cv_folds;
  opt.threads = o.threads;

  json cfg{{"dgp", ltrcf::dgp_config_to_json(opt.dgp)}, {"reps", o.reps},          {"trees", o.trees},
           {"cv_folds", o.cv_folds},                  {"mtry_grid", o.grid}};
  cfg["dgp"].erase("seed");
  const auto hash = ltrcf::config_hash(cfg);
  const auto header = "# " + stamp("replicate", hash, o.seed) + "\n";
  const auto reps = ltrcf::run_replicates(opt, o.reps);
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);

  std::ostringstream per;
  per << header << "replicate,data_seed,censored_fraction,method,l2,improvement\n";
  for (const auto& r : reps) {
    for (const auto& s : r.scores) {
      per << r.index << ',' << r.data_seed << ',' << fmt(r.censored_fraction) << ',' << s.name << ',' << fmt(s.l2)
          << ',' << fmt(s.improvement) << '\n';
    }
  }
  write_text(dir / "replicates.csv", per.str());

  const auto imp = ltrcf::summarize_improvements(reps);
  std::ostringstream t2;
  t2 << header << "method,mean_improvement,sd_improvement,replicates\n";
  json t2j = json::array();
  for (std::size_t m = 0; m < imp.methods.size(); ++m) {
    t2 << imp.methods[m] << ',' << fmt(imp.improvement[m].mean) << ',' << fmt(imp.improvement[m].sd) << ','
       << imp.improvement[m].count << '\n';
    t2j.push_back({{"method", imp.methods[m]}, {"improvement", mean_sd_json(imp.improvement[m])}});
  }
  write_text(dir / "table2.csv", t2.str());

  json summary{{"command", "replicate"}, {"config_hash", hash}, {"seed", o.seed},
               {"replicates", o.reps},   {"improvement_over_km", t2j}};
  std::ostringstream human;
  human << "relative improvement over KM (mean ± sd over " << o.reps << " replicates)\n";
  for (std::size_t m = 0; m < imp.methods.size(); ++m) {
    human << "  " << imp.methods[m] << ": " << imp.improvement[m].mean << " ± " << imp.improvement[m].sd << '\n';
  }

  if (o.cv_folds >= 2) {
    const auto sel = ltrcf::summarize_selection(reps);
    std::ostringstream t3;
    t3 << header << "p_best,r_best_mean,r_best_sd,r_worst_mean,r_worst_sd,excluded\n"
       << fmt(sel.p_best) << ',' << fmt(sel.r_best.mean) << ',' << fmt(sel.r_best.sd) << ',' << fmt(sel.r_worst.mean)
       << ',' << fmt(sel.r_worst.sd) << ',' << sel.excluded << '\n';
    write_text(dir / "table3.csv", t3.str());
    std::ostringstream cv;
    cv << header << "replicate,method,cv_ibs,l2,chosen\n";
    for (const auto& r : reps) {
      for (std::size_t m = 0; m < r.cv_methods.size(); ++m) {
        cv << r.index << ',' << r.cv_methods[m] << ',' << fmt(r.cv_error[m]) << ',' << fmt(r.cv_l2[m]) << ','
           << (m == r.cv_choice ? 1 : 0) << '\n';
      }
    }
    write_text(dir / "cv_choices.csv", cv.str());
    summary["selection"] = {{"methods", reps.front().cv_methods},
                            {"p_best", sel.p_best},
                            {"r_best", mean_sd_json(sel.r_best)},
                            {"r_worst", mean_sd_json(sel.r_worst)},
                            {"excluded", sel.excluded}};
    human << "CV selection: p_B = " << sel.p_best << ", r_B = " << sel.r_best.mean << " ± " << sel.r_best.sd
          << ", r_W = " << sel.r_worst.mean << " ± " << sel.r_worst.sd << '\n';
  }

  for (int k = 0; k < 2; ++k) {
    const std::string name = k == 0 ? "cif" : "rrf";
    const auto study_of = [&](const ltrcf::replicate_outcome& r) -> const ltrcf::mtry_study& {
      return k == 0 ? r.cif_mtry : r.rrf_mtry;
    };
    const auto& grid = study_of(reps.front()).grid;
    std::vector<ltrcf::svg::box_group> boxes;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      ltrcf::svg::box_group b{std::to_string(grid[gi]), {}};
      for (const auto& r : reps) b.values.push_back(study_of(r).l2[gi]);
      boxes.push_back(std::move(b));
    }
    ltrcf::svg::box_group opt_box{"Opt", {}}, tuned_box{"Tuned", {}};
    std::ostringstream csv;
    csv << header << "replicate,mtry,l2,oob_ibs,tuned\n";
    for (const auto& r : reps) {
      const auto& s = study_of(r);
      opt_box.values.push_back(*std::min_element(s.l2.begin(), s.l2.end()));
      tuned_box.values.push_back(s.tuned_l2);
      for (std::size_t gi = 0; gi < s.grid.size(); ++gi) {
        csv << r.index << ',' << s.grid[gi] << ',' << fmt(s.l2[gi]) << ',' << fmt(s.oob_error[gi]) << ','
            << (s.grid[gi] == s.tuned ? 1 : 0) << '\n';
      }
    }
    boxes.push_back(std::move(opt_box));
    boxes.push_back(std::move(tuned_box));
    write_text(dir / ("mtry_" + name + ".csv"), csv.str());
    std::string svg = ltrcf::svg::box_chart(boxes, (k == 0 ? "CIF" : "RRF") + std::string(" integrated L2 by mtry"),
                                            "mtry", "integrated L2");
    svg.insert(svg.find('\n') + 1, "<!-- " + stamp("replicate", hash, o.seed) + " -->\n");
    write_text(dir / ("mtry_" + name + ".svg"), svg);
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  summary["output_dir"] = dir.string();
  emit(g, summary, human.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival forests for left-truncated right-censored data with time-varying covariates"};
  app.require_subcommand(1);
  global_options g;
  app.add_flag("--json", g.json_output, "Print machine-readable JSON");

  simulate_options so;
  auto* sim = app.add_subcommand("simulate", "Generate a simulated data set");
  sim->add_option("--config", so.config, "DGP config (TOML)")->check(CLI::ExistingFile);
  sim->add_option("--out", so.out, "Output CSV (long format)")->required();
  sim->add_option("--truth", so.truth, "Truth file (.json text, otherwise CBOR)");
  sim->add_option("--schema-out", so.schema_out, "Schema sidecar path");
  sim->add_option("--seed", so.seed, "Root seed (overrides config)")->each([&](const std::string&) { so.seed_set = true; });
  sim->add_option("--subjects", so.subjects, "Subject count (overrides config)");

  fit_options fo;
  auto* fit = app.add_subcommand("fit", "Fit a forest");
  fit->add_option("data", fo.data, "Training CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--schema", fo.schema, "Schema JSON");
  fit->add_option("--model", fo.kind, "Forest type")->check(CLI::IsMember({"cif", "rrf"}));
  fit->add_option("--params", fo.params, "Node-size settings")->check(CLI::IsMember({"default", "proposed"}));
  fit->add_option("--mtry", fo.mtry, "Integer, 'default' or 'tune'");
  fit->add_option("--grid", fo.grid, "mtry grid for tuning")->delimiter(',');
  fit->add_option("--trees", fo.trees, "Number of trees")->check(CLI::PositiveNumber);
  fit->add_option("--seed", fo.seed, "Seed");
  fit->add_option("--bootstrap", fo.bootstrap, "Resampling unit")->check(CLI::IsMember({"subject", "pseudo"}));
  fit->add_option("--threads", fo.threads, "Worker threads")->check(CLI::PositiveNumber);
  fit->add_option("-o,--out", fo.out, "Model file (.json text, otherwise CBOR)")->required();

  predict_options po;
  auto* pred = app.add_subcommand("predict", "Dynamic survival curve for a covariate stream");
  pred->add_option("--model", po.model, "Model file")->check(CLI::ExistingFile);
  pred->add_option("--stream", po.stream, "Query stream CSV (time,x...)")->check(CLI::ExistingFile);
  pred->add_option("--segment-counts", po.counts, "Cohort counts CSV")->check(CLI::ExistingFile);
  pred->add_option("--branch", po.branch, "Cohort branch to evaluate (default: all)");
  pred->add_option("--compare-update", po.compare_update, "Also emit the curve without the update at this change");
  pred->add_option("--horizon", po.horizon, "Truncate the curve at this time");
  pred->add_option("-o,--out", po.out, "Curve CSV");
  pred->add_option("--plot", po.plot, "SVG step plot");

  km_options ko;
  auto* kmc = app.add_subcommand("km", "Product-limit survival curve of a data set");
  kmc->add_option("data", ko.data, "Data CSV")->required()->check(CLI::ExistingFile);
  kmc->add_option("--schema", ko.schema, "Schema JSON");
  kmc->add_option("-o,--out", ko.out, "Curve CSV (time,survival)");

  tune_options to;
  auto* tune = app.add_subcommand("tune-mtry", "OOB tuning of mtry");
  tune->add_option("data", to.data, "Training CSV")->required()->check(CLI::ExistingFile);
  tune->add_option("--schema", to.schema, "Schema JSON");
  tune->add_option("--model", to.kind, "Forest type")->check(CLI::IsMember({"cif", "rrf"}));
  tune->add_option("--params", to.params, "Node-size settings")->check(CLI::IsMember({"default", "proposed"}));
  tune->add_option("--grid", to.grid, "mtry grid")->delimiter(',');
  tune->add_option("--trees", to.trees, "Number of trees")->check(CLI::PositiveNumber);
  tune->add_option("--seed", to.seed, "Seed");
  tune->add_option("--threads", to.threads, "Worker threads")->check(CLI::PositiveNumber);
  tune->add_option("-o,--out", to.out, "Table CSV");

  evaluate_options eo;
  auto* eval = app.add_subcommand("evaluate", "Brier, IBS or integrated L2");
  eval->add_option("data", eo.data, "Evaluation CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--schema", eo.schema, "Schema JSON");
  eval->add_option("--metric", eo.metric, "Metric")->check(CLI::IsMember({"ibs", "brier", "l2"}));
  eval->add_option("--predictor", eo.predictor, "Curves to score")->check(CLI::IsMember({"model", "km", "oracle"}));
  eval->add_option("--model", eo.model, "Model file")->check(CLI::ExistingFile);
  eval->add_option("--truth", eo.truth, "Truth file")->check(CLI::ExistingFile);
  eval->add_option("--time", eo.time, "Time point for the Brier score");
  eval->add_option("--tau", eo.tau, "IBS horizon: common, subject or a number");

  cv_options co;
  auto* cv = app.add_subcommand("cv-select", "IBS K-fold cross-validation model selection");
  cv->add_option("data", co.data, "Data CSV")->required()->check(CLI::ExistingFile);
  cv->add_option("--schema", co.schema, "Schema JSON");
  cv->add_option("--methods", co.methods, "Candidate methods")->delimiter(',');
  cv->add_option("--k", co.k, "Folds")->check(CLI::Range(2, 1000000));
  cv->add_option("--seed", co.seed, "Seed");
  cv->add_option("--params", co.params, "Node-size settings")->check(CLI::IsMember({"default", "proposed"}));
  cv->add_option("--mtry", co.mtry, "Integer, 'default' or 'tune'");
  cv->add_option("--trees", co.trees, "Number of trees")->check(CLI::PositiveNumber);
  cv->add_option("--threads", co.threads, "Worker threads")->check(CLI::PositiveNumber);
  cv->add_option("--tau", co.tau, "IBS horizon: common, subject or a number");
  cv->add_option("-o,--out", co.out, "Table CSV");

  replicate_cli_options ro;
  auto* rep = app.add_subcommand("replicate", "Seeded replicates of a DGP against KM and both forests");
  rep->add_option("--config", ro.config, "DGP config (TOML)")->check(CLI::ExistingFile);
  rep->add_option("--reps", ro.reps, "Replicates")->check(CLI::PositiveNumber);
  rep->add_option("--seed", ro.seed, "Root seed");
  rep->add_option("--subjects", ro.subjects, "Subject count (overrides config)");
  rep->add_option("--trees", ro.trees, "Trees per forest")->check(CLI::PositiveNumber);
  rep->add_option("--cv-folds", ro.cv_folds, "CV folds (0 disables)");
  rep->add_option("--grid", ro.grid, "mtry grid")->delimiter(',');
  rep->add_option("--threads", ro.threads, "Replicates run concurrently")->check(CLI::PositiveNumber);
  rep->add_option("--out-dir", ro.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage_exit;
  }

  try {
    if (*sim) return run_simulate(g, so);
    if (*fit) return run_fit(g, fo);
    if (*pred) return run_predict(g, po);
    if (*kmc) return run_km(g, ko);
    if (*tune) return run_tune(g, to);
    if (*eval) return run_evaluate(g, eo);
    if (*cv) return run_cv(g, co);
    if (*rep) return run_replicate_cmd(g, ro);
  } catch (const ltrcf::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return internal_exit;
  }
  return internal_exit;
}
