#pragma once

// Versioned forest model files. The document is JSON with the schema, the
// training rows, per-tree in-bag sets and node arrays; the binary form is the
// same document encoded as CBOR.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltrcf/forest.hpp"

namespace ltrcf {

inline constexpr int model_format_version = 1;

using json = nlohmann::json;

inline json schema_to_json(const schema& s) {
  json out = json::array();
  for (const auto& c : s.covariates()) {
    json j{{"name", c.name}, {"type", c.type == covariate_type::categorical ? "categorical" : "numeric"}};
    if (c.type == covariate_type::categorical) j["levels"] = c.levels;
    out.push_back(std::move(j));
  }
  return out;
}

inline schema schema_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("covariates") ? j.at("covariates") : j;
  if (!list.is_array()) throw schema_mismatch("schema must be an array of covariates");
  std::vector<covariate_spec> specs;
  for (const auto& c : list) {
    covariate_spec s;
    s.name = c.at("name").get<std::string>();
    const auto type = c.value("type", std::string("numeric"));
    if (type == "categorical") {
      s.type = covariate_type::categorical;
      for (const auto& l : c.at("levels")) s.levels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    } else if (type != "numeric") {
      throw schema_mismatch("covariate '" + s.name + "' has unknown type '" + type + "'");
    }
    specs.push_back(std::move(s));
  }
  return schema(std::move(specs));
}

inline json params_to_json(const forest_params& p) {
  return {{"kind", p.kind == forest_kind::cif ? "cif" : "rrf"},
          {"trees", p.trees},
          {"mtry", p.mtry},
          {"minsplit", p.minsplit},
          {"minbucket", p.minbucket},
          {"nodesize", p.nodesize},
          {"bootstrap_unit", p.unit == bootstrap_unit::subject ? "subject" : "pseudo_subject"},
          {"resample", p.resample},
          {"seed", p.seed},
          {"alpha", p.alpha},
          {"permutations", p.permutations},
          {"scores", p.scores == score_type::product_limit ? "product_limit" : "nelson_aalen"}};
}

inline forest_params params_from_json(const json& j) {
  forest_params p;
  p.kind = j.at("kind").get<std::string>() == "rrf" ? forest_kind::rrf : forest_kind::cif;
  p.trees = j.at("trees").get<int>();
  p.mtry = j.at("mtry").get<int>();
  p.minsplit = j.at("minsplit").get<int>();
  p.minbucket = j.at("minbucket").get<int>();
  p.nodesize = j.at("nodesize").get<int>();
  p.unit = j.at("bootstrap_unit").get<std::string>() == "subject" ? bootstrap_unit::subject
                                                                 : bootstrap_unit::pseudo_subject;
  p.resample = j.at("resample").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.alpha = j.at("alpha").get<double>();
  p.permutations = j.at("permutations").get<int>();
  p.scores = j.at("scores").get<std::string>() == "nelson_aalen" ? score_type::nelson_aalen
                                                                 : score_type::product_limit;
  return p;
}

/// FNV-1a hash of the canonical JSON text of a parameter set.
inline std::string config_hash(const json& config) {
  const auto h = detail::fnv1a(config.dump());
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[static_cast<std::size_t>(15 - i)] = digits[(h >> (4 * i)) & 0xF];
  return out;
}

namespace detail {

template <class Real, class Tag>
json curve_to_json(const step_function<Real, Tag>& c) {
  return {{"initial", c.initial()}, {"times", c.times()}, {"values", c.values()}};
}

template <class Curve>
Curve curve_from_json(const json& j) {
  return Curve(j.at("initial").get<double>(), j.at("times").get<std::vector<double>>(),
               j.at("values").get<std::vector<double>>());
}

template <class Leaf, class LeafOut>
json tree_to_json(const tree<Leaf>& t, LeafOut&& leaf_out) {
  json left = json::array(), right = json::array(), variable = json::array(), threshold = json::array(),
       levels = json::array(), leaves = json::array();
  for (const auto& n : t.nodes()) {
    left.push_back(n.left);
    right.push_back(n.right);
    variable.push_back(n.rule.variable);
    threshold.push_back(n.rule.threshold);
    levels.push_back(n.rule.left_levels);
    leaves.push_back(n.terminal() ? leaf_out(n.leaf) : json());
  }
  return {{"left", left},   {"right", right},   {"variable", variable},
          {"threshold", threshold}, {"levels", levels}, {"leaf", leaves}};
}

template <class Leaf, class LeafIn>
tree<Leaf> tree_from_json(const json& j, LeafIn&& leaf_in) {
  tree<Leaf> t;
  const auto& left = j.at("left");
  for (std::size_t i = 0; i < left.size(); ++i) {
    tree_node<Leaf> n;
    n.left = left[i].get<int>();
    n.right = j.at("right")[i].get<int>();
    n.rule.variable = j.at("variable")[i].get<int>();
    n.rule.threshold = j.at("threshold")[i].get<double>();
    n.rule.left_levels = j.at("levels")[i].get<std::vector<std::uint8_t>>();
    if (n.terminal()) n.leaf = leaf_in(j.at("leaf")[i]);
    t.nodes().push_back(std::move(n));
  }
  return t;
}

}  // namespace detail

inline json forest_to_json(const forest& f) {
  const auto params = params_to_json(f.params);
  json training;
  json left = json::array(), right = json::array(), event = json::array();
  for (const auto& r : f.table.times) {
    left.push_back(r.left);
    right.push_back(r.right);
    event.push_back(r.event ? 1 : 0);
  }
  training["left"] = std::move(left);
  training["right"] = std::move(right);
  training["event"] = std::move(event);
  training["columns"] = f.table.columns;
  training["subject"] = f.table.subject;
  training["subject_ids"] = f.table.subject_ids;

  json trees = json::array();
  if (f.params.kind == forest_kind::cif) {
    for (const auto& t : f.cif_trees) {
      trees.push_back(detail::tree_to_json(t, [](const cif_leaf& l) { return json(l.rows); }));
    }
  } else {
    for (const auto& t : f.rrf_trees) {
      trees.push_back(detail::tree_to_json(
          t, [](const rrf_leaf& l) { return json::array({l.relative_risk, l.events, l.exposure}); }));
    }
  }
  json baselines = json::array();
  for (const auto& b : f.baselines) baselines.push_back(detail::curve_to_json(b));

  json doc;
  doc["format"] = "ltrcf-forest";
  doc["version"] = model_format_version;
  doc["config_hash"] = config_hash(params);
  doc["seed"] = f.params.seed;
  doc["params"] = params;
  doc["schema"] = schema_to_json(f.table.schema);
  doc["training"] = std::move(training);
  doc["inbag"] = f.inbag;
  doc["trees"] = std::move(trees);
  doc["baselines"] = std::move(baselines);
  doc["pooled_baseline"] = detail::curve_to_json(f.pooled_baseline);
  doc["degenerate_trees"] = f.degenerate_trees;
  return doc;
}

inline forest forest_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "ltrcf-forest") throw invalid_argument("not a forest model file");
    if (doc.at("version").get<int>() != model_format_version) {
      throw invalid_argument("unsupported model version " + doc.at("version").dump());
    }
    forest f;
    f.params = params_from_json(doc.at("params"));
    f.table.schema = schema_from_json(doc.at("schema"));
    const auto& tr = doc.at("training");
    const auto left = tr.at("left").get<std::vector<double>>();
    const auto right = tr.at("right").get<std::vector<double>>();
    const auto event = tr.at("event").get<std::vector<int>>();
    for (std::size_t i = 0; i < left.size(); ++i) f.table.times.push_back({left[i], right[i], event[i] != 0});
    f.table.columns = tr.at("columns").get<std::vector<std::vector<double>>>();
    f.table.subject = tr.at("subject").get<std::vector<std::uint32_t>>();
    f.table.subject_ids = tr.at("subject_ids").get<std::vector<std::string>>();
    f.table.subject_begin.assign(1, 0);
    for (std::size_t i = 0; i < f.table.subject.size(); ++i) {
      if (i + 1 == f.table.subject.size() || f.table.subject[i + 1] != f.table.subject[i]) {
        f.table.subject_begin.push_back(static_cast<std::uint32_t>(i + 1));
      }
    }
    f.inbag = doc.at("inbag").get<std::vector<std::vector<row_id>>>();
    for (const auto& t : doc.at("trees")) {
      if (f.params.kind == forest_kind::cif) {
        f.cif_trees.push_back(detail::tree_from_json<cif_leaf>(
            t, [](const json& l) { return cif_leaf{l.get<std::vector<row_id>>()}; }));
      } else {
        f.rrf_trees.push_back(detail::tree_from_json<rrf_leaf>(t, [](const json& l) {
          return rrf_leaf{l[0].get<double>(), l[1].get<double>(), l[2].get<double>()};
        }));
      }
    }
    for (const auto& b : doc.at("baselines")) {
      f.baselines.push_back(detail::curve_from_json<cumulative_hazard_curve<>>(b));
    }
    f.pooled_baseline = detail::curve_from_json<cumulative_hazard_curve<>>(doc.at("pooled_baseline"));
    f.degenerate_trees = doc.at("degenerate_trees").get<std::size_t>();
    f.finalize();
    return f;
  } catch (const json::exception& e) {
    throw invalid_argument(std::string("malformed model file: ") + e.what());
  }
}

inline bool is_text_model_path(const std::filesystem::path& path) { return path.extension() == ".json"; }

/// Writes a model; a `.json` extension selects text, anything else CBOR.
inline void save_forest(const forest& f, const std::filesystem::path& path) {
  const auto doc = forest_to_json(f);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  if (is_text_model_path(path)) {
    out << doc.dump() << '\n';
  } else {
    const auto bytes = json::to_cbor(doc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw io_error("failed writing " + path.string());
}

inline forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    if (!bytes.empty() && (bytes.front() == '{' || bytes.front() == ' ' || bytes.front() == '\n')) {
      return forest_from_json(json::parse(bytes.begin(), bytes.end()));
    }
    return forest_from_json(json::from_cbor(bytes));
  } catch (const json::exception& e) {
    throw invalid_argument(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace ltrcf
