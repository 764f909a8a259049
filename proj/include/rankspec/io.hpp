#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankspec/models.hpp"
#include "rankspec/selfsimilar.hpp"
#include "rankspec/stepfn.hpp"

namespace rankspec {

using json = nlohmann::ordered_json;

inline json model_to_json(const DisorderModel& model) {
  json j;
  j["kind"] = to_string(model.kind);
  if (model.kind == ModelKind::SitePotential) {
    j["values"] = model.values;
    j["probabilities"] = model.probabilities;
  } else {
    j["p"] = model.retention;
  }
  return j;
}

inline DisorderModel model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "site-potential")
    return site_potential_model(j.at("values").get<std::vector<double>>(),
                                j.at("probabilities").get<std::vector<double>>());
  if (kind == "bond-percolation") return bond_percolation_model(j.at("p").get<double>());
  if (kind == "site-percolation") return site_percolation_model(j.at("p").get<double>());
  throw std::invalid_argument("unknown model kind: " + kind);
}

inline DisorderModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  json j;
  in >> j;
  return model_from_json(j);
}

/// A model file may carry its intended lattice dimension under "d".
struct ModelFile {
  DisorderModel model;
  std::optional<int> dim;
};

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  json j;
  in >> j;
  ModelFile file{model_from_json(j), std::nullopt};
  if (j.contains("d")) file.dim = j.at("d").get<int>();
  return file;
}

/// Self-similar construction plus the kernel and census radius to run on it.
struct SelfSimilarJob {
  SelfSimilarSpec spec;
  PatternKernel kernel;
  int census_radius = 1;
};

inline PatternKernel kernel_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "laplacian") return laplacian_kernel();
  if (type == "adjacency") return adjacency_kernel();
  if (type == "constant") return constant_kernel(j.at("value").get<double>());
  throw std::invalid_argument("unknown kernel type: " + type);
}

namespace detail {

inline std::vector<GlueEdge> glue_rule_from_json(const json& j) {
  std::vector<GlueEdge> rule;
  for (const auto& e : j) {
    const auto a = e.at("a").get<std::vector<int>>();
    const auto b = e.at("b").get<std::vector<int>>();
    if (a.size() != 2 || b.size() != 2)
      throw std::invalid_argument("glue edge endpoints must be [copy, s] pairs");
    rule.push_back(GlueEdge{a[0], a[1], b[0], b[1]});
  }
  return rule;
}

inline std::vector<SelectEntry> select_rule_from_json(const json& j) {
  std::vector<SelectEntry> rule;
  for (const auto& e : j) {
    const auto pair = e.get<std::vector<int>>();
    if (pair.size() != 2) throw std::invalid_argument("select entries must be [copy, s] pairs");
    rule.push_back(SelectEntry{pair[0], pair[1]});
  }
  return rule;
}

}  // namespace detail

inline SelfSimilarJob selfsimilar_from_json(const json& j) {
  SelfSimilarJob job;
  const auto& g1 = j.at("g1");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g1.at("edges")) {
    const auto pair = e.get<std::vector<int>>();
    if (pair.size() != 2) throw std::invalid_argument("g1 edges must be [u, v] pairs");
    edges.emplace_back(pair[0], pair[1]);
  }
  job.spec.seed = graph_from_edges(g1.at("vertices").get<int>(), edges);
  job.spec.connecting = j.at("s1").get<std::vector<int>>();
  job.spec.copies = j.at("k").get<int>();
  job.spec.degree_bound = j.at("degree_bound").get<int>();
  if (j.contains("glue_per_level"))
    for (const auto& rule : j.at("glue_per_level"))
      job.spec.glue.push_back(detail::glue_rule_from_json(rule));
  else
    job.spec.glue.push_back(detail::glue_rule_from_json(j.at("glue")));
  if (j.contains("select_per_level"))
    for (const auto& rule : j.at("select_per_level"))
      job.spec.select.push_back(detail::select_rule_from_json(rule));
  else
    job.spec.select.push_back(detail::select_rule_from_json(j.at("select")));
  job.kernel = kernel_from_json(j.at("kernel"));
  job.census_radius = j.value("census_radius", std::max(1, job.kernel.propagation));
  return job;
}

inline SelfSimilarJob load_selfsimilar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file: " + path);
  json j;
  in >> j;
  return selfsimilar_from_json(j);
}

inline json region_to_json(const Region& region) {
  return json{{"d", region.d}, {"origin", region.origin}, {"sides", region.sides}};
}

inline json configuration_to_json(const Configuration& config) {
  return json{{"region", region_to_json(config.region)},
              {"carrier", config.carrier == Carrier::Sites ? "sites" : "edges"},
              {"values", config.values}};
}

inline void write_csv_file(const std::string& path, const StepFunction& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, f);
}

}  // namespace rankspec
