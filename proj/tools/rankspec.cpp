// Command-line surface: computes IDS approximants with certified bounds,
// runs finite-volume experiments, and verifies the library's invariants.
//
// Exit codes: 0 success, 1 usage or cap error, 2 invariant violation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankspec/bratteli.hpp"
#include "rankspec/io.hpp"
#include "rankspec/selfsimilar.hpp"
#include "rankspec/verify.hpp"

namespace fs = std::filesystem;
using rankspec::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

struct Options {
  std::string model_path;
  std::string spec_path;
  int dim = 1;
  int level = 2;
  int levels = 3;
  std::int64_t side = 1024;
  std::int64_t samples = 10000;
  std::uint64_t seed = 20240808;  // stochastic commands must set this explicitly
  std::string out = "out";
  unsigned threads = rankspec::default_threads();
  double tol = rankspec::kRankTol;
  double mc_tol = 0.05;
  std::optional<rankspec::DisorderModel> loaded_model;
};

rankspec::DisorderModel model_or_default(const Options& opt) {
  if (opt.loaded_model) return *opt.loaded_model;
  return rankspec::site_potential_model({2.0, 3.0}, {0.5, 0.5});
}

void write_report(const Options& opt, const json& report) {
  fs::create_directories(opt.out);
  std::ofstream out(fs::path(opt.out) / "report.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report.json under " + opt.out);
  out << report.dump(2) << "\n";
}

void write_function(const Options& opt, const std::string& name, const rankspec::StepFunction& f) {
  fs::create_directories(opt.out);
  rankspec::write_csv_file((fs::path(opt.out) / name).string(), f);
}

json check_entry(const std::string& name, double distance, double bound) {
  return json{{"name", name}, {"distance", distance}, {"bound", bound},
              {"pass", distance <= bound}};
}

bool all_pass(const json& checks) {
  for (const auto& c : checks)
    if (!c.at("pass").get<bool>()) return false;
  return true;
}

int run_ids_approx(const Options& opt, bool level_given) {
  const rankspec::DisorderModel model = model_or_default(opt);
  const int first = level_given ? opt.level : 1;
  const int last = opt.levels;
  if (first > last)
    throw std::invalid_argument("ids-approx: --level must not exceed --levels");
  json report;
  report["schema"] = 1;
  report["command"] = "ids-approx";
  report["model"] = rankspec::model_to_json(model);
  report["dim"] = opt.dim;
  report["first_level"] = first;
  report["levels"] = last;

  std::vector<rankspec::StepFunction> ids;
  json files = json::array();
  for (int i = first; i <= last; ++i) {
    ids.push_back(rankspec::ids_approx(model, i, opt.dim, rankspec::kConfigCap, opt.threads));
    const std::string name = "ids_level_" + std::to_string(i) + ".csv";
    write_function(opt, name, ids.back());
    files.push_back(name);
  }
  report["files"] = files;

  json steps = json::array();
  json checks = json::array();
  std::vector<double> bounds;
  auto record_step = [&](int i, int j) {
    const rankspec::CauchyReport cauchy =
        rankspec::cauchy_report(model, i, j, opt.dim, opt.tol, rankspec::kConfigCap, opt.threads);
    const double dist = rankspec::sup_distance(ids[static_cast<std::size_t>(i - first)],
                                               ids[static_cast<std::size_t>(j - first)]);
    steps.push_back(json{{"i", i},
                         {"j", j},
                         {"rank_distance", cauchy.rank_distance},
                         {"bound", cauchy.bound},
                         {"ids_distance", dist}});
    checks.push_back(check_entry("rank_distance_within_boundary_fraction_" + std::to_string(i),
                                 cauchy.rank_distance, cauchy.bound + 1e-9));
    checks.push_back(check_entry("ids_distance_within_rank_distance_" + std::to_string(i), dist,
                                 cauchy.rank_distance + 1e-9));
    if (i < j) bounds.push_back(cauchy.bound);
  };
  if (first == last)
    record_step(first, first);  // degenerate chain: distance 0 against itself
  else
    for (int i = first; i < last; ++i) record_step(i, i + 1);
  report["steps"] = steps;

  // certified tail: what remains after truncating the chain at the deepest
  // computed level; the limit error of level i is at most the tail sum
  json tails = json::array();
  for (int i = first; i < last; ++i) {
    double sum = 0.0;
    for (int m = i; m < last; ++m) sum += bounds[static_cast<std::size_t>(m - first)];
    tails.push_back(
        json{{"level", i}, {"certified_tail_bound", sum}, {"truncated_at_level", last}});
  }
  report["certified_tails"] = tails;
  report["checks"] = checks;
  write_report(opt, report);
  return all_pass(checks) ? kExitOk : kExitViolation;
}

int run_ids_mc(const Options& opt) {
  const rankspec::DisorderModel model = model_or_default(opt);
  json report;
  report["schema"] = 1;
  report["command"] = "ids-mc";
  report["model"] = rankspec::model_to_json(model);
  report["dim"] = opt.dim;
  report["level"] = opt.level;
  report["samples"] = opt.samples;
  report["seed"] = opt.seed;

  const rankspec::StepFunction mc =
      rankspec::ids_monte_carlo(model, opt.level, opt.dim, opt.samples, opt.seed, opt.threads);
  write_function(opt, "ids_mc.csv", mc);
  report["files"] = json::array({"ids_mc.csv"});

  json checks = json::array();
  bool exact_available = true;
  try {
    const rankspec::StepFunction exact =
        rankspec::ids_approx(model, opt.level, opt.dim, rankspec::kConfigCap, opt.threads);
    write_function(opt, "ids_exact.csv", exact);
    report["files"].push_back("ids_exact.csv");
    const double dist = rankspec::sup_distance(mc, exact);
    report["distance_mc_vs_exact"] = dist;
    report["sampling_tolerance"] = opt.mc_tol;
    checks.push_back(check_entry("mc_within_sampling_tolerance", dist, opt.mc_tol));
  } catch (const rankspec::CapExceeded&) {
    exact_available = false;
  }
  report["exact_available"] = exact_available;
  report["checks"] = checks;
  write_report(opt, report);
  return all_pass(checks) ? kExitOk : kExitViolation;
}

int run_ids_empirical(const Options& opt) {
  const rankspec::DisorderModel model = model_or_default(opt);
  const rankspec::EmpiricalReport result =
      rankspec::empirical_run(model, opt.dim, opt.side, opt.level, opt.seed, opt.threads);

  json report;
  report["schema"] = 1;
  report["command"] = "ids-empirical";
  report["model"] = rankspec::model_to_json(model);
  report["dim"] = opt.dim;
  report["side"] = opt.side;
  report["level"] = opt.level;
  report["seed"] = opt.seed;
  report["omega"] = rankspec::configuration_to_json(result.omega);
  report["tile_count"] = result.tile_count;
  report["rank_defect"] = result.rank_defect;
  report["tile_boundary_fraction"] = result.tile_boundary_fraction;
  report["dist_box_vs_tiled"] = result.dist_box_vs_tiled;

  write_function(opt, "n_box.csv", result.box_distribution);
  write_function(opt, "n_tiles.csv", result.tiled_distribution);
  report["files"] = json::array({"n_box.csv", "n_tiles.csv"});

  json checks = json::array();
  checks.push_back(check_entry("rank_defect_within_tile_boundary", result.rank_defect,
                               result.tile_boundary_fraction + 1e-12));
  checks.push_back(check_entry("box_vs_tiled_within_rank_defect", result.dist_box_vs_tiled,
                               result.rank_defect + 1e-8));
  if (result.level_distribution.has_value()) {
    write_function(opt, "ids_level.csv", *result.level_distribution);
    report["files"].push_back("ids_level.csv");
    report["dist_box_vs_level"] = result.dist_box_vs_level;
    json freq = json::array();
    double freq_sum = 0.0;
    for (std::size_t a = 0; a < result.tile_stats.size(); ++a) {
      const auto& stat = result.tile_stats[a];
      freq.push_back(json{{"config", a},
                          {"count", stat.count},
                          {"frequency", stat.frequency},
                          {"probability", stat.probability}});
      freq_sum += stat.frequency;
    }
    report["tile_frequencies"] = freq;
    checks.push_back(check_entry("tile_frequencies_sum_to_one", std::abs(freq_sum - 1.0), 1e-12));
  } else {
    json counts = json::object();
    for (const auto& [key, count] : result.tile_counts_by_key) counts[key] = count;
    report["tile_counts"] = counts;
  }
  report["checks"] = checks;
  write_report(opt, report);
  return all_pass(checks) ? kExitOk : kExitViolation;
}

int run_percolation(const Options& opt) {
  json report;
  report["schema"] = 1;
  report["command"] = "percolation";
  report["dim"] = opt.dim;
  report["level"] = opt.level;

  json entries = json::array();
  json checks = json::array();
  json files = json::array();
  for (const std::string kind : {"bond", "site"}) {
    for (int grid = 1; grid <= 9; ++grid) {
      const double p = grid / 10.0;
      const rankspec::DisorderModel model = kind == "bond"
                                                ? rankspec::bond_percolation_model(p)
                                                : rankspec::site_percolation_model(p);
      const rankspec::StepFunction ids =
          rankspec::ids_approx(model, opt.level, opt.dim, rankspec::kConfigCap, opt.threads);
      const std::string name =
          kind + "_p0." + std::to_string(grid) + ".csv";
      write_function(opt, name, ids);
      files.push_back(name);
      json entry{{"kind", kind}, {"p", p}, {"plateau", ids(0.0)}};
      if (opt.dim == 1 && opt.level == 1) {
        const double closed_form = kind == "bond" ? 1.0 - p / 2.0 : 1.0 - p * p / 2.0;
        entry["closed_form"] = closed_form;
        checks.push_back(check_entry("plateau_closed_form_" + kind + "_p0." +
                                         std::to_string(grid),
                                     std::abs(ids(0.0) - closed_form), 1e-10));
      }
      entries.push_back(entry);
    }
  }
  report["plateaus"] = entries;
  report["files"] = files;
  report["checks"] = checks;
  write_report(opt, report);
  return all_pass(checks) ? kExitOk : kExitViolation;
}

int run_selfsimilar(const Options& opt) {
  if (opt.spec_path.empty()) throw std::invalid_argument("selfsimilar requires --spec");
  const rankspec::SelfSimilarJob job = rankspec::load_selfsimilar(opt.spec_path);
  const rankspec::TowerResult tower =
      rankspec::tower_ids(job.spec, job.kernel, opt.levels, opt.threads);
  const rankspec::SelfSimilarReport shape = rankspec::check_self_similar(job.spec, opt.levels);
  const auto census = rankspec::pattern_census(
      rankspec::build_level(job.spec, opt.levels).graph, job.census_radius);

  json report;
  report["schema"] = 1;
  report["command"] = "selfsimilar";
  report["spec"] = opt.spec_path;
  report["levels"] = opt.levels;
  report["ratios"] = shape.ratios;
  report["folner_defects"] = shape.folner_defects;
  report["ratio_vanishing"] = shape.ratio_vanishing;
  report["distances"] = tower.distances;
  report["defect_bounds"] = tower.defect_bounds;

  json files = json::array();
  for (std::size_t n = 0; n < tower.level_ids.size(); ++n) {
    const std::string name = "tower_level_" + std::to_string(n + 1) + ".csv";
    write_function(opt, name, tower.level_ids[n]);
    files.push_back(name);
  }
  report["files"] = files;

  json census_json = json::object();
  for (const auto& [key, freq] : census) census_json[key] = freq;
  report["census"] = json{{"radius", job.census_radius}, {"frequencies", census_json}};

  json checks = json::array();
  for (std::size_t n = 0; n < tower.distances.size(); ++n)
    checks.push_back(check_entry("tower_distance_within_defect_" + std::to_string(n + 1),
                                 tower.distances[n], tower.defect_bounds[n] + 1e-8));
  report["checks"] = checks;
  write_report(opt, report);
  return all_pass(checks) ? kExitOk : kExitViolation;
}

int run_verify(const Options& opt) {
  const rankspec::DisorderModel model = model_or_default(opt);
  const auto results = rankspec::run_verification(model, opt.dim, opt.seed);

  json report;
  report["schema"] = 1;
  report["command"] = "verify";
  report["model"] = rankspec::model_to_json(model);
  report["dim"] = opt.dim;
  report["seed"] = opt.seed;
  json checks = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  observed=" << r.observed
              << "  bound=" << r.bound << "\n";
    checks.push_back(
        json{{"name", r.name}, {"observed", r.observed}, {"bound", r.bound}, {"pass", r.pass}});
    ok = ok && r.pass;
  }
  report["checks"] = checks;
  write_report(opt, report);
  return ok ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrated density of states via rank-ring approximation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--dim", opt.dim, "lattice dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* seed = cmd->add_option("--seed", opt.seed, "random seed");
    if (needs_seed) seed->required();
  };

  CLI::App* approx = app.add_subcommand("ids-approx", "levelwise IDS approximants with bounds");
  add_common(approx, false);
  approx->add_option("--model", opt.model_path, "model spec file");
  approx->add_option("--level", opt.level, "first level (default 1)")->check(CLI::PositiveNumber);
  approx->add_option("--levels", opt.levels, "deepest level")->check(CLI::PositiveNumber);
  approx->add_option("--tol", opt.tol, "rank tolerance");

  CLI::App* mc = app.add_subcommand("ids-mc", "Monte-Carlo IDS vs exact enumeration");
  add_common(mc, true);
  mc->add_option("--model", opt.model_path, "model spec file");
  mc->add_option("--level", opt.level, "cube level")->check(CLI::PositiveNumber);
  mc->add_option("--samples", opt.samples, "sample count")->check(CLI::PositiveNumber);
  mc->add_option("--tol", opt.mc_tol, "sampling tolerance");

  CLI::App* empirical = app.add_subcommand("ids-empirical", "finite-volume comparison run");
  add_common(empirical, true);
  empirical->add_option("--model", opt.model_path, "model spec file");
  empirical->add_option("--side", opt.side, "box side")->check(CLI::PositiveNumber);
  empirical->add_option("--level", opt.level, "tile level j")->check(CLI::PositiveNumber);

  CLI::App* percolation = app.add_subcommand("percolation", "bond/site plateaus across p");
  add_common(percolation, false);
  percolation->add_option("--level", opt.level, "cube level")->check(CLI::PositiveNumber);

  CLI::App* selfsim = app.add_subcommand("selfsimilar", "pattern-operator tower and census");
  add_common(selfsim, false);
  selfsim->add_option("--spec", opt.spec_path, "self-similar spec file")->required();
  selfsim->add_option("--levels", opt.levels, "tower height")->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify, false);
  verify->add_option("--model", opt.model_path, "model spec file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!opt.model_path.empty()) {
      const rankspec::ModelFile file = rankspec::load_model_file(opt.model_path);
      opt.loaded_model = file.model;
      // the model file's dimension applies unless --dim was given explicitly
      if (file.dim && app.get_subcommands().front()->count("--dim") == 0) opt.dim = *file.dim;
    }
    if (approx->parsed()) return run_ids_approx(opt, approx->count("--level") > 0);
    if (mc->parsed()) return run_ids_mc(opt);
    if (empirical->parsed()) return run_ids_empirical(opt);
    if (percolation->parsed()) return run_percolation(opt);
    if (selfsim->parsed()) return run_selfsimilar(opt);
    if (verify->parsed()) return run_verify(opt);
  } catch (const rankspec::CapExceeded& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: lower --level/--levels/--side, or use ids-mc for deep levels\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
