// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run with no arguments for all criteria, or pass
// criterion numbers. Exit status is nonzero when any executed check fails.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rankspec/bratteli.hpp"
#include "rankspec/selfsimilar.hpp"
#include "rankspec/verify.hpp"

namespace fs = std::filesystem;

using rankspec::Block;
using rankspec::BlockOperator;
using rankspec::Matrix;
using rankspec::StepFunction;
using rankspec::SymMatrix;

namespace {

struct Failure {
  std::string detail;
};

void expect(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

rankspec::DisorderModel site23() { return rankspec::site_potential_model({2, 3}, {0.5, 0.5}); }

BlockOperator random_operator(int max_blocks, int max_dim, std::uint64_t key, bool psd) {
  const int blocks = 1 + static_cast<int>(testutil::uniform(key, 7000) * max_blocks) % max_blocks;
  std::vector<double> weights(static_cast<std::size_t>(blocks));
  double total = 0.0;
  for (int b = 0; b < blocks; ++b) {
    weights[static_cast<std::size_t>(b)] = 0.1 + testutil::uniform(key, 7100 + b);
    total += weights[static_cast<std::size_t>(b)];
  }
  std::vector<Block> list;
  for (int b = 0; b < blocks; ++b) {
    const int n = 1 + static_cast<int>(testutil::uniform(key, 7200 + b) * max_dim) % max_dim;
    Matrix m = testutil::random_matrix(n, key ^ static_cast<std::uint64_t>(b + 1));
    if (psd) {
      Matrix g = m.transposed() * m;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) /= n;
      m = std::move(g);
    }
    list.push_back(Block{weights[static_cast<std::size_t>(b)] / total, std::move(m)});
  }
  return BlockOperator(std::move(list));
}

double counting_oracle(const BlockOperator& t, double lambda) {
  double acc = 0.0;
  for (const Block& b : t.blocks()) {
    std::int64_t count = 0;
    for (double e : rankspec::sym_spectrum(SymMatrix(b.matrix))) count += e <= lambda;
    acc += b.weight * static_cast<double>(count) / b.matrix.dim();
  }
  return acc;
}

// 1. sigma + sigma_tilde = 1 exactly; sigma of positive self-adjoint
//    operators matches the eigenvalue-counting oracle.
void criterion1() {
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t key = rankspec::derive_seed(101, static_cast<std::uint64_t>(trial));
    const BlockOperator t = random_operator(3, 16, key, false);
    const StepFunction s = rankspec::sigma(t);
    const StepFunction st = rankspec::sigma_tilde(t);
    expect(s.breakpoints() == st.breakpoints(), "complement must share breakpoints");
    expect(s.pre_value() + st.pre_value() == 1.0, "pre values must sum to 1 exactly");
    for (std::size_t m = 0; m < s.size(); ++m)
      expect(s.values()[m] + st.values()[m] == 1.0,
             "sigma + sigma_tilde != 1 at breakpoint " + std::to_string(m));

    const BlockOperator psd = random_operator(3, 16, key ^ 0xf00d, true);
    const StepFunction sp = rankspec::sigma(psd);
    std::vector<double> probes{-0.5, sp.breakpoints().back() + 1.0};
    for (std::size_t m = 0; m + 1 < sp.size(); ++m)
      probes.push_back(0.5 * (sp.breakpoints()[m] + sp.breakpoints()[m + 1]));
    for (double lambda : probes)
      expect(std::abs(sp(lambda) - counting_oracle(psd, lambda)) <= 1e-8,
             "sigma disagrees with the counting oracle");
  }
}

// 2. ||N_A - N_B||_inf <= r/64 + 1e-8 for rank-r perturbations.
void criterion2() {
  const int n = 64;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t key = rankspec::derive_seed(202, static_cast<std::uint64_t>(trial));
    const int r = 1 + trial % 8;
    const Matrix a = testutil::random_positive(n, key);
    const Matrix b = a + testutil::random_low_rank(n, r, key ^ 0xbeef, true);
    const double dist = rankspec::sup_distance(
        rankspec::spectral_distribution(SymMatrix(a)),
        rankspec::spectral_distribution(SymMatrix(b)));
    expect(dist <= static_cast<double>(r) / n + 1e-8,
           "perturbation bound violated at trial " + std::to_string(trial) +
               ": dist=" + std::to_string(dist) + " r=" + std::to_string(r));
  }
}

// 3. compatibility residual <= 1e-12 across models and dimensions.
void criterion3() {
  const struct {
    rankspec::DisorderModel model;
    int i;
    int d;
  } cases[] = {
      {site23(), 1, 1},
      {site23(), 2, 1},
      {site23(), 1, 2},
      {rankspec::bond_percolation_model(0.5), 1, 1},
      {rankspec::site_percolation_model(0.5), 1, 1},
  };
  for (const auto& c : cases) {
    const double residual = rankspec::check_compatibility(c.model, c.i, c.d);
    expect(residual <= 1e-12,
           "residual " + std::to_string(residual) + " at (d=" + std::to_string(c.d) +
               ", i=" + std::to_string(c.i) + ")");
  }
}

// 4. the rank Cauchy chain for the d=1 site model.
void criterion4() {
  const auto model = site23();
  const struct {
    int i, j;
    double bound;
  } steps[] = {{1, 2, 0.5}, {2, 3, 0.25}};
  for (const auto& s : steps) {
    const rankspec::CauchyReport report = rankspec::cauchy_report(model, s.i, s.j, 1);
    expect(report.bound == s.bound, "unexpected boundary fraction");
    expect(report.rank_distance <= s.bound + 1e-9,
           "rank distance " + std::to_string(report.rank_distance) + " exceeds " +
               std::to_string(s.bound));
    const double dist = rankspec::sup_distance(rankspec::ids_approx(model, s.i, 1),
                                               rankspec::ids_approx(model, s.j, 1));
    expect(dist <= report.rank_distance + 1e-9,
           "ids distance " + std::to_string(dist) + " exceeds the rank distance");
  }
}

// 5. Percolation closed forms at level one.
void criterion5() {
  for (double p : {0.1, 0.5, 0.9}) {
    const StepFunction bond = rankspec::ids_approx(rankspec::bond_percolation_model(p), 1, 1);
    for (double lambda : {0.0, 1.0, 1.999})
      expect(std::abs(bond(lambda) - (1.0 - p / 2.0)) <= 1e-10, "bond plateau off");
    expect(std::abs(bond(2.0) - 1.0) <= 1e-12, "bond total off");
    const StepFunction site = rankspec::ids_approx(rankspec::site_percolation_model(p), 1, 1);
    for (double lambda : {0.0, 1.0, 1.999})
      expect(std::abs(site(lambda) - (1.0 - p * p / 2.0)) <= 1e-10, "site plateau off");
    expect(std::abs(site(2.0) - 1.0) <= 1e-12, "site total off");
  }
}

// 6. finite volume: tile frequencies obey the law of large
//    numbers and the distances respect the measured rank defect.
void criterion6() {
  const auto report = rankspec::empirical_run(site23(), 1, 4096, 2, 424242, 2);
  expect(report.tile_count == 1024, "expected 1024 tiles");
  expect(report.level_distribution.has_value(), "level 2 must be enumerable");
  for (std::size_t a = 0; a < report.tile_stats.size(); ++a) {
    const double p = report.tile_stats[a].probability;
    const double bound = 3.0 * std::sqrt(p * (1.0 - p) / 1024.0);
    expect(std::abs(report.tile_stats[a].frequency - p) <= bound,
           "tile frequency " + std::to_string(a) + " outside the 3-sigma band");
  }
  expect(report.dist_box_vs_tiled <= report.rank_defect,
         "box vs tiled distance exceeds the rank defect");
  expect(report.dist_box_vs_level <= report.rank_defect + 0.05,
         "box vs level distance exceeds rank defect + sampling term");
}

// 7. the path tower: closed-form limit and per-step bounds.
void criterion7() {
  rankspec::SelfSimilarSpec spec;
  spec.seed = rankspec::graph_from_edges(2, {{0, 1}});
  spec.connecting = {0, 1};
  spec.copies = 2;
  spec.degree_bound = 2;
  spec.glue = {{rankspec::GlueEdge{0, 1, 1, 0}}};
  spec.select = {{rankspec::SelectEntry{0, 0}, rankspec::SelectEntry{1, 1}}};

  const auto tower = rankspec::tower_ids(spec, rankspec::laplacian_kernel(), 10, 2);
  expect(tower.level_ids.size() == 10, "tower must reach level 10");
  const StepFunction& ids = tower.level_ids.back();
  double worst = 0.0;
  for (std::size_t m = 0; m < ids.size(); ++m) {
    const double limit = std::acos(1.0 - ids.breakpoints()[m] / 2.0) / std::numbers::pi;
    worst = std::max(worst, std::abs(ids.values()[m] - limit));
    const double left = m == 0 ? ids.pre_value() : ids.values()[m - 1];
    worst = std::max(worst, std::abs(left - limit));
  }
  expect(worst <= 2.0 / 1024.0, "level-10 distance to the arccos limit is " + std::to_string(worst));
  for (std::size_t n = 0; n < tower.distances.size(); ++n)
    expect(tower.distances[n] <= tower.defect_bounds[n] + 1e-8,
           "tower step " + std::to_string(n + 1) + " exceeds its rank-defect bound");
}

// 8. Monte-Carlo consistency against exact enumeration.
void criterion8() {
  const StepFunction exact = rankspec::ids_approx(site23(), 2, 1);
  const StepFunction mc = rankspec::ids_monte_carlo(site23(), 2, 1, 10000, 31337, 2);
  const double dist = rankspec::sup_distance(mc, exact);
  expect(dist <= 0.05, "Monte-Carlo distance " + std::to_string(dist) + " exceeds 0.05");
}

// 9. Rank axioms on random compatible pairs.
void criterion9() {
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t key = rankspec::derive_seed(909, static_cast<std::uint64_t>(trial));
    const BlockOperator a = random_operator(3, 12, key, false);
    std::vector<Block> list;
    for (const Block& blk : a.blocks())
      list.push_back(Block{blk.weight, testutil::random_low_rank(
                                           blk.matrix.dim(),
                                           1 + trial % std::max(1, blk.matrix.dim()),
                                           key ^ 0x5150, false)});
    const BlockOperator b(std::move(list));
    const double ra = rankspec::rank(a), rb = rankspec::rank(b);
    expect(rankspec::rank(a + b) <= ra + rb + 2 * rankspec::kRankTol, "rank subadditivity");
    expect(rankspec::rank(a * b) <= std::min(ra, rb) + 2 * rankspec::kRankTol,
           "rank submultiplicativity");
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  expect(static_cast<bool>(in), "missing output file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void compare_dirs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename());
  expect(!names.empty(), "no outputs produced under " + a.string());
  for (const auto& name : names)
    expect(slurp(a / name) == slurp(b / name), "outputs differ for " + name);
}

// 10. Determinism: stochastic commands rerun with the same seed and different
//     thread counts produce byte-identical artifacts.
void criterion10() {
  const char* cli = RANKSPEC_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "rankspec_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string model = std::string(RANKSPEC_DATA_DIR) + "/site_j23.json";

  const auto run = [&](const std::string& args, const fs::path& out) {
    const std::string command =
        std::string(cli) + " " + args + " --out " + out.string() + " >/dev/null 2>&1";
    expect(std::system(command.c_str()) == 0, "command failed: " + command);
  };

  run("ids-mc --model " + model + " --level 2 --samples 2000 --seed 7 --threads 1", root / "mc1");
  run("ids-mc --model " + model + " --level 2 --samples 2000 --seed 7 --threads 2", root / "mc2");
  compare_dirs(root / "mc1", root / "mc2");

  run("ids-empirical --model " + model + " --side 512 --level 2 --seed 7 --threads 1",
      root / "emp1");
  run("ids-empirical --model " + model + " --side 512 --level 2 --seed 7 --threads 2",
      root / "emp2");
  compare_dirs(root / "emp1", root / "emp2");
  fs::remove_all(root);
}

struct Criterion {
  int number;
  const char* label;
  std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "complement identity and the eigenvalue-counting oracle", criterion1},
      {2, "rank-r perturbation bound at n = 64", criterion2},
      {3, "configuration-probability compatibility", criterion3},
      {4, "rank Cauchy chain for the d=1 site model", criterion4},
      {5, "percolation closed forms at level 1", criterion5},
      {6, "empirical convergence on the 4096 box", criterion6},
      {7, "path-tower oracle at level 10", criterion7},
      {8, "Monte-Carlo consistency at level 2", criterion8},
      {9, "rank axioms on random pairs", criterion9},
      {10, "determinism across thread counts", criterion10},
  };

  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.number) == selected.end())
      continue;
    try {
      c.run();
      std::printf("PASS criterion %d: %s\n", c.number, c.label);
    } catch (const Failure& f) {
      std::printf("FAIL criterion %d: %s  [%s]\n", c.number, c.label, f.detail.c_str());
      ++failures;
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: %s  [exception: %s]\n", c.number, c.label, e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
