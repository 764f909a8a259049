#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankspec/lattice.hpp"
#include "rankspec/linalg.hpp"
#include "rankspec/models.hpp"
#include "rankspec/parallel.hpp"
#include "rankspec/rankring.hpp"
#include "rankspec/rng.hpp"
#include "rankspec/stepfn.hpp"

namespace rankspec {

// Dense eigensolves beyond this vertex count are refused.
inline constexpr std::int64_t kDenseCap = 4096;

/// The level-i configuration algebra: one block per configuration on C_i,
/// weighted by its probability, with the configuration's truncated operator
/// as the block matrix.
struct LevelAlgebra {
  DisorderModel model;
  int level;
  int d;
  std::vector<std::pair<Configuration, double>> configs;
  BlockOperator delta;
};

namespace detail {

/// Partition of a region into translated copies of a dyadic cube, with the
/// bookkeeping needed to restrict site and edge configurations to each cell.
struct Refinement {
  CellPartition partition;
  RegionGraph graph;        // graph of the partitioned region
  Region cell_region;       // the cube each cell is a copy of
  std::vector<std::vector<std::int32_t>> cell_edges;  // [cell][local edge] -> global edge index
  std::vector<std::int32_t> crossing_edges;           // global edge indices joining two cells
};

inline Refinement build_refinement(const Region& region, std::int64_t cell_side) {
  Refinement r;
  r.partition = cell_partition(region, cell_side);
  r.graph = region_graph(region);
  r.cell_region =
      make_region(region.d, std::vector<std::int64_t>(static_cast<std::size_t>(region.d),
                                                      cell_side));
  const RegionGraph cell_graph = region_graph(r.cell_region);
  std::unordered_map<std::int64_t, std::int32_t> local_edge_index;
  local_edge_index.reserve(cell_graph.edges.size());
  const std::int64_t cell_volume = r.cell_region.volume();
  for (std::size_t e = 0; e < cell_graph.edges.size(); ++e)
    local_edge_index[cell_graph.edges[e].first * cell_volume + cell_graph.edges[e].second] =
        static_cast<std::int32_t>(e);

  auto local_index = [&](std::int64_t v) {
    // decode global offsets axis by axis, fold modulo the cell side
    std::vector<std::int64_t> offs(static_cast<std::size_t>(region.d));
    std::int64_t rest = v;
    for (int a = region.d - 1; a >= 0; --a) {
      offs[static_cast<std::size_t>(a)] = rest % region.sides[static_cast<std::size_t>(a)];
      rest /= region.sides[static_cast<std::size_t>(a)];
    }
    std::int64_t local = 0;
    for (int a = 0; a < region.d; ++a)
      local = local * cell_side + offs[static_cast<std::size_t>(a)] % cell_side;
    return local;
  };

  r.cell_edges.assign(static_cast<std::size_t>(r.partition.cell_count),
                      std::vector<std::int32_t>(cell_graph.edges.size(), -1));
  for (std::size_t e = 0; e < r.graph.edges.size(); ++e) {
    const auto [u, v] = r.graph.edges[e];
    const std::int32_t cu = r.partition.cell_of_vertex[static_cast<std::size_t>(u)];
    const std::int32_t cv = r.partition.cell_of_vertex[static_cast<std::size_t>(v)];
    if (cu != cv) {
      r.crossing_edges.push_back(static_cast<std::int32_t>(e));
      continue;
    }
    const std::int64_t lu = local_index(u), lv = local_index(v);
    const auto it = local_edge_index.find(std::min(lu, lv) * cell_volume + std::max(lu, lv));
    if (it == local_edge_index.end())
      throw std::logic_error("build_refinement: in-cell edge missing from cell graph");
    r.cell_edges[static_cast<std::size_t>(cu)][static_cast<std::size_t>(it->second)] =
        static_cast<std::int32_t>(e);
  }
  return r;
}

/// Restriction of a configuration on the big region to one cell, expressed
/// over the cell's own carrier in its canonical order.
inline std::vector<double> restrict_values(const Refinement& r, const Configuration& config,
                                           std::int64_t cell) {
  std::vector<double> out;
  if (config.carrier == Carrier::Sites) {
    const auto& verts = r.partition.cell_vertices[static_cast<std::size_t>(cell)];
    out.reserve(verts.size());
    for (std::int32_t v : verts) out.push_back(config.values[static_cast<std::size_t>(v)]);
  } else {
    const auto& edges = r.cell_edges[static_cast<std::size_t>(cell)];
    out.reserve(edges.size());
    for (std::int32_t e : edges) out.push_back(config.values[static_cast<std::size_t>(e)]);
  }
  return out;
}

/// Lexicographic index of a value vector in the configuration enumeration.
inline std::int64_t config_index(const DisorderModel& model, const std::vector<double>& values) {
  std::int64_t idx = 0;
  for (double v : values)
    idx = idx * static_cast<std::int64_t>(model.value_count()) + value_index(model, v);
  return idx;
}

}  // namespace detail

/// Builds the level algebra: enumerates the configurations on C_i and
/// assembles one weighted block per configuration.
inline LevelAlgebra level_algebra(const DisorderModel& model, int i, int d,
                                  std::int64_t cap = kConfigCap, unsigned threads = 1) {
  const Region region = cube_region(i, d);
  auto configs = enumerate_configs(model, region, cap);
  std::vector<Block> blocks(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t a) {
    blocks[a] = Block{configs[a].second, model_operator(model, configs[a].first).matrix()};
  });
  BlockOperator delta(std::move(blocks), i);
  return LevelAlgebra{model, i, d, std::move(configs), std::move(delta)};
}

/// Occurrence counts w[alpha][beta] of level-i configurations among the 2^d
/// dyadic restrictions of each level-(i+1) configuration, and the Markov
/// matrix M[beta][alpha] = w * n_i / n_{i+1} (rows sum to 1).
struct TransitionWeights {
  std::vector<std::vector<int>> occurrences;  // [alpha][beta]
  std::vector<std::vector<double>> markov;    // [beta][alpha]
};

inline TransitionWeights transition_weights(const DisorderModel& model, int i, int d,
                                            std::int64_t cap = kConfigCap) {
  const Region coarse = cube_region(i, d);
  const Region fine = cube_region(i + 1, d);
  const std::int64_t k_i = config_count(model, coarse, cap);
  const std::int64_t k_j = config_count(model, fine, cap);
  const auto refinement = detail::build_refinement(fine, std::int64_t{1} << i);
  const auto fine_configs = enumerate_configs(model, fine, cap);
  const double ratio = static_cast<double>(coarse.volume()) / static_cast<double>(fine.volume());

  TransitionWeights t;
  t.occurrences.assign(static_cast<std::size_t>(k_i),
                       std::vector<int>(static_cast<std::size_t>(k_j), 0));
  t.markov.assign(static_cast<std::size_t>(k_j),
                  std::vector<double>(static_cast<std::size_t>(k_i), 0.0));
  for (std::size_t b = 0; b < fine_configs.size(); ++b) {
    for (std::int64_t cell = 0; cell < refinement.partition.cell_count; ++cell) {
      const std::int64_t a = detail::config_index(
          model, detail::restrict_values(refinement, fine_configs[b].first, cell));
      ++t.occurrences[static_cast<std::size_t>(a)][b];
    }
    for (std::int64_t a = 0; a < k_i; ++a)
      t.markov[b][static_cast<std::size_t>(a)] =
          t.occurrences[static_cast<std::size_t>(a)][b] * ratio;
  }
  return t;
}

/// Max over alpha of |p_{i,alpha} - sum_beta M(beta,alpha) p_{i+1,beta}|.
/// The conditional-expectation identity makes this zero in exact arithmetic.
inline double check_compatibility(const DisorderModel& model, int i, int d,
                                  std::int64_t cap = kConfigCap) {
  const Region coarse = cube_region(i, d);
  const Region fine = cube_region(i + 1, d);
  const std::int64_t k_i = config_count(model, coarse, cap);
  (void)config_count(model, fine, cap);
  const auto refinement = detail::build_refinement(fine, std::int64_t{1} << i);
  const double ratio = static_cast<double>(coarse.volume()) / static_cast<double>(fine.volume());

  std::vector<detail::KahanSum> acc(static_cast<std::size_t>(k_i));
  for (const auto& [config, prob] : enumerate_configs(model, fine, cap))
    for (std::int64_t cell = 0; cell < refinement.partition.cell_count; ++cell) {
      const std::int64_t a =
          detail::config_index(model, detail::restrict_values(refinement, config, cell));
      acc[static_cast<std::size_t>(a)].add(prob * ratio);
    }

  double residual = 0.0;
  const auto coarse_configs = enumerate_configs(model, coarse, cap);
  for (std::int64_t a = 0; a < k_i; ++a)
    residual = std::max(residual, std::abs(coarse_configs[static_cast<std::size_t>(a)].second -
                                           acc[static_cast<std::size_t>(a)].value()));
  return residual;
}

/// The diagonal embedding of the level-i element into the level-j algebra:
/// for each level-j configuration, the direct sum of the level-i blocks of
/// its dyadic restrictions. Blocks are written in the level-j vertex basis
/// (cells are contiguous in dimension one), so the difference from the
/// level-j element is supported on subcube-boundary rows and columns.
inline BlockOperator embed_level(const LevelAlgebra& source, int j,
                                 std::int64_t cap = kConfigCap) {
  if (j < source.level) throw std::invalid_argument("embed_level: target level below source");
  if (j == source.level) return source.delta;
  const Region fine = cube_region(j, source.d);
  const auto refinement = detail::build_refinement(fine, std::int64_t{1} << source.level);
  const auto fine_configs = enumerate_configs(source.model, fine, cap);
  const int n_fine = static_cast<int>(fine.volume());

  std::vector<Block> blocks;
  blocks.reserve(fine_configs.size());
  for (const auto& [config, prob] : fine_configs) {
    Matrix m(n_fine);
    for (std::int64_t cell = 0; cell < refinement.partition.cell_count; ++cell) {
      const std::int64_t a = detail::config_index(
          source.model, detail::restrict_values(refinement, config, cell));
      const Matrix& block = source.delta.blocks()[static_cast<std::size_t>(a)].matrix;
      const auto& verts = refinement.partition.cell_vertices[static_cast<std::size_t>(cell)];
      for (int r = 0; r < block.dim(); ++r)
        for (int c = 0; c < block.dim(); ++c)
          if (block(r, c) != 0.0)
            m(verts[static_cast<std::size_t>(r)], verts[static_cast<std::size_t>(c)]) =
                block(r, c);
    }
    blocks.push_back(Block{prob, std::move(m)});
  }
  return BlockOperator(std::move(blocks), j);
}

/// The exact level-i IDS approximant: the probability-weighted mixture of the
/// per-configuration spectral distributions on C_i.
inline StepFunction ids_approx(const DisorderModel& model, int i, int d,
                               std::int64_t cap = kConfigCap, unsigned threads = 1) {
  return sigma(level_algebra(model, i, d, cap, threads).delta, threads);
}

/// Unbiased Monte-Carlo estimate of the level-i IDS: the average spectral
/// distribution over sampled configurations. Sample m uses the sub-seed
/// derive_seed(seed, m), so output is reproducible for any thread count.
inline StepFunction ids_monte_carlo(const DisorderModel& model, int i, int d,
                                    std::int64_t samples, std::uint64_t seed,
                                    unsigned threads = 1) {
  if (samples < 1) throw std::invalid_argument("ids_monte_carlo: samples must be >= 1");
  const Region region = cube_region(i, d);
  const std::int64_t n = region.volume();
  std::vector<std::vector<double>> spectra(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t m) {
    const Configuration config =
        sample_config(model, region, derive_seed(seed, static_cast<std::uint64_t>(m)));
    spectra[m] = sym_spectrum(model_operator(model, config));
  });
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples * n));
  for (const auto& s : spectra) values.insert(values.end(), s.begin(), s.end());
  const double mass = 1.0 / (static_cast<double>(n) * static_cast<double>(samples));
  return from_samples(values, std::vector<double>(values.size(), mass));
}

/// Rank distance between the level-j element and the embedded level-i
/// element, together with its certified bound, the dyadic boundary fraction.
struct CauchyReport {
  double rank_distance = 0.0;
  double bound = 0.0;
};

inline CauchyReport cauchy_report(const DisorderModel& model, int i, int j, int d,
                                  double tol = kRankTol, std::int64_t cap = kConfigCap,
                                  unsigned threads = 1) {
  if (i > j) throw std::invalid_argument("cauchy_report: need i <= j");
  if (i == j) return CauchyReport{0.0, 0.0};
  const LevelAlgebra coarse = level_algebra(model, i, d, cap, threads);
  const LevelAlgebra fine = level_algebra(model, j, d, cap, threads);
  const BlockOperator embedded = embed_level(coarse, j, cap);
  const double distance = rank(fine.delta - embedded, tol, threads);
  return CauchyReport{distance, boundary_fraction(j, i, d)};
}

struct TileStat {
  std::int64_t count = 0;
  double frequency = 0.0;
  double probability = 0.0;  // level-j configuration probability
};

/// One finite-volume experiment: a sampled disorder on a box, the spectral
/// distribution of its truncated operator, the tile-block-diagonal
/// comparison operator, tile-configuration frequencies and the certified
/// rank-defect bounds between them.
struct EmpiricalReport {
  int d = 1;
  std::int64_t side = 0;
  int level = 0;  // tile level j
  std::uint64_t seed = 0;
  Configuration omega;
  StepFunction box_distribution;    // N of the truncated operator on the box
  StepFunction tiled_distribution;  // N of the tile-block-diagonal operator
  std::optional<StepFunction> level_distribution;  // ids_approx(j), when enumerable
  std::vector<TileStat> tile_stats;                // per configuration index, when enumerable
  std::map<std::string, std::int64_t> tile_counts_by_key;  // fallback beyond the cap
  std::int64_t tile_count = 0;
  double rank_defect = 0.0;              // fraction of rows where the two operators differ
  double tile_boundary_fraction = 0.0;   // certified bound on the rank defect
  double dist_box_vs_tiled = 0.0;
  double dist_box_vs_level = 0.0;        // when enumerable
};

namespace detail {

inline bool edge_present(const DisorderModel& model, const Configuration& omega,
                         std::size_t edge_index, std::int32_t u, std::int32_t v) {
  switch (model.kind) {
    case ModelKind::SitePotential:
      return true;
    case ModelKind::BondPercolation:
      return omega.values[edge_index] == 0.0;
    case ModelKind::SitePercolation:
      return omega.values[static_cast<std::size_t>(u)] == 0.0 &&
             omega.values[static_cast<std::size_t>(v)] == 0.0;
  }
  return false;
}

inline std::string config_key(const std::vector<double>& values) {
  std::string key;
  for (double v : values) {
    if (!key.empty()) key += ',';
    key += format_double(v);
  }
  return key;
}

}  // namespace detail

inline EmpiricalReport empirical_run(const DisorderModel& model, int d, std::int64_t side, int j,
                                     std::uint64_t seed, unsigned threads = 1,
                                     std::int64_t dense_cap = kDenseCap) {
  const std::int64_t tile_side = std::int64_t{1} << j;
  if (side < tile_side || side % tile_side != 0)
    throw std::invalid_argument("empirical_run: box side must be a positive multiple of 2^j");
  const Region box = make_region(d, std::vector<std::int64_t>(static_cast<std::size_t>(d), side));
  if (box.volume() > dense_cap)
    throw CapExceeded("empirical_run: box volume " + std::to_string(box.volume()) +
                      " exceeds the dense eigensolver cap " + std::to_string(dense_cap));

  EmpiricalReport report;
  report.d = d;
  report.side = side;
  report.level = j;
  report.seed = seed;
  report.omega = sample_config(model, box, seed);
  report.box_distribution = spectral_distribution(model_operator(model, report.omega));

  const auto refinement = detail::build_refinement(box, tile_side);
  const std::int64_t tiles = refinement.partition.cell_count;
  report.tile_count = tiles;
  report.tile_boundary_fraction = static_cast<double>(refinement.partition.boundary_count) /
                                  static_cast<double>(box.volume());

  // Tile spectra and tile configurations, in deterministic cell order.
  std::vector<std::vector<double>> tile_values(static_cast<std::size_t>(tiles));
  std::vector<std::vector<double>> tile_spectra(static_cast<std::size_t>(tiles));
  const Region cell_region = refinement.cell_region;
  parallel_for(static_cast<std::size_t>(tiles), threads, [&](std::size_t cell) {
    tile_values[cell] =
        detail::restrict_values(refinement, report.omega, static_cast<std::int64_t>(cell));
    const Configuration tile_config{cell_region, carrier_of(model), tile_values[cell]};
    tile_spectra[cell] = sym_spectrum(model_operator(model, tile_config));
  });
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(box.volume()));
  for (const auto& s : tile_spectra) pooled.insert(pooled.end(), s.begin(), s.end());
  report.tiled_distribution =
      from_samples(pooled, std::vector<double>(pooled.size(), 1.0 / box.volume()));

  // Rank defect: rows where the box operator and the tiled operator differ,
  // i.e. endpoints of crossing edges that the configuration keeps.
  std::vector<std::uint8_t> differs(static_cast<std::size_t>(box.volume()), 0);
  for (std::int32_t e : refinement.crossing_edges) {
    const auto [u, v] = refinement.graph.edges[static_cast<std::size_t>(e)];
    if (detail::edge_present(model, report.omega, static_cast<std::size_t>(e), u, v)) {
      differs[static_cast<std::size_t>(u)] = 1;
      differs[static_cast<std::size_t>(v)] = 1;
    }
  }
  std::int64_t defect_rows = 0;
  for (std::uint8_t f : differs) defect_rows += f;
  report.rank_defect = static_cast<double>(defect_rows) / static_cast<double>(box.volume());
  report.dist_box_vs_tiled = sup_distance(report.box_distribution, report.tiled_distribution);

  // Tile-configuration frequencies, against exact probabilities when the
  // level is enumerable.
  bool enumerable = true;
  try {
    (void)config_count(model, cell_region, kConfigCap);
  } catch (const CapExceeded&) {
    enumerable = false;
  }
  if (enumerable) {
    const auto level_configs = enumerate_configs(model, cell_region);
    report.tile_stats.assign(level_configs.size(), TileStat{});
    for (std::size_t a = 0; a < level_configs.size(); ++a)
      report.tile_stats[a].probability = level_configs[a].second;
    for (const auto& values : tile_values)
      ++report.tile_stats[static_cast<std::size_t>(detail::config_index(model, values))].count;
    for (auto& stat : report.tile_stats)
      stat.frequency = static_cast<double>(stat.count) / static_cast<double>(tiles);
    report.level_distribution = ids_approx(model, j, d, kConfigCap, threads);
    report.dist_box_vs_level =
        sup_distance(report.box_distribution, *report.level_distribution);
  } else {
    for (const auto& values : tile_values) ++report.tile_counts_by_key[detail::config_key(values)];
  }
  return report;
}

}  // namespace rankspec
