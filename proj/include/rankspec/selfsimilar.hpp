#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankspec/graph.hpp"
#include "rankspec/linalg.hpp"
#include "rankspec/parallel.hpp"
#include "rankspec/stepfn.hpp"

namespace rankspec {

/// The isomorphism class of a radius-r ball with a marked ordered vertex
/// pair, in canonical labels. Kernel rules may consume only what this type
/// exposes, which makes every pattern operator invariant by construction.
class BallClass {
 public:
  BallClass(int size, std::vector<std::uint64_t> rows, int root, int target, std::string key)
      : size_(size), rows_(std::move(rows)), root_(root), target_(target),
        key_(std::move(key)) {}

  int size() const { return size_; }
  int root() const { return root_; }
  int target() const { return target_; }
  bool adjacent(int a, int b) const { return (rows_[static_cast<std::size_t>(a)] >> b) & 1; }
  int degree(int v) const { return __builtin_popcountll(rows_[static_cast<std::size_t>(v)]); }
  const std::string& key() const { return key_; }

 private:
  int size_;
  std::vector<std::uint64_t> rows_;
  int root_;
  int target_;
  std::string key_;
};

namespace detail {

// Iterative color refinement: start from the marking colors, split classes by
// the multiset of neighbor colors until stable. Class ids are renumbered in a
// canonical (sorted-signature) order each round.
inline std::vector<int> refine_colors(int m, const std::vector<std::uint64_t>& rows,
                                      std::vector<int> color) {
  for (int round = 0; round < m + 1; ++round) {
    std::vector<std::vector<int>> sig(static_cast<std::size_t>(m));
    for (int v = 0; v < m; ++v) {
      sig[static_cast<std::size_t>(v)].push_back(color[static_cast<std::size_t>(v)]);
      std::vector<int> nb;
      for (int u = 0; u < m; ++u)
        if ((rows[static_cast<std::size_t>(v)] >> u) & 1)
          nb.push_back(color[static_cast<std::size_t>(u)]);
      std::sort(nb.begin(), nb.end());
      sig[static_cast<std::size_t>(v)].insert(sig[static_cast<std::size_t>(v)].end(), nb.begin(),
                                              nb.end());
    }
    std::vector<std::vector<int>> uniq(sig.begin(), sig.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<int> next(static_cast<std::size_t>(m));
    for (int v = 0; v < m; ++v)
      next[static_cast<std::size_t>(v)] = static_cast<int>(
          std::lower_bound(uniq.begin(), uniq.end(), sig[static_cast<std::size_t>(v)]) -
          uniq.begin());
    if (next == color) return color;
    color = std::move(next);
  }
  return color;
}

// Canonical labeling of a colored graph: the permutation, compatible with the
// refined color classes, that minimizes the lower-triangle adjacency
// bitstring. Exhaustive backtracking with per-position minimal-row pruning;
// balls at desk scale are tiny.
struct CanonicalSearch {
  int m;
  const std::vector<std::uint64_t>& rows;
  std::vector<int> refined;                 // refined color per vertex
  std::vector<int> position_class;          // required class per canonical position
  std::vector<std::uint64_t> best_rows;     // best lower-triangle rows found
  std::vector<int> best_perm;               // canonical position -> original vertex
  std::vector<int> perm;
  std::vector<std::uint64_t> cur_rows;
  std::vector<char> used;
  long steps = 0;

  explicit CanonicalSearch(int m_, const std::vector<std::uint64_t>& rows_,
                           std::vector<int> refined_)
      : m(m_), rows(rows_), refined(std::move(refined_)) {
    position_class = refined;
    std::sort(position_class.begin(), position_class.end());
    perm.assign(static_cast<std::size_t>(m), -1);
    cur_rows.assign(static_cast<std::size_t>(m), 0);
    used.assign(static_cast<std::size_t>(m), 0);
  }

  void run() {
    dfs(0);
    if (best_perm.empty()) throw std::logic_error("canonical search found no labeling");
  }

  void dfs(int pos) {
    if (++steps > 2'000'000)
      throw CapExceeded("ball canonicalization too expensive; reduce the propagation radius");
    if (pos == m) {
      if (best_perm.empty() || cur_rows < best_rows) {
        best_rows = cur_rows;
        best_perm = perm;
      }
      return;
    }
    // row bits of each unused class member against the placed prefix
    std::uint64_t min_row = 0;
    bool have_min = false;
    std::vector<int> candidates;
    for (int v = 0; v < m; ++v) {
      if (used[static_cast<std::size_t>(v)] ||
          refined[static_cast<std::size_t>(v)] != position_class[static_cast<std::size_t>(pos)])
        continue;
      std::uint64_t bits = 0;
      for (int p = 0; p < pos; ++p)
        bits = (bits << 1) |
               ((rows[static_cast<std::size_t>(v)] >> perm[static_cast<std::size_t>(p)]) & 1);
      if (!have_min || bits < min_row) {
        min_row = bits;
        have_min = true;
        candidates.assign(1, v);
      } else if (bits == min_row) {
        candidates.push_back(v);
      }
    }
    // only a minimal row at this position can begin a minimal certificate,
    // unless the prefix already differs from the best
    const bool prefix_tied =
        best_perm.empty() ||
        std::equal(cur_rows.begin(), cur_rows.begin() + pos, best_rows.begin());
    if (!best_perm.empty() && prefix_tied && min_row > best_rows[static_cast<std::size_t>(pos)])
      return;
    for (int v : candidates) {
      perm[static_cast<std::size_t>(pos)] = v;
      cur_rows[static_cast<std::size_t>(pos)] = min_row;
      used[static_cast<std::size_t>(v)] = 1;
      dfs(pos + 1);
      used[static_cast<std::size_t>(v)] = 0;
    }
    perm[static_cast<std::size_t>(pos)] = -1;
  }
};

inline BallClass canonical_marked_ball(const Graph& g, int root, int target, int radius) {
  const std::vector<int> dist = distances_within(g, root, radius);
  std::vector<int> verts;
  for (int v = 0; v < g.n; ++v)
    if (dist[static_cast<std::size_t>(v)] >= 0) verts.push_back(v);
  const int m = static_cast<int>(verts.size());
  if (m > 64) throw CapExceeded("ball larger than 64 vertices");
  std::vector<int> local(static_cast<std::size_t>(g.n), -1);
  for (int a = 0; a < m; ++a) local[static_cast<std::size_t>(verts[static_cast<std::size_t>(a)])] = a;
  std::vector<std::uint64_t> rows(static_cast<std::size_t>(m), 0);
  for (int a = 0; a < m; ++a)
    for (int u : g.adj[static_cast<std::size_t>(verts[static_cast<std::size_t>(a)])]) {
      const int b = local[static_cast<std::size_t>(u)];
      if (b >= 0) rows[static_cast<std::size_t>(a)] |= std::uint64_t{1} << b;
    }
  std::vector<int> color(static_cast<std::size_t>(m), 2);
  color[static_cast<std::size_t>(local[static_cast<std::size_t>(root)])] = 0;
  if (target != root) color[static_cast<std::size_t>(local[static_cast<std::size_t>(target)])] = 1;

  CanonicalSearch search(m, rows, refine_colors(m, rows, std::move(color)));
  search.run();
  std::vector<int> place(static_cast<std::size_t>(m));  // original -> canonical
  for (int p = 0; p < m; ++p)
    place[static_cast<std::size_t>(search.best_perm[static_cast<std::size_t>(p)])] = p;
  std::vector<std::uint64_t> canon_rows(static_cast<std::size_t>(m), 0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if ((rows[static_cast<std::size_t>(a)] >> b) & 1)
        canon_rows[static_cast<std::size_t>(place[static_cast<std::size_t>(a)])] |=
            std::uint64_t{1} << place[static_cast<std::size_t>(b)];
  const int canon_root = place[static_cast<std::size_t>(local[static_cast<std::size_t>(root)])];
  const int canon_target =
      place[static_cast<std::size_t>(local[static_cast<std::size_t>(target)])];

  std::string key = std::to_string(m) + ":" + std::to_string(canon_root) + ":" +
                    std::to_string(canon_target) + ":";
  for (std::uint64_t r : canon_rows) key += std::to_string(r) + ",";
  return BallClass(m, std::move(canon_rows), canon_root, canon_target, std::move(key));
}

}  // namespace detail

/// A finite-propagation kernel whose value at (x, y) depends only on the
/// isomorphism class of the marked radius-r ball around x.
struct PatternKernel {
  int propagation = 0;
  bool symmetric = true;
  std::function<double(const BallClass&)> rule;
};

inline PatternKernel laplacian_kernel() {
  return PatternKernel{1, true, [](const BallClass& b) -> double {
                         if (b.target() == b.root()) return b.degree(b.root());
                         return b.adjacent(b.root(), b.target()) ? -1.0 : 0.0;
                       }};
}

inline PatternKernel adjacency_kernel() {
  return PatternKernel{1, true, [](const BallClass& b) -> double {
                         return b.target() != b.root() && b.adjacent(b.root(), b.target()) ? 1.0
                                                                                            : 0.0;
                       }};
}

inline PatternKernel constant_kernel(double c) {
  return PatternKernel{0, true, [c](const BallClass& b) -> double {
                         return b.target() == b.root() ? c : 0.0;
                       }};
}

/// Assembles the pattern-invariant operator on a finite graph: entry (x, y)
/// is the rule's value on the canonical marked ball, zero beyond the
/// propagation radius.
inline SymMatrix pattern_operator(const PatternKernel& kernel, const Graph& g) {
  if (!kernel.symmetric)
    throw std::invalid_argument("pattern_operator: kernel must be flagged symmetric");
  if (!kernel.rule) throw std::invalid_argument("pattern_operator: kernel has no rule");
  Matrix m(g.n);
  std::unordered_map<std::string, double> memo;
  for (int x = 0; x < g.n; ++x) {
    const std::vector<int> dist = distances_within(g, x, kernel.propagation);
    for (int y = 0; y < g.n; ++y) {
      if (dist[static_cast<std::size_t>(y)] < 0) continue;
      const BallClass cls = detail::canonical_marked_ball(g, x, y, kernel.propagation);
      auto it = memo.find(cls.key());
      const double value = it != memo.end() ? it->second : (memo[cls.key()] = kernel.rule(cls));
      m(x, y) = value;
    }
  }
  try {
    return SymMatrix(std::move(m));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("pattern_operator: rule is asymmetric but kernel is flagged symmetric");
  }
}

struct GlueEdge {
  int copy_a = 0, s_a = 0;  // endpoint a: copy index, index into S_n
  int copy_b = 0, s_b = 0;
};

struct SelectEntry {
  int copy = 0, s = 0;  // S_{n+1} member: copy index, index into S_n
};

/// Seed graph, connecting set, copy count and the per-level gluing and
/// selection rules. Rules are lists indexed by level; the last entry repeats,
/// so a single entry acts as a stationary template.
struct SelfSimilarSpec {
  Graph seed;
  std::vector<int> connecting;  // S_1, ordered
  int copies = 2;               // k
  int degree_bound = 0;         // d
  std::vector<std::vector<GlueEdge>> glue;
  std::vector<std::vector<SelectEntry>> select;
};

struct LevelGraph {
  Graph graph;
  std::vector<int> connecting;  // S_n, ordered
};

struct Tower {
  std::vector<LevelGraph> levels;                        // G_1..G_L
  std::vector<std::vector<std::pair<int, int>>> joints;  // edges added at each step
};

namespace detail {

inline void validate_spec(const SelfSimilarSpec& spec) {
  if (spec.copies < 2) throw std::invalid_argument("self-similar spec: need k >= 2");
  if (spec.degree_bound < 1) throw std::invalid_argument("self-similar spec: need degree bound >= 1");
  if (spec.seed.n < 1) throw std::invalid_argument("self-similar spec: empty seed graph");
  if (spec.connecting.empty())
    throw std::invalid_argument("self-similar spec: empty connecting set");
  for (int v : spec.connecting)
    if (v < 0 || v >= spec.seed.n)
      throw std::invalid_argument("self-similar spec: connecting vertex out of range");
  for (int v = 0; v < spec.seed.n; ++v)
    if (spec.seed.degree(v) > spec.degree_bound)
      throw std::invalid_argument("self-similar spec: seed exceeds the degree bound");
  if (spec.glue.empty() || spec.select.empty())
    throw std::invalid_argument("self-similar spec: missing glue or select rule");
}

template <class T>
const std::vector<T>& rule_for_level(const std::vector<std::vector<T>>& rules, int level) {
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(level - 1),
                                                rules.size() - 1);
  return rules[idx];
}

}  // namespace detail

/// Builds G_1..G_max inductively: k disjoint copies of G_n (copy 0 keeps its
/// vertex ids, copy c is offset by c * |V_n|), glue edges between connecting
/// vertices, then the selected S_{n+1}.
inline Tower build_tower(const SelfSimilarSpec& spec, int max_level,
                         std::int64_t cap = kVertexCap) {
  detail::validate_spec(spec);
  if (max_level < 1) throw std::invalid_argument("build_tower: need level >= 1");
  Tower tower;
  tower.levels.push_back(LevelGraph{spec.seed, spec.connecting});
  for (int level = 1; level < max_level; ++level) {
    const LevelGraph& prev = tower.levels.back();
    const std::int64_t n_prev = prev.graph.n;
    const std::int64_t n_next = n_prev * spec.copies;
    if (n_next > cap) throw CapExceeded("build_tower: vertex count exceeds cap");
    Graph g = Graph::empty(static_cast<int>(n_next));
    for (int c = 0; c < spec.copies; ++c)
      for (const auto& [u, v] : prev.graph.edges)
        g.add_edge(static_cast<int>(c * n_prev) + u, static_cast<int>(c * n_prev) + v);

    auto connecting_vertex = [&](int copy, int s) {
      if (copy < 0 || copy >= spec.copies)
        throw std::invalid_argument("self-similar rule: copy index out of range");
      if (s < 0 || s >= static_cast<int>(prev.connecting.size()))
        throw std::invalid_argument("self-similar rule: connecting index out of range");
      return static_cast<int>(copy * n_prev) + prev.connecting[static_cast<std::size_t>(s)];
    };

    std::vector<std::pair<int, int>> joints;
    for (const GlueEdge& e : detail::rule_for_level(spec.glue, level)) {
      const int u = connecting_vertex(e.copy_a, e.s_a);
      const int v = connecting_vertex(e.copy_b, e.s_b);
      g.add_edge(u, v);
      if (g.degree(u) > spec.degree_bound || g.degree(v) > spec.degree_bound)
        throw std::invalid_argument("glue edge (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") violates the degree bound at level " +
                                    std::to_string(level + 1));
      joints.emplace_back(u, v);
    }

    std::vector<int> next_connecting;
    for (const SelectEntry& s : detail::rule_for_level(spec.select, level)) {
      const int v = connecting_vertex(s.copy, s.s);
      if (std::find(next_connecting.begin(), next_connecting.end(), v) != next_connecting.end())
        throw std::invalid_argument("select rule repeats a vertex");
      next_connecting.push_back(v);
    }
    if (next_connecting.empty()) throw std::invalid_argument("select rule picked no vertices");

    tower.joints.push_back(std::move(joints));
    tower.levels.push_back(LevelGraph{std::move(g), std::move(next_connecting)});
  }
  return tower;
}

inline LevelGraph build_level(const SelfSimilarSpec& spec, int level,
                              std::int64_t cap = kVertexCap) {
  Tower tower = build_tower(spec, level, cap);
  return std::move(tower.levels.back());
}

/// The ratio sequence |S_n| / |V(G_n)| together with the Folner defect of
/// each V(G_n) inside the deepest built level. A vanishing ratio sequence is
/// the defining property of a self-similar construction. `fresh_connecting`
/// records whether every S_{n+1} avoids V(G_n); rules such as the path tower
/// keep one old endpoint and trade this away deliberately, so it is reported
/// rather than enforced.
struct SelfSimilarReport {
  std::vector<double> ratios;
  std::vector<double> folner_defects;
  bool ratio_vanishing = false;
  bool fresh_connecting = true;
};

inline SelfSimilarReport check_self_similar(const SelfSimilarSpec& spec, int levels,
                                            std::int64_t cap = kVertexCap) {
  const Tower tower = build_tower(spec, levels, cap);
  SelfSimilarReport report;
  for (const LevelGraph& lg : tower.levels)
    report.ratios.push_back(static_cast<double>(lg.connecting.size()) /
                            static_cast<double>(lg.graph.n));
  const Graph& top = tower.levels.back().graph;
  for (std::size_t n = 0; n + 1 < tower.levels.size(); ++n) {
    const int volume = tower.levels[n].graph.n;  // V(G_n) = vertex ids 0..volume-1
    int boundary = 0;
    for (int v = 0; v < volume; ++v)
      for (int u : top.adj[static_cast<std::size_t>(v)])
        if (u >= volume) {
          ++boundary;
          break;
        }
    report.folner_defects.push_back(static_cast<double>(boundary) /
                                    static_cast<double>(volume));
  }
  report.ratio_vanishing =
      report.ratios.back() <= 0.5 * report.ratios.front() || report.ratios.back() == 0.0;
  for (std::size_t n = 0; n + 1 < tower.levels.size(); ++n)
    for (int v : tower.levels[n + 1].connecting)
      if (v < tower.levels[n].graph.n) report.fresh_connecting = false;
  return report;
}

/// Per-level spectral distributions of the pattern operator, successive sup
/// distances, and the certified per-step rank-defect bounds: the fraction of
/// level-(n+1) vertices within the propagation radius of a glue edge.
struct TowerResult {
  std::vector<StepFunction> level_ids;
  std::vector<double> distances;       // between levels n and n+1
  std::vector<double> defect_bounds;   // certified bound for each distance
};

inline TowerResult tower_ids(const SelfSimilarSpec& spec, const PatternKernel& kernel,
                             int max_level, unsigned threads = 1,
                             std::int64_t dense_cap = std::int64_t{4096}) {
  const Tower tower = build_tower(spec, max_level);
  if (tower.levels.back().graph.n > dense_cap)
    throw CapExceeded("tower_ids: top level exceeds the dense eigensolver cap");
  TowerResult result;
  result.level_ids.resize(tower.levels.size());
  parallel_for(tower.levels.size(), threads, [&](std::size_t n) {
    result.level_ids[n] = spectral_distribution(pattern_operator(kernel, tower.levels[n].graph));
  });
  for (std::size_t n = 0; n + 1 < tower.levels.size(); ++n) {
    result.distances.push_back(sup_distance(result.level_ids[n], result.level_ids[n + 1]));
    const Graph& g = tower.levels[n + 1].graph;
    std::vector<char> touched(static_cast<std::size_t>(g.n), 0);
    for (const auto& [u, v] : tower.joints[n])
      for (int endpoint : {u, v}) {
        const std::vector<int> dist = distances_within(g, endpoint, kernel.propagation);
        for (int w = 0; w < g.n; ++w)
          if (dist[static_cast<std::size_t>(w)] >= 0) touched[static_cast<std::size_t>(w)] = 1;
      }
    int rows = 0;
    for (char t : touched) rows += t;
    result.defect_bounds.push_back(static_cast<double>(rows) / static_cast<double>(g.n));
  }
  return result;
}

/// Partition of the vertices by the isomorphism class of their rooted
/// radius-r ball, with empirical frequencies (summing to 1). A diagnostic for
/// the quasicrystal frequency property, not a proof of it.
inline std::map<std::string, double> pattern_census(const Graph& g, int radius) {
  std::map<std::string, std::int64_t> counts;
  for (int x = 0; x < g.n; ++x)
    ++counts[detail::canonical_marked_ball(g, x, x, radius).key()];
  std::map<std::string, double> freq;
  for (const auto& [key, count] : counts)
    freq[key] = static_cast<double>(count) / static_cast<double>(g.n);
  return freq;
}

}  // namespace rankspec
