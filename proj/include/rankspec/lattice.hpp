#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankspec/linalg.hpp"

namespace rankspec {

// Boxes larger than this are refused; everything downstream is dense.
inline constexpr std::int64_t kVertexCap = std::int64_t{1} << 20;

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An axis-aligned box of lattice points. Vertices are enumerated in
/// lexicographic order of their coordinate tuples (coordinate 0 most
/// significant); every matrix, configuration and CSV in the artifact relies
/// on this order being stable.
struct Region {
  int d = 0;
  std::vector<std::int64_t> origin;
  std::vector<std::int64_t> sides;

  std::int64_t volume() const {
    std::int64_t v = 1;
    for (std::int64_t s : sides) v *= s;
    return v;
  }

  std::vector<std::int64_t> coords(std::int64_t index) const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(d));
    for (int a = d - 1; a >= 0; --a) {
      c[a] = origin[a] + index % sides[a];
      index /= sides[a];
    }
    return c;
  }

  std::int64_t index_of(const std::vector<std::int64_t>& c) const {
    std::int64_t index = 0;
    for (int a = 0; a < d; ++a) {
      const std::int64_t off = c[a] - origin[a];
      if (off < 0 || off >= sides[a]) throw std::out_of_range("Region: point outside box");
      index = index * sides[a] + off;
    }
    return index;
  }

  bool operator==(const Region&) const = default;
};

inline Region make_region(int d, std::vector<std::int64_t> sides,
                          std::vector<std::int64_t> origin = {}) {
  if (d < 1) throw std::invalid_argument("Region: dimension must be >= 1");
  if (static_cast<int>(sides.size()) != d) throw std::invalid_argument("Region: sides/d mismatch");
  for (std::int64_t s : sides)
    if (s < 1) throw std::invalid_argument("Region: sides must be >= 1");
  if (origin.empty()) origin.assign(static_cast<std::size_t>(d), 0);
  if (static_cast<int>(origin.size()) != d)
    throw std::invalid_argument("Region: origin/d mismatch");
  return Region{d, std::move(origin), std::move(sides)};
}

/// The dyadic cube C_i = {0,...,2^i - 1}^d.
inline Region cube_region(int level, int d) {
  if (level < 0) throw std::invalid_argument("cube_region: negative level");
  return make_region(d, std::vector<std::int64_t>(static_cast<std::size_t>(d),
                                                  std::int64_t{1} << level));
}

/// Nearest-neighbor graph spanned by the vertices of a region.
struct RegionGraph {
  Region region;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // u < v, deterministic order
  std::vector<std::int32_t> degrees;

  std::int64_t vertex_count() const { return region.volume(); }
};

inline RegionGraph region_graph(const Region& region, std::int64_t cap = kVertexCap) {
  const std::int64_t n = region.volume();
  if (n > cap)
    throw CapExceeded("region_graph: " + std::to_string(n) + " vertices exceeds cap " +
                      std::to_string(cap));
  RegionGraph g{region, {}, std::vector<std::int32_t>(static_cast<std::size_t>(n), 0)};
  std::vector<std::int64_t> stride(static_cast<std::size_t>(region.d), 1);
  for (int a = region.d - 2; a >= 0; --a) stride[a] = stride[a + 1] * region.sides[a + 1];
  for (std::int64_t v = 0; v < n; ++v) {
    std::int64_t rest = v;
    for (int a = 0; a < region.d; ++a) {
      const std::int64_t off = rest / stride[a];
      rest %= stride[a];
      if (off + 1 < region.sides[a]) {
        const std::int64_t w = v + stride[a];
        g.edges.emplace_back(static_cast<std::int32_t>(v), static_cast<std::int32_t>(w));
        ++g.degrees[static_cast<std::size_t>(v)];
        ++g.degrees[static_cast<std::size_t>(w)];
      }
    }
  }
  return g;
}

/// Nearest-neighbor graph on the box {0..sides[0]-1} x ... x {0..sides[d-1]-1}.
inline RegionGraph box_graph(int d, const std::vector<std::int64_t>& sides,
                             std::int64_t cap = kVertexCap) {
  return region_graph(make_region(d, sides), cap);
}

/// Combinatorial Laplacian of the spanned subgraph: diagonal deg(x) (or
/// deg(x) * potential(x)), -1 on edges. Degrees are taken within the graph.
inline SymMatrix laplacian(const RegionGraph& g, const std::vector<double>& potential = {}) {
  const std::int64_t n = g.vertex_count();
  if (!potential.empty() && static_cast<std::int64_t>(potential.size()) != n)
    throw std::invalid_argument("laplacian: potential length mismatch");
  Matrix m(static_cast<int>(n));
  for (std::int64_t v = 0; v < n; ++v) {
    const double w = potential.empty() ? 1.0 : potential[static_cast<std::size_t>(v)];
    m(static_cast<int>(v), static_cast<int>(v)) = g.degrees[static_cast<std::size_t>(v)] * w;
  }
  for (const auto& [u, v] : g.edges) {
    m(u, v) = -1.0;
    m(v, u) = -1.0;
  }
  return SymMatrix(std::move(m));
}

/// Laplacian of the subgraph of Z^d spanned by an arbitrary finite vertex
/// set, in the given vertex order. Lets non-box Folner shapes be tested
/// against the same truncation convention (degrees within the set).
inline SymMatrix lattice_laplacian(int d, const std::vector<std::vector<std::int64_t>>& vertices,
                                   const std::vector<double>& potential = {},
                                   std::int64_t cap = kVertexCap) {
  const std::int64_t n = static_cast<std::int64_t>(vertices.size());
  if (n == 0) throw std::invalid_argument("lattice_laplacian: empty vertex set");
  if (n > cap) throw CapExceeded("lattice_laplacian: vertex set exceeds cap");
  if (!potential.empty() && static_cast<std::int64_t>(potential.size()) != n)
    throw std::invalid_argument("lattice_laplacian: potential length mismatch");
  auto hash = [](const std::vector<std::int64_t>& c) {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (std::int64_t x : c) h = h * 0x100000001b3ULL ^ static_cast<std::size_t>(x);
    return h;
  };
  std::unordered_map<std::size_t, std::vector<std::int64_t>> index_of;  // hash -> indices
  for (std::int64_t v = 0; v < n; ++v) {
    const auto& c = vertices[static_cast<std::size_t>(v)];
    if (static_cast<int>(c.size()) != d)
      throw std::invalid_argument("lattice_laplacian: coordinate dimension mismatch");
    auto& bucket = index_of[hash(c)];
    for (std::int64_t other : bucket)
      if (vertices[static_cast<std::size_t>(other)] == c)
        throw std::invalid_argument("lattice_laplacian: duplicate vertex");
    bucket.push_back(v);
  }
  auto find_vertex = [&](const std::vector<std::int64_t>& c) -> std::int64_t {
    const auto it = index_of.find(hash(c));
    if (it == index_of.end()) return -1;
    for (std::int64_t v : it->second)
      if (vertices[static_cast<std::size_t>(v)] == c) return v;
    return -1;
  };
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  for (std::int64_t v = 0; v < n; ++v) {
    std::vector<std::int64_t> c = vertices[static_cast<std::size_t>(v)];
    for (int a = 0; a < d; ++a) {
      ++c[static_cast<std::size_t>(a)];
      const std::int64_t w = find_vertex(c);
      if (w >= 0) edges.emplace_back(v, w);
      --c[static_cast<std::size_t>(a)];
    }
  }
  Matrix m(static_cast<int>(n));
  std::vector<int> degrees(static_cast<std::size_t>(n), 0);
  for (const auto& [u, v] : edges) {
    m(static_cast<int>(u), static_cast<int>(v)) = -1.0;
    m(static_cast<int>(v), static_cast<int>(u)) = -1.0;
    ++degrees[static_cast<std::size_t>(u)];
    ++degrees[static_cast<std::size_t>(v)];
  }
  for (std::int64_t v = 0; v < n; ++v)
    m(static_cast<int>(v), static_cast<int>(v)) =
        degrees[static_cast<std::size_t>(v)] *
        (potential.empty() ? 1.0 : potential[static_cast<std::size_t>(v)]);
  return SymMatrix(std::move(m));
}

/// Partition of a region into axis-aligned cells of side `cell_side` (which
/// must divide every side). A vertex is a boundary vertex when one of its
/// lattice neighbors inside the region lies in a different cell.
struct CellPartition {
  Region region;
  std::int64_t cell_side = 1;
  std::int64_t cell_count = 0;
  std::vector<std::int32_t> cell_of_vertex;
  std::vector<std::uint8_t> boundary;
  std::vector<std::vector<std::int32_t>> cell_vertices;  // lexicographic within each cell
  std::int64_t boundary_count = 0;
};

inline CellPartition cell_partition(const Region& region, std::int64_t cell_side,
                                    std::int64_t cap = kVertexCap) {
  for (std::int64_t s : region.sides)
    if (s % cell_side != 0)
      throw std::invalid_argument("cell_partition: cell side does not divide region side");
  const std::int64_t n = region.volume();
  if (n > cap) throw CapExceeded("cell_partition: region exceeds vertex cap");
  CellPartition p;
  p.region = region;
  p.cell_side = cell_side;
  p.cell_count = 1;
  for (std::int64_t s : region.sides) p.cell_count *= s / cell_side;
  p.cell_of_vertex.resize(static_cast<std::size_t>(n));
  p.boundary.assign(static_cast<std::size_t>(n), 0);
  p.cell_vertices.resize(static_cast<std::size_t>(p.cell_count));

  const int d = region.d;
  std::vector<std::int64_t> coords(static_cast<std::size_t>(d));
  for (std::int64_t v = 0; v < n; ++v) {
    std::int64_t rest = v;
    for (int a = d - 1; a >= 0; --a) {
      coords[a] = rest % region.sides[a];
      rest /= region.sides[a];
    }
    std::int64_t cell = 0;
    for (int a = 0; a < d; ++a) cell = cell * (region.sides[a] / cell_side) + coords[a] / cell_side;
    p.cell_of_vertex[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(cell);
    p.cell_vertices[static_cast<std::size_t>(cell)].push_back(static_cast<std::int32_t>(v));
    for (int a = 0; a < d && !p.boundary[static_cast<std::size_t>(v)]; ++a) {
      for (int dir : {-1, 1}) {
        const std::int64_t na = coords[a] + dir;
        if (na < 0 || na >= region.sides[a]) continue;
        if (na / cell_side != coords[a] / cell_side) {
          p.boundary[static_cast<std::size_t>(v)] = 1;
          break;
        }
      }
    }
    if (p.boundary[static_cast<std::size_t>(v)]) ++p.boundary_count;
  }
  return p;
}

/// Partition of C_j into 2^{d(j-i)} dyadic subcubes of side 2^i.
inline CellPartition dyadic_partition(int j, int i, int d) {
  if (i < 0 || i > j) throw std::invalid_argument("dyadic_partition: need 0 <= i <= j");
  return cell_partition(cube_region(j, d), std::int64_t{1} << i);
}

/// Fraction of C_j vertices adjacent to another side-2^i subcube.
/// Nonincreasing in i for fixed j and d; zero at i = j.
inline double boundary_fraction(int j, int i, int d) {
  const CellPartition p = dyadic_partition(j, i, d);
  return static_cast<double>(p.boundary_count) / static_cast<double>(p.region.volume());
}

/// Centered boxes with the given side lengths; boundary-to-volume ratio
/// decays like 2d/side, so ascending sides give a Folner sequence.
inline std::vector<Region> folner_boxes(int d, const std::vector<std::int64_t>& sides) {
  for (std::size_t k = 0; k + 1 < sides.size(); ++k)
    if (!(sides[k] < sides[k + 1]))
      throw std::invalid_argument("folner_boxes: sides must be ascending");
  std::vector<Region> boxes;
  boxes.reserve(sides.size());
  for (std::int64_t s : sides) {
    std::vector<std::int64_t> side_vec(static_cast<std::size_t>(d), s);
    std::vector<std::int64_t> origin(static_cast<std::size_t>(d), -(s / 2));
    boxes.push_back(make_region(d, std::move(side_vec), std::move(origin)));
  }
  return boxes;
}

/// Fraction of box vertices having a lattice neighbor outside the box.
inline double boundary_ratio(const Region& region) {
  std::int64_t inner = 1;
  for (std::int64_t s : region.sides) inner *= std::max<std::int64_t>(s - 2, 0);
  const std::int64_t vol = region.volume();
  return static_cast<double>(vol - inner) / static_cast<double>(vol);
}

}  // namespace rankspec
