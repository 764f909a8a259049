#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankspec/lattice.hpp"

namespace rankspec {

/// Simple undirected graph on vertices 0..n-1.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, insertion order
  std::vector<std::vector<int>> adj;

  static Graph empty(int vertices) {
    if (vertices < 0) throw std::invalid_argument("Graph: negative vertex count");
    Graph g;
    g.n = vertices;
    g.adj.resize(static_cast<std::size_t>(vertices));
    return g;
  }

  bool has_edge(int u, int v) const {
    const auto& nb = adj[static_cast<std::size_t>(u)];
    return std::find(nb.begin(), nb.end(), v) != nb.end();
  }

  void add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::out_of_range("Graph: vertex out of range");
    if (u == v) throw std::invalid_argument("Graph: self loop");
    if (has_edge(u, v)) throw std::invalid_argument("Graph: duplicate edge");
    edges.emplace_back(std::min(u, v), std::max(u, v));
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }

  int degree(int v) const { return static_cast<int>(adj[static_cast<std::size_t>(v)].size()); }
};

inline Graph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g = Graph::empty(n);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

inline Graph graph_of(const RegionGraph& rg) {
  Graph g = Graph::empty(static_cast<int>(rg.vertex_count()));
  for (const auto& [u, v] : rg.edges) g.add_edge(u, v);
  return g;
}

/// Distances from source up to `radius` (-1 beyond), breadth-first.
inline std::vector<int> distances_within(const Graph& g, int source, int radius) {
  std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
  dist[static_cast<std::size_t>(source)] = 0;
  std::queue<int> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    if (dist[static_cast<std::size_t>(v)] >= radius) continue;
    for (int u : g.adj[static_cast<std::size_t>(v)])
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        frontier.push(u);
      }
  }
  return dist;
}

}  // namespace rankspec
