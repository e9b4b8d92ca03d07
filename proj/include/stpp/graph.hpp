#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stpp {

// Simple directed graph on nodes 1..n. Edges are stored once, sorted, and
// adjacency in both directions is kept so tree extraction can walk either
// orientation.
class DirectedGraph {
 public:
  DirectedGraph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n < 1) throw std::invalid_argument("graph: need at least one node");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [u, v] : edges) {
      if (u < 1 || u > n || v < 1 || v > n)
        throw std::invalid_argument("graph: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("graph: self loop");
    }
    edges_ = std::move(edges);
    out_.assign(n + 1, {});
    in_.assign(n + 1, {});
    for (auto [u, v] : edges_) {
      out_[u].push_back(v);
      in_[v].push_back(u);
    }
    for (int i = 1; i <= n; ++i) {
      std::sort(out_[i].begin(), out_[i].end());
      std::sort(in_[i].begin(), in_[i].end());
    }
  }

  int size() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& out_neighbors(int u) const { return out_.at(u); }
  const std::vector<int>& in_neighbors(int u) const { return in_.at(u); }
  bool has_edge(int u, int v) const {
    const auto& o = out_.at(u);
    return std::binary_search(o.begin(), o.end(), v);
  }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> out_, in_;
};

// BFS distances from root following out-edges (or in-edges when reversed).
// Unreachable nodes get -1.
inline std::vector<int> bfs_distances(const DirectedGraph& g, int root,
                                      bool reversed = false) {
  if (root < 1 || root > g.size())
    throw std::invalid_argument("bfs: root out of range");
  std::vector<int> dist(g.size() + 1, -1);
  dist[root] = 0;
  std::vector<int> frontier{root};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier) {
      const auto& nbrs = reversed ? g.in_neighbors(u) : g.out_neighbors(u);
      for (int v : nbrs) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

inline bool check_strongly_connected(const DirectedGraph& g) {
  auto fwd = bfs_distances(g, 1, false);
  auto bwd = bfs_distances(g, 1, true);
  for (int i = 1; i <= g.size(); ++i)
    if (fwd[i] < 0 || bwd[i] < 0) return false;
  return true;
}

// Directed cycle 1 -> 2 -> ... -> n -> 1.
inline DirectedGraph gen_directed_ring(int n) {
  if (n < 2) throw std::invalid_argument("directed ring: need n >= 2");
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= n; ++i) e.push_back({i, i % n + 1});
  return DirectedGraph(n, std::move(e));
}

// Bidirected cycle: both orientations of every ring edge.
inline DirectedGraph gen_ring(int n) {
  if (n < 3) throw std::invalid_argument("ring: need n >= 3");
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= n; ++i) {
    int j = i % n + 1;
    e.push_back({i, j});
    e.push_back({j, i});
  }
  return DirectedGraph(n, std::move(e));
}

// Bidirected lattice without wraparound, nodes numbered row-major.
inline DirectedGraph gen_grid(int rows, int cols) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid: need rows, cols >= 2");
  auto id = [cols](int r, int c) { return r * cols + c + 1; };
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        e.push_back({id(r, c), id(r, c + 1)});
        e.push_back({id(r, c + 1), id(r, c)});
      }
      if (r + 1 < rows) {
        e.push_back({id(r, c), id(r + 1, c)});
        e.push_back({id(r + 1, c), id(r, c)});
      }
    }
  return DirectedGraph(rows * cols, std::move(e));
}

// Most-square factorization n = rows * cols with rows <= cols.
inline std::pair<int, int> grid_dims(int n) {
  int best = 1;
  for (int r = 1; r * r <= n; ++r)
    if (n % r == 0) best = r;
  return {best, n / best};
}

// Every node links to the nodes 2^j steps ahead around the cycle,
// j = 0 .. ceil(log2 n) - 1.
inline DirectedGraph gen_static_exponential(int n) {
  if (n < 2) throw std::invalid_argument("static exponential: need n >= 2");
  int levels = static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= n; ++i) {
    for (int j = 0; j < levels; ++j) {
      std::int64_t off = std::int64_t(1) << j;
      int v = static_cast<int>((i - 1 + off) % n) + 1;
      if (v != i) e.push_back({i, v});
    }
  }
  return DirectedGraph(n, std::move(e));
}

// m directed cycles that all pass through node 1. Nodes 2..n are split into
// m contiguous blocks of near-equal size, one block per cycle.
inline DirectedGraph gen_multi_subring(int n, int m) {
  if (m < 1) throw std::invalid_argument("multi subring: need m >= 1");
  if (n < 2 * m + 1)
    throw std::invalid_argument("multi subring: need n >= 2m + 1");
  std::vector<std::pair<int, int>> e;
  int rest = n - 1;
  int base = rest / m, extra = rest % m;
  int cur = 2;
  for (int b = 0; b < m; ++b) {
    int len = base + (b < extra ? 1 : 0);
    int first = cur, last = cur + len - 1;
    e.push_back({1, first});
    for (int v = first; v < last; ++v) e.push_back({v, v + 1});
    e.push_back({last, 1});
    cur = last + 1;
  }
  return DirectedGraph(n, std::move(e));
}

struct TopologySpec {
  std::string family;  // di-ring | ring | grid | static-exp | multi-subring
  int n = 0;
  int m = 2;       // multi-subring cycle count
  int rows = 0;    // grid shape; 0 means factorize n
  int cols = 0;
};

inline DirectedGraph build_topology(const TopologySpec& s) {
  if (s.family == "di-ring") return gen_directed_ring(s.n);
  if (s.family == "ring") return gen_ring(s.n);
  if (s.family == "grid") {
    int r = s.rows, c = s.cols;
    if (r <= 0 || c <= 0) {
      auto [rr, cc] = grid_dims(s.n);
      r = rr;
      c = cc;
    }
    return gen_grid(r, c);
  }
  if (s.family == "static-exp") return gen_static_exponential(s.n);
  if (s.family == "multi-subring") return gen_multi_subring(s.n, s.m);
  throw std::invalid_argument("unknown topology family: " + s.family);
}

}  // namespace stpp
