#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "stpp/graph.hpp"
#include "stpp/rng.hpp"

namespace testutil {

using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Random strongly connected digraph: a permutation cycle plus extra edges.
inline stpp::DirectedGraph random_strong_digraph(std::uint64_t seed, int max_n = 32) {
  stpp::RngStream s(seed, 0xd16, 0);
  int n = 2 + static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(max_n - 1));
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({perm[i], perm[(i + 1) % n]});
  int extras = n;  // on average one extra out-edge per node
  for (int e = 0; e < extras; ++e) {
    int u = 1 + static_cast<int>(s.next_u64() % n);
    int v = 1 + static_cast<int>(s.next_u64() % n);
    if (u != v) edges.push_back({u, v});
  }
  return stpp::DirectedGraph(n, std::move(edges));
}

inline IMat int_matrix(const Eigen::MatrixXd& a) {
  IMat m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = static_cast<std::int64_t>(a(i, j));
  return m;
}

// All-pairs shortest path lengths; -1 when unreachable.
inline std::vector<std::vector<int>> floyd_warshall(const stpp::DirectedGraph& g) {
  int n = g.size();
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(n + 1, inf));
  for (int i = 1; i <= n; ++i) d[i][i] = 0;
  for (auto [u, v] : g.edges()) d[u][v] = 1;
  for (int k = 1; k <= n; ++k)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (d[i][j] >= inf) d[i][j] = -1;
  return d;
}

}  // namespace testutil
