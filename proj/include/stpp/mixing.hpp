#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stpp/graph.hpp"
#include "stpp/tree.hpp"

namespace stpp {

enum class Stochasticity { row, column, doubly };

// Dense mixing matrix. The tree-derived matrices contain only exact 0/1
// entries; the weighted baselines carry general nonnegative entries.
struct MixingMatrix {
  Eigen::MatrixXd w;
  Stochasticity kind = Stochasticity::row;

  int size() const { return static_cast<int>(w.rows()); }
};

// Row-stochastic pull matrix: row i selects the parent of i, and the root
// row selects the root itself. Every row holds exactly one 1.
inline MixingMatrix build_pull_matrix(const SpanningTree& t) {
  if (t.kind != TreeKind::pull)
    throw std::invalid_argument("build_pull_matrix: expected a pull tree");
  MixingMatrix m;
  m.w = Eigen::MatrixXd::Zero(t.n, t.n);
  m.kind = Stochasticity::row;
  for (int i = 1; i <= t.n; ++i) {
    int src = (i == t.root) ? t.root : t.link[i];
    m.w(i - 1, src - 1) = 1.0;
  }
  return m;
}

// Column-stochastic push matrix: column j selects the unique child of j, and
// the root column selects the root itself. Every column holds exactly one 1.
inline MixingMatrix build_push_matrix(const SpanningTree& t) {
  if (t.kind != TreeKind::push)
    throw std::invalid_argument("build_push_matrix: expected a push tree");
  MixingMatrix m;
  m.w = Eigen::MatrixXd::Zero(t.n, t.n);
  m.kind = Stochasticity::column;
  for (int j = 1; j <= t.n; ++j) {
    int dst = (j == t.root) ? t.root : t.link[j];
    m.w(dst - 1, j - 1) = 1.0;
  }
  return m;
}

// Predicted k-th power of a tree mixing matrix, assembled from tree walks
// alone (no matrix product). For a pull tree with matrix R:
//   column root of R^k marks the nodes within depth k;
//   column j != root marks the nodes exactly k links below j.
// The push matrix is handled by the same construction on its child links,
// transposed at the end.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>
indicator_power(const SpanningTree& t, int k) {
  if (k < 1) throw std::invalid_argument("indicator_power: need k >= 1");
  using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
  IMat z = IMat::Zero(t.n, t.n);
  for (int i = 1; i <= t.n; ++i) {
    if (t.depth[i] <= k) {
      z(i - 1, t.root - 1) = 1;  // absorbed by the root within k steps
    } else {
      int a = i;
      for (int s = 0; s < k; ++s) a = t.link[a];
      z(i - 1, a - 1) = 1;  // still k links away from its level-k ancestor
    }
  }
  if (t.kind == TreeKind::push) return z.transpose().eval();
  return z;
}

// Left and right Perron vectors of the tree matrices: both are the indicator
// of the root. Verified against the fixed-point equations before returning.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> stationary_vectors(
    const MixingMatrix& r, const MixingMatrix& c, int root) {
  int n = r.size();
  if (c.size() != n) throw std::invalid_argument("stationary_vectors: size mismatch");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(root - 1) = 1.0;
  if (((e.transpose() * r.w).transpose() - e).cwiseAbs().maxCoeff() != 0.0)
    throw std::logic_error("stationary_vectors: pull fixed point failed");
  if ((c.w * e - e).cwiseAbs().maxCoeff() != 0.0)
    throw std::logic_error("stationary_vectors: push fixed point failed");
  return {e, e};
}

// Largest singular value by power iteration on A^T A. Deterministic start,
// a few restarts to dodge unlucky orthogonal initializations.
inline double spectral_norm(const Eigen::MatrixXd& a) {
  int n = static_cast<int>(a.cols());
  if (a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  double best = 0.0;
  for (int restart = 0; restart < 3; ++restart) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i)
      v(i) += 0.25 * std::sin(1.0 + 0.7 * i + 2.3 * restart);
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < 5000; ++it) {
      Eigen::VectorXd u = a.transpose() * (a * v);
      double norm = u.norm();
      if (norm == 0.0) break;
      v = u / norm;
      double cur = (a * v).norm();
      if (std::abs(cur - prev) <= 1e-14 * std::max(1.0, cur) && it > 8) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    best = std::max(best, prev);
  }
  return best;
}

// || M^k - limit ||_2 where limit is the rank-one Cesaro limit of the tree
// matrix: ones * e_root^T for a pull matrix, e_root * ones^T for a push one.
inline double spectral_norm_defect(const SpanningTree& t, int k) {
  if (k < 1) throw std::invalid_argument("spectral_norm_defect: need k >= 1");
  Eigen::MatrixXd mk = indicator_power(t, k).cast<double>();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(t.n);
  e(t.root - 1) = 1.0;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(t.n);
  Eigen::MatrixXd limit = (t.kind == TreeKind::pull)
                              ? (ones * e.transpose()).eval()
                              : (e * ones.transpose()).eval();
  return spectral_norm(mk - limit);
}

// Metropolis weights for a bidirected graph: for each undirected edge {i, j},
// w_ij = 1 / (1 + max(deg_i, deg_j)); the diagonal absorbs the slack.
inline MixingMatrix metropolis_weights(const DirectedGraph& g) {
  int n = g.size();
  for (auto [u, v] : g.edges())
    if (!g.has_edge(v, u))
      throw std::invalid_argument("metropolis: graph must be bidirected");
  MixingMatrix m;
  m.w = Eigen::MatrixXd::Zero(n, n);
  m.kind = Stochasticity::doubly;
  for (int i = 1; i <= n; ++i) {
    double slack = 1.0;
    for (int j : g.out_neighbors(i)) {
      int di = static_cast<int>(g.out_neighbors(i).size());
      int dj = static_cast<int>(g.out_neighbors(j).size());
      double w = 1.0 / (1.0 + std::max(di, dj));
      m.w(i - 1, j - 1) = w;
      slack -= w;
    }
    m.w(i - 1, i - 1) = slack;
  }
  return m;
}

// Column-stochastic weights: each node splits mass uniformly over itself and
// its out-neighbors.
inline MixingMatrix uniform_column_weights(const DirectedGraph& g) {
  int n = g.size();
  MixingMatrix m;
  m.w = Eigen::MatrixXd::Zero(n, n);
  m.kind = Stochasticity::column;
  for (int j = 1; j <= n; ++j) {
    double w = 1.0 / (1.0 + g.out_neighbors(j).size());
    m.w(j - 1, j - 1) = w;
    for (int i : g.out_neighbors(j)) m.w(i - 1, j - 1) = w;
  }
  return m;
}

// Row-stochastic weights: each node averages uniformly over itself and its
// in-neighbors.
inline MixingMatrix uniform_row_weights(const DirectedGraph& g) {
  int n = g.size();
  MixingMatrix m;
  m.w = Eigen::MatrixXd::Zero(n, n);
  m.kind = Stochasticity::row;
  for (int i = 1; i <= n; ++i) {
    double w = 1.0 / (1.0 + g.in_neighbors(i).size());
    m.w(i - 1, i - 1) = w;
    for (int j : g.in_neighbors(i)) m.w(i - 1, j - 1) = w;
  }
  return m;
}

// Matrix Market coordinate output (1-based indices, general real).
inline void write_matrix_market(const Eigen::MatrixXd& a, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::vector<std::tuple<int, int, double>> nz;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i)
      if (a(i, j) != 0.0) nz.push_back({i + 1, j + 1, a(i, j)});
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << a.rows() << " " << a.cols() << " " << nz.size() << "\n";
  char buf[64];
  for (auto [i, j, v] : nz) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i, j, v);
    f << buf;
  }
}

}  // namespace stpp
