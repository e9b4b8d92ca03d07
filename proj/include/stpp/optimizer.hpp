#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stpp/mixing.hpp"
#include "stpp/oracle.hpp"

namespace stpp {

// Shared iterate block for all algorithms. X always holds the iterates an
// observer would read off (de-biased for the push-sum family). The biased
// block and the mass vector exist only for the push-sum family, the tracker
// Y and the last gradient only for the tracking family.
struct SwarmState {
  Eigen::MatrixXd x;        // n x p iterates
  Eigen::MatrixXd y;        // gradient tracker
  Eigen::MatrixXd g_prev;   // gradients consumed by the current tracker
  Eigen::MatrixXd biased;   // push-sum numerator
  Eigen::VectorXd mass;     // push-sum weights
  std::int64_t t = 0;       // iterations completed
};

namespace detail {

// out.row(i) = sum_j w(i,j) * (x.row(j) - gamma * v.row(j)), accumulated in
// ascending j. Every algorithm's combine goes through this one loop so that
// degenerate cases (n = 1, 0/1 weights) agree bit for bit across algorithms.
inline Eigen::MatrixXd combine_rows(const Eigen::MatrixXd& w,
                                    const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& v, double gamma) {
  int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double wij = w(i, j);
      if (wij == 0.0) continue;
      for (int k = 0; k < p; ++k) out(i, k) += wij * (x(j, k) - gamma * v(j, k));
    }
  return out;
}

// out.row(i) = sum_j w(i,j) * y.row(j), ascending j.
inline Eigen::MatrixXd mix_rows(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y) {
  int n = static_cast<int>(y.rows()), p = static_cast<int>(y.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double wij = w(i, j);
      if (wij == 0.0) continue;
      for (int k = 0; k < p; ++k) out(i, k) += wij * y(j, k);
    }
  return out;
}

inline Eigen::VectorXd mix_vec(const Eigen::MatrixXd& w, const Eigen::VectorXd& v) {
  int n = static_cast<int>(v.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) out(i) += w(i, j) * v(j);
  return out;
}

// Tracker recursion y' = mixed - g_prev + g_new. The stale gradient is
// cancelled before the fresh one is added, so a mixed tracker that still
// equals g_prev bit for bit (the n = 1 case) hands back exactly g_new.
inline Eigen::MatrixXd tracker_update(const Eigen::MatrixXd& mixed,
                                      const Eigen::MatrixXd& g_prev,
                                      const Eigen::MatrixXd& g_new) {
  int n = static_cast<int>(mixed.rows()), p = static_cast<int>(mixed.cols());
  Eigen::MatrixXd out(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k)
      out(i, k) = (mixed(i, k) - g_prev(i, k)) + g_new(i, k);
  return out;
}

inline void require_kind(const MixingMatrix& m, Stochasticity want, const char* who) {
  if (m.kind != want) throw std::invalid_argument(std::string(who) + ": wrong mixing matrix kind");
}

}  // namespace detail

// Index form of the tree matrices: where each row pulls from, and which rows
// push into each node. Lets the tree algorithms run on O(n) memory traffic
// per iteration instead of a dense multiply.
struct TreeGather {
  std::vector<int> pull_from;             // 0-based source row per row
  std::vector<std::vector<int>> push_in;  // 0-based pushing rows per row, ascending
};

inline TreeGather make_gather(const MixingMatrix& r, const MixingMatrix& c) {
  int n = r.size();
  if (c.size() != n) throw std::invalid_argument("make_gather: size mismatch");
  TreeGather g;
  g.pull_from.assign(n, -1);
  g.push_in.assign(n, {});
  for (int i = 0; i < n; ++i) {
    int hits = 0;
    for (int j = 0; j < n; ++j) {
      double v = r.w(i, j);
      if (v == 1.0) {
        g.pull_from[i] = j;
        ++hits;
      } else if (v != 0.0) {
        throw std::invalid_argument("make_gather: pull matrix entry not 0/1");
      }
    }
    if (hits != 1) throw std::invalid_argument("make_gather: pull row needs exactly one 1");
  }
  std::vector<int> col_hits(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double v = c.w(i, j);
      if (v == 1.0) {
        g.push_in[i].push_back(j);
        ++col_hits[j];
      } else if (v != 0.0) {
        throw std::invalid_argument("make_gather: push matrix entry not 0/1");
      }
    }
  for (int j = 0; j < n; ++j)
    if (col_hits[j] != 1)
      throw std::invalid_argument("make_gather: push column needs exactly one 1");
  for (auto& lst : g.push_in) std::sort(lst.begin(), lst.end());
  return g;
}

// All agents start from the same point; the tracker starts as the first
// gradient sample, taken at iteration index 0.
inline SwarmState tracking_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  if (x0.size() != inst.p) throw std::invalid_argument("init: x0 dimension mismatch");
  SwarmState s;
  s.x = x0.transpose().replicate(inst.n, 1);
  s.g_prev = sample_gradients(inst, s.x, 0);
  s.y = s.g_prev;
  s.t = 0;
  return s;
}

inline SwarmState stpp_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  return tracking_init(inst, x0);
}

inline SwarmState dsgt_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  return tracking_init(inst, x0);
}

inline SwarmState dsgd_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  if (x0.size() != inst.p) throw std::invalid_argument("init: x0 dimension mismatch");
  SwarmState s;
  s.x = x0.transpose().replicate(inst.n, 1);
  s.t = 0;
  return s;
}

inline SwarmState sgp_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  SwarmState s = dsgd_init(inst, x0);
  s.biased = s.x;
  s.mass = Eigen::VectorXd::Ones(inst.n);
  return s;
}

inline SwarmState pushdiging_init(const ProblemInstance& inst, const Eigen::VectorXd& x0) {
  SwarmState s = tracking_init(inst, x0);
  s.biased = s.x;
  s.mass = Eigen::VectorXd::Ones(inst.n);
  return s;
}

namespace detail {

inline void debias(const Eigen::MatrixXd& biased, const Eigen::VectorXd& mass,
                   Eigen::MatrixXd& x) {
  int n = static_cast<int>(biased.rows()), p = static_cast<int>(biased.cols());
  for (int i = 0; i < n; ++i) {
    double wi = mass(i);
    if (!(wi > 0.0) || !std::isfinite(wi))
      throw std::runtime_error("push-sum mass must stay positive");
    for (int k = 0; k < p; ++k) x(i, k) = biased(i, k) / wi;
  }
}

}  // namespace detail

// One tree push-pull iteration:
//   x_i'  <- x_s - gamma * y_s     with s the node row i pulls from
//   g_i'  <- fresh sample at x_i'  (iteration index t + 1)
//   y_i'  <- sum of pushed-in trackers - g_i + g_i'
inline void stpp_step(SwarmState& s, const TreeGather& g, double gamma,
                      const ProblemInstance& inst) {
  int n = static_cast<int>(s.x.rows()), p = static_cast<int>(s.x.cols());
  Eigen::MatrixXd xn(n, p), mixed = Eigen::MatrixXd::Zero(n, p);
  for (int i = 0; i < n; ++i) {
    int src = g.pull_from[i];
    for (int k = 0; k < p; ++k) xn(i, k) = s.x(src, k) - gamma * s.y(src, k);
  }
  for (int i = 0; i < n; ++i)
    for (int j : g.push_in[i])
      for (int k = 0; k < p; ++k) mixed(i, k) += s.y(j, k);
  Eigen::MatrixXd gn = sample_gradients(inst, xn, static_cast<std::uint64_t>(s.t) + 1);
  s.y = detail::tracker_update(mixed, s.g_prev, gn);
  s.x = std::move(xn);
  s.g_prev = std::move(gn);
  s.t += 1;
}

inline void stpp_step(SwarmState& s, const MixingMatrix& r, const MixingMatrix& c,
                      double gamma, const ProblemInstance& inst) {
  stpp_step(s, make_gather(r, c), gamma, inst);
}

// Dense reference path for the same iteration, kept for cross-checking the
// gather form: x' = R (x - gamma y), y' = C y - g + g'.
inline void stpp_step_dense(SwarmState& s, const MixingMatrix& r,
                            const MixingMatrix& c, double gamma,
                            const ProblemInstance& inst) {
  detail::require_kind(r, Stochasticity::row, "stpp_step_dense");
  detail::require_kind(c, Stochasticity::column, "stpp_step_dense");
  Eigen::MatrixXd xn = detail::combine_rows(r.w, s.x, s.y, gamma);
  Eigen::MatrixXd mixed = detail::mix_rows(c.w, s.y);
  Eigen::MatrixXd gn = sample_gradients(inst, xn, static_cast<std::uint64_t>(s.t) + 1);
  s.y = detail::tracker_update(mixed, s.g_prev, gn);
  s.x = std::move(xn);
  s.g_prev = std::move(gn);
  s.t += 1;
}

// Decentralized SGD: x' = W (x - gamma g). Accepts a row-stochastic matrix
// as a fallback on graphs that admit no doubly stochastic weights; the
// resulting fixed-point bias is the caller's concern.
inline void dsgd_step(SwarmState& s, const MixingMatrix& w, double gamma,
                      const ProblemInstance& inst) {
  if (w.kind == Stochasticity::column)
    throw std::invalid_argument("dsgd_step: need row or doubly stochastic weights");
  Eigen::MatrixXd g = sample_gradients(inst, s.x, static_cast<std::uint64_t>(s.t));
  s.x = detail::combine_rows(w.w, s.x, g, gamma);
  s.t += 1;
}

// Decentralized SGD with gradient tracking: x' = W (x - gamma y),
// y' = W y - g + g'.
inline void dsgt_step(SwarmState& s, const MixingMatrix& w, double gamma,
                      const ProblemInstance& inst) {
  detail::require_kind(w, Stochasticity::doubly, "dsgt_step");
  Eigen::MatrixXd xn = detail::combine_rows(w.w, s.x, s.y, gamma);
  Eigen::MatrixXd mixed = detail::mix_rows(w.w, s.y);
  Eigen::MatrixXd gn = sample_gradients(inst, xn, static_cast<std::uint64_t>(s.t) + 1);
  s.y = detail::tracker_update(mixed, s.g_prev, gn);
  s.x = std::move(xn);
  s.g_prev = std::move(gn);
  s.t += 1;
}

// Stochastic gradient push: z' = A (z - gamma g(x)), mass' = A mass,
// x' = z' / mass' rowwise. Gradients are evaluated at the de-biased x.
inline void sgp_step(SwarmState& s, const MixingMatrix& a, double gamma,
                     const ProblemInstance& inst) {
  detail::require_kind(a, Stochasticity::column, "sgp_step");
  Eigen::MatrixXd g = sample_gradients(inst, s.x, static_cast<std::uint64_t>(s.t));
  s.biased = detail::combine_rows(a.w, s.biased, g, gamma);
  s.mass = detail::mix_vec(a.w, s.mass);
  detail::debias(s.biased, s.mass, s.x);
  s.t += 1;
}

// Push-DIGing: u' = A (u - gamma y), mass' = A mass, x' = u' / mass',
// y' = A y - g + g' with g' sampled at the new de-biased iterates.
inline void pushdiging_step(SwarmState& s, const MixingMatrix& a, double gamma,
                            const ProblemInstance& inst) {
  detail::require_kind(a, Stochasticity::column, "pushdiging_step");
  s.biased = detail::combine_rows(a.w, s.biased, s.y, gamma);
  s.mass = detail::mix_vec(a.w, s.mass);
  detail::debias(s.biased, s.mass, s.x);
  Eigen::MatrixXd mixed = detail::mix_rows(a.w, s.y);
  Eigen::MatrixXd gn = sample_gradients(inst, s.x, static_cast<std::uint64_t>(s.t) + 1);
  s.y = detail::tracker_update(mixed, s.g_prev, gn);
  s.g_prev = std::move(gn);
  s.t += 1;
}

// Observables evaluated at the root row:
//   grad_norm_sq: || grad f(x_root) ||^2 with the exact average gradient
//   consensus:    sum_i || x_i - x_root ||^2
//   opt_gap:      || x_root - x* ||^2 when the minimizer is known
//   fval_gap:     f(x_root) - f*      when the optimal value is known
struct MetricRow {
  double grad_norm_sq = 0.0;
  double consensus = 0.0;
  std::optional<double> opt_gap;
  std::optional<double> fval_gap;
};

inline MetricRow metrics(const SwarmState& s, const ProblemInstance& inst, int root = 1) {
  MetricRow m;
  Eigen::VectorXd xr = s.x.row(root - 1).transpose();
  m.grad_norm_sq = average_gradient(inst, xr).squaredNorm();
  m.consensus = (s.x.rowwise() - xr.transpose()).squaredNorm();
  if (inst.minimizer) m.opt_gap = (xr - *inst.minimizer).squaredNorm();
  if (inst.optimal_value) m.fval_gap = average_value(inst, xr) - *inst.optimal_value;
  return m;
}

}  // namespace stpp
