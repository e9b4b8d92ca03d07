#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stpp/tree.hpp"

namespace stpp {

// Tree quantities the rate statements consume: the two tree diameters and
// the averaged residual counts of each tree.
struct TreeSummary {
  int d_pull = 0;
  int d_push = 0;
  double r_avg = 0.0;  // pull tree
  double c_avg = 0.0;  // push tree

  int d_max() const { return std::max(d_pull, d_push); }
};

inline TreeSummary summarize(const TreeStats& pull, const TreeStats& push) {
  return {pull.diameter, push.diameter, pull.avg, push.avg};
}

struct StepsizeBranch {
  std::string name;
  double value = 0.0;
};

struct StepsizeRule {
  std::vector<StepsizeBranch> branches;
  double gamma = 0.0;  // min over branches
};

// Smooth nonconvex stepsize rule:
//   gamma = min( 1 / (100 n sqrt(dR dC r c) L),
//                (df / (5 n L s^2 (T+1)))^(1/2),
//                (df / (300 n^2 dC r c L s^2 (T+1)))^(1/3) ).
inline StepsizeRule stepsize_nonconvex(const TreeSummary& ts, int n, double L,
                                       double sigma_sq, double delta_f,
                                       long long T) {
  if (n < 1 || !(L > 0.0) || delta_f < 0.0 || sigma_sq < 0.0 || T < 0)
    throw std::invalid_argument("stepsize_nonconvex: bad inputs");
  StepsizeRule r;
  double trees = static_cast<double>(ts.d_pull) * ts.d_push * ts.r_avg * ts.c_avg;
  double b1 = 1.0 / (100.0 * n * std::sqrt(trees) * L);
  r.branches.push_back({"stability", b1});
  double horizon = static_cast<double>(T) + 1.0;
  if (sigma_sq > 0.0) {
    double b2 = std::sqrt(delta_f / (5.0 * n * L * sigma_sq * horizon));
    double b3 = std::cbrt(delta_f / (300.0 * n * n * ts.d_push * ts.r_avg *
                                     ts.c_avg * L * sigma_sq * horizon));
    r.branches.push_back({"noise", b2});
    r.branches.push_back({"drift", b3});
  }
  r.gamma = b1;
  for (const auto& b : r.branches) r.gamma = std::min(r.gamma, b.value);
  return r;
}

// Strongly convex stepsize rule:
//   gamma = min( 16 log(n (T+1)) / (n mu (T+1)),
//                1 / (1000 n max(dR, dC) r c kappa L) ).
inline StepsizeRule stepsize_convex(const TreeSummary& ts, int n, double L,
                                    double mu, long long T) {
  if (n < 1 || !(L > 0.0) || !(mu > 0.0) || mu > L || T < 0)
    throw std::invalid_argument("stepsize_convex: bad inputs");
  StepsizeRule r;
  double horizon = static_cast<double>(T) + 1.0;
  double kappa = L / mu;
  double b1 = 16.0 * std::log(n * horizon) / (n * mu * horizon);
  double b2 = 1.0 / (1000.0 * n * ts.d_max() * ts.r_avg * ts.c_avg * kappa * L);
  r.branches.push_back({"horizon", b1});
  r.branches.push_back({"stability", b2});
  r.gamma = std::min(b1, b2);
  return r;
}

// Predicted length of the transient phase before the 1/(n T) (nonconvex) or
// network-independent (strongly convex) regime takes over.
inline double transient_bound(const TreeSummary& ts, int n, bool strongly_convex) {
  double m = static_cast<double>(ts.d_max()) * ts.r_avg * ts.c_avg;
  if (strongly_convex) return m;
  return static_cast<double>(n) * m * m;
}

// Least-squares slope of log(y) against log(x); the empirical growth
// exponent used to compare transient predictions across network sizes.
inline double loglog_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("loglog_slope: need matching series, >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = static_cast<int>(xs.size());
  for (int i = 0; i < m; ++i) {
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace stpp
