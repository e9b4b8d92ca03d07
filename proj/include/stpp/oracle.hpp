#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "stpp/rng.hpp"

namespace stpp {

// Regularized logistic regression with heterogeneous synthetic data. The
// per-agent objective is
//   f_i(x) = (1/J) sum_j ln(1 + exp(-y_ij h_ij^T x)) + reg * sum_k x_k^2/(1+x_k^2).
struct LogisticData {
  int J = 0;
  double reg = 0.0;
  double sigma_h = 0.0;
  std::vector<Eigen::MatrixXd> features;  // one J x p block per agent
  std::vector<Eigen::VectorXd> labels;    // entries +-1
  int batch = 1;
};

// f_i(x) = 0.5 (x - b_i)^T A_i (x - b_i) with diagonal A_i; the stochastic
// oracle adds N(0, sigma^2/p I) noise so E||noise||^2 = sigma^2.
struct QuadraticData {
  std::vector<Eigen::VectorXd> curvature;  // diag(A_i)
  std::vector<Eigen::VectorXd> offset;     // b_i
  double sigma = 0.0;
};

struct ProblemInstance {
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  double smoothness = 0.0;                    // L
  std::optional<double> strong_convexity;     // mu, when known
  std::optional<Eigen::VectorXd> minimizer;   // x*, when known
  std::optional<double> optimal_value;        // f(x*), when known
  std::variant<LogisticData, QuadraticData> data;

  bool is_logistic() const { return std::holds_alternative<LogisticData>(data); }
  const LogisticData& logistic() const { return std::get<LogisticData>(data); }
  const QuadraticData& quadratic() const { return std::get<QuadraticData>(data); }
};

inline double stable_sigmoid(double m) {
  // 1 / (1 + exp(-m)) without overflow on either tail.
  if (m >= 0.0) {
    double e = std::exp(-m);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(m);
  return e / (1.0 + e);
}

inline double softplus(double z) {
  // ln(1 + exp(z)), stable for large |z|.
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

namespace detail {

inline Eigen::VectorXd gaussian_vector(RngStream& s, int p) {
  Eigen::VectorXd v(p);
  for (int k = 0; k < p; ++k) v(k) = s.gaussian();
  return v;
}

// Largest eigenvalue of (1/J) H^T H by power iteration, for the smoothness
// estimate of the data term.
inline double gram_top_eigenvalue(const Eigen::MatrixXd& h) {
  int p = static_cast<int>(h.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(p).normalized();
  double lam = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd u = h.transpose() * (h * v);
    double norm = u.norm();
    if (norm == 0.0) return 0.0;
    v = u / norm;
    double cur = v.dot(h.transpose() * (h * v));
    if (std::abs(cur - lam) <= 1e-12 * std::max(1.0, cur) && it > 8) return cur;
    lam = cur;
  }
  return lam;
}

}  // namespace detail

// Synthetic heterogeneous dataset: a shared ground truth x~, per-agent shifts
// x~_i = x~ + v_i with v_i ~ N(0, sigma_h^2 I), standard normal features, and
// labels drawn +1 with probability sigmoid(h^T x~_i).
inline ProblemInstance gen_logistic(int n, int p, int J, double reg,
                                    double sigma_h, std::uint64_t seed,
                                    int batch = 1) {
  if (n < 1 || p < 1 || J < 1) throw std::invalid_argument("gen_logistic: bad sizes");
  if (batch < 1 || batch > J) throw std::invalid_argument("gen_logistic: bad batch");
  ProblemInstance inst;
  inst.n = n;
  inst.p = p;
  inst.seed = seed;
  LogisticData d;
  d.J = J;
  d.reg = reg;
  d.sigma_h = sigma_h;
  d.batch = batch;
  RngStream common(seed, streams::kind(streams::common, 0), 0);
  Eigen::VectorXd ground = detail::gaussian_vector(common, p);
  double top = 0.0;
  for (int i = 1; i <= n; ++i) {
    RngStream het(seed, streams::kind(streams::hetero, i), 0);
    Eigen::VectorXd truth = ground + sigma_h * detail::gaussian_vector(het, p);
    RngStream feat(seed, streams::kind(streams::feature, i), 0);
    Eigen::MatrixXd h(J, p);
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < p; ++k) h(j, k) = feat.gaussian();
    RngStream coin(seed, streams::kind(streams::label, i), 0);
    Eigen::VectorXd y(J);
    for (int j = 0; j < J; ++j) {
      double pr = stable_sigmoid(h.row(j).dot(truth));
      y(j) = (coin.uniform() <= pr) ? 1.0 : -1.0;
    }
    top = std::max(top, detail::gram_top_eigenvalue(h) / J);
    d.features.push_back(std::move(h));
    d.labels.push_back(std::move(y));
  }
  inst.smoothness = top / 4.0 + 2.0 * reg;
  inst.data = std::move(d);
  return inst;
}

// Random quadratic family. Coordinate targets are spread linearly over
// [mu, L] and fixed as the exact average spectrum; heterogeneity in (0, 1]
// spreads both the per-agent curvatures (within [mu, L]) and the offsets b_i.
inline ProblemInstance gen_quadratic(int n, int p, double mu, double L,
                                     double heterogeneity, double sigma,
                                     std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_quadratic: bad sizes");
  if (!(mu > 0.0) || L < mu) throw std::invalid_argument("gen_quadratic: need 0 < mu <= L");
  if (p == 1 && mu != L)
    throw std::invalid_argument("gen_quadratic: p = 1 forces mu = L");
  ProblemInstance inst;
  inst.n = n;
  inst.p = p;
  inst.seed = seed;
  inst.smoothness = L;
  inst.strong_convexity = mu;
  QuadraticData d;
  d.sigma = sigma;
  Eigen::VectorXd target(p);
  for (int k = 0; k < p; ++k)
    target(k) = (p == 1) ? L : mu + (L - mu) * k / (p - 1);
  // Centered perturbations keep the average spectrum exactly on target.
  std::vector<Eigen::VectorXd> eps(n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    RngStream s(seed, streams::kind(streams::curvature, i + 1), 0);
    eps[i] = Eigen::VectorXd(p);
    for (int k = 0; k < p; ++k) eps[i](k) = 2.0 * s.uniform() - 1.0;
    mean += eps[i];
  }
  mean /= n;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a(p);
    for (int k = 0; k < p; ++k) {
      double margin = std::min(target(k) - mu, L - target(k));
      a(k) = target(k) + heterogeneity * 0.5 * margin * (eps[i](k) - mean(k));
    }
    d.curvature.push_back(std::move(a));
    RngStream s(seed, streams::kind(streams::offset, i + 1), 0);
    d.offset.push_back(heterogeneity * detail::gaussian_vector(s, p));
  }
  // Minimizer of the average: componentwise weighted mean of the offsets.
  Eigen::VectorXd num = Eigen::VectorXd::Zero(p), den = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    num += d.curvature[i].cwiseProduct(d.offset[i]);
    den += d.curvature[i];
  }
  Eigen::VectorXd xs = num.cwiseQuotient(den);
  double fs = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd r = xs - d.offset[i];
    fs += 0.5 * r.dot(d.curvature[i].cwiseProduct(r));
  }
  inst.minimizer = xs;
  inst.optimal_value = fs / n;
  inst.data = std::move(d);
  return inst;
}

// Hand-built quadratic instance for traces and unit checks.
inline ProblemInstance make_quadratic(std::vector<Eigen::VectorXd> curvature,
                                      std::vector<Eigen::VectorXd> offset,
                                      double sigma, std::uint64_t seed = 0) {
  if (curvature.empty() || curvature.size() != offset.size())
    throw std::invalid_argument("make_quadratic: inconsistent data");
  ProblemInstance inst;
  inst.n = static_cast<int>(curvature.size());
  inst.p = static_cast<int>(curvature[0].size());
  inst.seed = seed;
  QuadraticData d;
  d.sigma = sigma;
  d.curvature = std::move(curvature);
  d.offset = std::move(offset);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(inst.p), den = Eigen::VectorXd::Zero(inst.p);
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(inst.p);
  for (int i = 0; i < inst.n; ++i) {
    num += d.curvature[i].cwiseProduct(d.offset[i]);
    den += d.curvature[i];
    avg += d.curvature[i];
  }
  avg /= inst.n;
  lmax = avg.maxCoeff();
  lmin = avg.minCoeff();
  Eigen::VectorXd xs = num.cwiseQuotient(den);
  double fs = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    Eigen::VectorXd r = xs - d.offset[i];
    fs += 0.5 * r.dot(d.curvature[i].cwiseProduct(r));
  }
  inst.smoothness = lmax;
  if (lmin > 0.0) inst.strong_convexity = lmin;
  inst.minimizer = xs;
  inst.optimal_value = fs / inst.n;
  inst.data = std::move(d);
  return inst;
}

// Exact local gradient of f_i at x.
inline Eigen::VectorXd local_gradient(const ProblemInstance& inst, int agent,
                                      const Eigen::VectorXd& x) {
  if (agent < 1 || agent > inst.n) throw std::invalid_argument("agent out of range");
  if (inst.is_logistic()) {
    const auto& d = inst.logistic();
    const auto& h = d.features[agent - 1];
    const auto& y = d.labels[agent - 1];
    Eigen::VectorXd m = y.cwiseProduct(h * x);
    Eigen::VectorXd s(m.size());
    for (int j = 0; j < m.size(); ++j) s(j) = stable_sigmoid(-m(j));
    Eigen::VectorXd g = -(h.transpose() * y.cwiseProduct(s)) / d.J;
    for (int k = 0; k < inst.p; ++k) {
      double q = 1.0 + x(k) * x(k);
      g(k) += 2.0 * d.reg * x(k) / (q * q);
    }
    return g;
  }
  const auto& d = inst.quadratic();
  return d.curvature[agent - 1].cwiseProduct(x - d.offset[agent - 1]);
}

// Local objective value f_i(x).
inline double local_value(const ProblemInstance& inst, int agent,
                          const Eigen::VectorXd& x) {
  if (agent < 1 || agent > inst.n) throw std::invalid_argument("agent out of range");
  if (inst.is_logistic()) {
    const auto& d = inst.logistic();
    const auto& h = d.features[agent - 1];
    const auto& y = d.labels[agent - 1];
    Eigen::VectorXd m = y.cwiseProduct(h * x);
    double v = 0.0;
    for (int j = 0; j < m.size(); ++j) v += softplus(-m(j));
    v /= d.J;
    for (int k = 0; k < inst.p; ++k) v += d.reg * x(k) * x(k) / (1.0 + x(k) * x(k));
    return v;
  }
  const auto& d = inst.quadratic();
  Eigen::VectorXd r = x - d.offset[agent - 1];
  return 0.5 * r.dot(d.curvature[agent - 1].cwiseProduct(r));
}

// Gradient of the global average objective at x.
inline Eigen::VectorXd average_gradient(const ProblemInstance& inst,
                                        const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(inst.p);
  for (int i = 1; i <= inst.n; ++i) g += local_gradient(inst, i, x);
  return g / inst.n;
}

inline double average_value(const ProblemInstance& inst, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (int i = 1; i <= inst.n; ++i) v += local_value(inst, i, x);
  return v / inst.n;
}

// One stochastic gradient draw for an agent. The draw is keyed by
// (instance seed, agent, iter): the iteration index of the point being
// evaluated, never the call order, fixes the sample.
inline Eigen::VectorXd stochastic_gradient(const ProblemInstance& inst, int agent,
                                           const Eigen::VectorXd& x,
                                           std::uint64_t iter) {
  if (agent < 1 || agent > inst.n) throw std::invalid_argument("agent out of range");
  RngStream s(inst.seed, streams::kind(streams::gradient, agent), iter);
  if (inst.is_logistic()) {
    const auto& d = inst.logistic();
    if (d.batch == d.J) return local_gradient(inst, agent, x);  // full batch
    const auto& h = d.features[agent - 1];
    const auto& y = d.labels[agent - 1];
    Eigen::VectorXd g = Eigen::VectorXd::Zero(inst.p);
    for (int b = 0; b < d.batch; ++b) {
      int j = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(d.J));
      double m = y(j) * h.row(j).dot(x);
      g -= y(j) * stable_sigmoid(-m) * h.row(j).transpose();
    }
    g /= d.batch;
    for (int k = 0; k < inst.p; ++k) {
      double q = 1.0 + x(k) * x(k);
      g(k) += 2.0 * d.reg * x(k) / (q * q);
    }
    return g;
  }
  const auto& d = inst.quadratic();
  Eigen::VectorXd g = d.curvature[agent - 1].cwiseProduct(x - d.offset[agent - 1]);
  if (d.sigma > 0.0) {
    double scale = d.sigma / std::sqrt(static_cast<double>(inst.p));
    for (int k = 0; k < inst.p; ++k) g(k) += scale * s.gaussian();
  }
  return g;
}

// Stacked stochastic gradients for all agents at their own rows of X.
inline Eigen::MatrixXd sample_gradients(const ProblemInstance& inst,
                                        const Eigen::MatrixXd& x,
                                        std::uint64_t iter) {
  Eigen::MatrixXd g(inst.n, inst.p);
  for (int i = 1; i <= inst.n; ++i)
    g.row(i - 1) = stochastic_gradient(inst, i, x.row(i - 1).transpose(), iter);
  return g;
}

// Stacked exact gradients, row i at row i of X.
inline Eigen::MatrixXd full_gradients(const ProblemInstance& inst,
                                      const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g(inst.n, inst.p);
  for (int i = 1; i <= inst.n; ++i)
    g.row(i - 1) = local_gradient(inst, i, x.row(i - 1).transpose());
  return g;
}

}  // namespace stpp
