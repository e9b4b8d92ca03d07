#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stpp/graph.hpp"
#include "stpp/mixing.hpp"
#include "stpp/optimizer.hpp"
#include "stpp/oracle.hpp"
#include "stpp/theory.hpp"
#include "stpp/tree.hpp"

namespace stpp {

using json = nlohmann::json;

// gamma * factor^floor(t / period); a constant schedule is factor = 1.
struct Schedule {
  std::string kind = "constant";  // constant | decay
  double factor = 1.0;
  int period = 1;

  double value(double base, long long t) const {
    if (kind == "constant") return base;
    if (kind != "decay") throw std::invalid_argument("schedule: unknown kind " + kind);
    long long e = t / period;
    double v = base;
    for (long long i = 0; i < e; ++i) v *= factor;
    return v;
  }
};

struct ProblemSpec {
  std::string family = "quadratic";  // logistic | quadratic
  std::uint64_t seed = 1;
  int p = 10;
  // logistic
  int J = 100;
  double reg = 0.01;
  double sigma_h = 0.2;
  int batch = 1;
  // quadratic
  double mu = 0.1;
  double L = 1.0;
  double heterogeneity = 1.0;
  double sigma = 0.0;
};

struct ExperimentConfig {
  TopologySpec topology{"di-ring", 8};
  int root = 1;
  ProblemSpec problem;
  std::string algorithm = "stpp";  // stpp | dsgd | dsgt | sgp | push-diging
  double gamma = 0.1;
  bool stpp_gamma_over_n = true;
  Schedule schedule;
  long long iterations = 1000;
  int repetitions = 1;
  std::uint64_t master_seed = 0;
  long long record_every = 0;  // 0: every iteration up to 1e4 rows, then thinned
  std::vector<double> x0;      // empty means the origin
  double threshold = 1e-3;     // sweep target for iterations-to-threshold
  std::string output;          // csv path, optional
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    c.topology.family = t.value("family", c.topology.family);
    c.topology.n = t.value("n", c.topology.n);
    c.topology.m = t.value("m", c.topology.m);
    c.topology.rows = t.value("rows", c.topology.rows);
    c.topology.cols = t.value("cols", c.topology.cols);
    c.root = t.value("root", c.root);
  }
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    c.problem.family = p.value("family", c.problem.family);
    c.problem.seed = p.value("seed", c.problem.seed);
    c.problem.p = p.value("p", c.problem.p);
    c.problem.J = p.value("J", c.problem.J);
    c.problem.reg = p.value("reg", c.problem.reg);
    c.problem.sigma_h = p.value("sigma_h", c.problem.sigma_h);
    c.problem.batch = p.value("batch", c.problem.batch);
    c.problem.mu = p.value("mu", c.problem.mu);
    c.problem.L = p.value("L", c.problem.L);
    c.problem.heterogeneity = p.value("heterogeneity", c.problem.heterogeneity);
    c.problem.sigma = p.value("sigma", c.problem.sigma);
  }
  c.algorithm = j.value("algorithm", c.algorithm);
  c.gamma = j.value("gamma", c.gamma);
  c.stpp_gamma_over_n = j.value("stpp_gamma_over_n", c.stpp_gamma_over_n);
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    c.schedule.kind = s.value("kind", c.schedule.kind);
    c.schedule.factor = s.value("factor", c.schedule.factor);
    c.schedule.period = s.value("period", c.schedule.period);
  }
  c.iterations = j.value("iterations", c.iterations);
  c.repetitions = j.value("repetitions", c.repetitions);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.record_every = j.value("record_every", c.record_every);
  if (j.contains("x0")) c.x0 = j.at("x0").get<std::vector<double>>();
  c.threshold = j.value("threshold", c.threshold);
  c.output = j.value("output", c.output);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["topology"] = {{"family", c.topology.family}, {"n", c.topology.n},
                   {"m", c.topology.m},           {"rows", c.topology.rows},
                   {"cols", c.topology.cols},     {"root", c.root}};
  j["problem"] = {{"family", c.problem.family},
                  {"seed", c.problem.seed},
                  {"p", c.problem.p},
                  {"J", c.problem.J},
                  {"reg", c.problem.reg},
                  {"sigma_h", c.problem.sigma_h},
                  {"batch", c.problem.batch},
                  {"mu", c.problem.mu},
                  {"L", c.problem.L},
                  {"heterogeneity", c.problem.heterogeneity},
                  {"sigma", c.problem.sigma}};
  j["algorithm"] = c.algorithm;
  j["gamma"] = c.gamma;
  j["stpp_gamma_over_n"] = c.stpp_gamma_over_n;
  j["schedule"] = {{"kind", c.schedule.kind},
                   {"factor", c.schedule.factor},
                   {"period", c.schedule.period}};
  j["iterations"] = c.iterations;
  j["repetitions"] = c.repetitions;
  j["master_seed"] = c.master_seed;
  j["record_every"] = c.record_every;
  j["x0"] = c.x0;
  j["threshold"] = c.threshold;
  j["output"] = c.output;
  return j;
}

struct RecordedRow {
  long long iter = 0;
  MetricRow m;
  double stepsize = 0.0;
  int rep = 0;
};

struct RunRecord {
  json resolved_config;
  std::vector<std::vector<RecordedRow>> reps;
  std::vector<RecordedRow> mean;  // averaged across repetitions, rep = -1
  double wallclock_sec = 0.0;
};

namespace detail {

inline ProblemInstance build_problem(const ProblemSpec& p, int n) {
  if (p.family == "logistic")
    return gen_logistic(n, p.p, p.J, p.reg, p.sigma_h, p.seed, p.batch);
  if (p.family == "quadratic")
    return gen_quadratic(n, p.p, p.mu, p.L, p.heterogeneity, p.sigma, p.seed);
  throw std::invalid_argument("unknown problem family: " + p.family);
}

inline long long auto_record_every(long long T) {
  if (T <= 10000) return 1;
  return (T + 9999) / 10000;
}

}  // namespace detail

// Runs one experiment: builds the topology, the per-algorithm weights and
// the problem, then loops repetitions with independent gradient streams.
// The data set itself is fixed by problem.seed across repetitions.
inline RunRecord run_experiment(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const int n = [&] {
    if (cfg.topology.family == "grid" && cfg.topology.rows > 0 && cfg.topology.cols > 0)
      return cfg.topology.rows * cfg.topology.cols;
    return cfg.topology.n;
  }();
  if (n < 1) throw std::invalid_argument("run: need n >= 1");
  DirectedGraph g = build_topology(cfg.topology);
  TreePair trees = extract_trees(g, cfg.root);

  const bool is_stpp = cfg.algorithm == "stpp";
  MixingMatrix r, c, w;
  TreeGather gather;
  if (is_stpp) {
    r = build_pull_matrix(trees.pull);
    c = build_push_matrix(trees.push);
    gather = make_gather(r, c);
  } else if (cfg.algorithm == "dsgd") {
    bool bidirected = true;
    for (auto [u, v] : g.edges())
      if (!g.has_edge(v, u)) bidirected = false;
    w = bidirected ? metropolis_weights(g) : uniform_row_weights(g);
  } else if (cfg.algorithm == "dsgt") {
    w = metropolis_weights(g);
  } else if (cfg.algorithm == "sgp" || cfg.algorithm == "push-diging") {
    w = uniform_column_weights(g);
  } else {
    throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
  }

  ProblemInstance base = detail::build_problem(cfg.problem, n);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(base.p);
  if (!cfg.x0.empty()) {
    if (static_cast<int>(cfg.x0.size()) != base.p)
      throw std::invalid_argument("run: x0 dimension mismatch");
    for (int k = 0; k < base.p; ++k) x0(k) = cfg.x0[k];
  }

  double base_gamma = cfg.gamma;
  if (is_stpp && cfg.stpp_gamma_over_n) base_gamma = cfg.gamma / n;
  long long every = cfg.record_every > 0 ? cfg.record_every
                                         : detail::auto_record_every(cfg.iterations);

  RunRecord rec;
  rec.resolved_config = config_to_json(cfg);
  rec.resolved_config["effective_gamma"] = base_gamma;
  rec.resolved_config["effective_record_every"] = every;
  rec.resolved_config["n"] = n;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    ProblemInstance inst = base;
    inst.seed = rep_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));
    SwarmState s;
    if (is_stpp)
      s = stpp_init(inst, x0);
    else if (cfg.algorithm == "dsgd")
      s = dsgd_init(inst, x0);
    else if (cfg.algorithm == "dsgt")
      s = dsgt_init(inst, x0);
    else if (cfg.algorithm == "sgp")
      s = sgp_init(inst, x0);
    else
      s = pushdiging_init(inst, x0);

    std::vector<RecordedRow> series;
    auto record = [&](long long t) {
      series.push_back({t, metrics(s, inst, cfg.root),
                        cfg.schedule.value(base_gamma, t), rep});
    };
    record(0);
    for (long long t = 0; t < cfg.iterations; ++t) {
      double gm = cfg.schedule.value(base_gamma, t);
      if (is_stpp)
        stpp_step(s, gather, gm, inst);
      else if (cfg.algorithm == "dsgd")
        dsgd_step(s, w, gm, inst);
      else if (cfg.algorithm == "dsgt")
        dsgt_step(s, w, gm, inst);
      else if (cfg.algorithm == "sgp")
        sgp_step(s, w, gm, inst);
      else
        pushdiging_step(s, w, gm, inst);
      long long done = t + 1;
      if (done % every == 0 || done == cfg.iterations) record(done);
    }
    rec.reps.push_back(std::move(series));
  }

  // Pointwise mean across repetitions; optional metrics survive only if
  // present everywhere (they are, for a fixed problem family).
  const auto& first = rec.reps.front();
  for (std::size_t i = 0; i < first.size(); ++i) {
    RecordedRow m = first[i];
    m.rep = -1;
    for (int rep = 1; rep < cfg.repetitions; ++rep) {
      const auto& r2 = rec.reps[rep][i];
      m.m.grad_norm_sq += r2.m.grad_norm_sq;
      m.m.consensus += r2.m.consensus;
      if (m.m.opt_gap && r2.m.opt_gap)
        *m.m.opt_gap += *r2.m.opt_gap;
      else
        m.m.opt_gap.reset();
      if (m.m.fval_gap && r2.m.fval_gap)
        *m.m.fval_gap += *r2.m.fval_gap;
      else
        m.m.fval_gap.reset();
    }
    m.m.grad_norm_sq /= cfg.repetitions;
    m.m.consensus /= cfg.repetitions;
    if (m.m.opt_gap) *m.m.opt_gap /= cfg.repetitions;
    if (m.m.fval_gap) *m.m.fval_gap /= cfg.repetitions;
    rec.mean.push_back(m);
  }

  rec.wallclock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV schema: iter,grad_norm_sq_root,opt_gap,consensus_err,fval_gap,stepsize,rep
// Floats carry 17 significant digits so a parse round-trips bit for bit.
// Metrics without a defined value for the problem family stay empty.
inline void emit_csv(const RunRecord& rec, std::ostream& os) {
  os << "iter,grad_norm_sq_root,opt_gap,consensus_err,fval_gap,stepsize,rep\n";
  for (const auto& series : rec.reps)
    for (const auto& row : series) {
      os << row.iter << "," << detail::fmt17(row.m.grad_norm_sq) << ",";
      if (row.m.opt_gap) os << detail::fmt17(*row.m.opt_gap);
      os << "," << detail::fmt17(row.m.consensus) << ",";
      if (row.m.fval_gap) os << detail::fmt17(*row.m.fval_gap);
      os << "," << detail::fmt17(row.stepsize) << "," << row.rep << "\n";
    }
}

inline void emit_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  emit_csv(rec, f);
}

struct SweepRow {
  int n = 0;
  double gamma = 0.0;
  long long iters_to_threshold = -1;  // first recorded iter at/below threshold
  double final_grad_norm_sq = 0.0;
  double final_consensus = 0.0;
};

// Repeats the configured experiment across network sizes. Grid sizes are
// refactorized near-square; other families take n directly.
inline std::vector<SweepRow> sweep_n(const ExperimentConfig& cfg,
                                     const std::vector<int>& ns) {
  std::vector<SweepRow> rows;
  for (int n : ns) {
    ExperimentConfig c2 = cfg;
    c2.topology.n = n;
    c2.topology.rows = 0;
    c2.topology.cols = 0;
    RunRecord rec = run_experiment(c2);
    SweepRow row;
    row.n = n;
    row.gamma = rec.resolved_config["effective_gamma"].get<double>();
    for (const auto& r : rec.mean) {
      if (row.iters_to_threshold < 0 && r.m.grad_norm_sq <= cfg.threshold)
        row.iters_to_threshold = r.iter;
    }
    row.final_grad_norm_sq = rec.mean.back().m.grad_norm_sq;
    row.final_consensus = rec.mean.back().m.consensus;
    rows.push_back(row);
  }
  return rows;
}

inline void emit_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "n,gamma,iters_to_threshold,final_grad_norm_sq,final_consensus\n";
  for (const auto& r : rows)
    os << r.n << "," << detail::fmt17(r.gamma) << "," << r.iters_to_threshold
       << "," << detail::fmt17(r.final_grad_norm_sq) << ","
       << detail::fmt17(r.final_consensus) << "\n";
}

// Rate-statement report for a topology: tree summaries, every stepsize
// branch, the chosen stepsize and the predicted transient length.
inline json theory_report(const TopologySpec& topo, int root,
                          const std::string& regime, double L, double mu,
                          double sigma, double delta_f, long long T) {
  DirectedGraph g = build_topology(topo);
  TreePair trees = extract_trees(g, root);
  TreeSummary ts = summarize(trees.pull_stats, trees.push_stats);
  json j;
  j["inputs"] = {{"family", topo.family}, {"n", g.size()},   {"root", root},
                 {"regime", regime},      {"L", L},           {"mu", mu},
                 {"sigma", sigma},        {"delta_f", delta_f}, {"T", T}};
  j["tree"] = {{"d_pull", ts.d_pull},
               {"d_push", ts.d_push},
               {"r_avg", ts.r_avg},
               {"c_avg", ts.c_avg}};
  StepsizeRule rule;
  bool convex = regime == "convex";
  if (convex)
    rule = stepsize_convex(ts, g.size(), L, mu, T);
  else if (regime == "nonconvex")
    rule = stepsize_nonconvex(ts, g.size(), L, sigma * sigma, delta_f, T);
  else
    throw std::invalid_argument("unknown regime: " + regime);
  json branches = json::array();
  for (const auto& b : rule.branches) branches.push_back({{"name", b.name}, {"value", b.value}});
  j["branches"] = branches;
  j["gamma"] = rule.gamma;
  j["transient_bound"] = transient_bound(ts, g.size(), convex);
  return j;
}

}  // namespace stpp
