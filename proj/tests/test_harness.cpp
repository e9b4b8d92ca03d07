#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "stpp/harness.hpp"

using namespace stpp;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::string csv_of(const RunRecord& rec) {
  std::ostringstream os;
  emit_csv(rec, os);
  return os.str();
}

ExperimentConfig small_logistic() {
  ExperimentConfig cfg;
  cfg.topology = {"di-ring", 6};
  cfg.problem.family = "logistic";
  cfg.problem.p = 4;
  cfg.problem.J = 20;
  cfg.problem.seed = 11;
  cfg.algorithm = "stpp";
  cfg.gamma = 0.3;
  cfg.iterations = 30;
  cfg.record_every = 1;
  return cfg;
}

}  // namespace

TEST_CASE("stepsize schedules evaluate exactly") {
  Schedule c{"constant", 0.5, 100};
  REQUIRE(c.value(0.4, 0) == 0.4);
  REQUIRE(c.value(0.4, 100000) == 0.4);
  Schedule d{"decay", 0.8, 300};
  REQUIRE(d.value(0.4, 0) == 0.4);
  REQUIRE(d.value(0.4, 299) == 0.4);
  REQUIRE(d.value(0.4, 300) == 0.4 * 0.8);
  REQUIRE(d.value(0.4, 899) == (0.4 * 0.8) * 0.8);
  REQUIRE(d.value(0.4, 900) == ((0.4 * 0.8) * 0.8) * 0.8);
  Schedule bad{"warmup", 0.8, 300};
  REQUIRE_THROWS_AS(bad.value(0.4, 1), std::invalid_argument);
}

TEST_CASE("configs survive a json round trip") {
  ExperimentConfig c;
  c.topology = {"multi-subring", 13, 3, 0, 0};
  c.root = 2;
  c.problem.family = "logistic";
  c.problem.seed = 77;
  c.problem.p = 9;
  c.problem.J = 55;
  c.problem.reg = 0.02;
  c.problem.sigma_h = 0.5;
  c.problem.batch = 3;
  c.algorithm = "sgp";
  c.gamma = 0.25;
  c.stpp_gamma_over_n = false;
  c.schedule = {"decay", 0.9, 200};
  c.iterations = 1234;
  c.repetitions = 4;
  c.master_seed = 99;
  c.record_every = 5;
  c.x0 = {1.0, -2.0, 0.5};
  c.threshold = 1e-5;
  c.output = "out.csv";
  json j = config_to_json(c);
  ExperimentConfig back = config_from_json(j);
  REQUIRE(config_to_json(back) == j);
  // defaults fill anything the json leaves out
  ExperimentConfig d = config_from_json(json::object());
  REQUIRE(config_to_json(d) == config_to_json(ExperimentConfig{}));
}

TEST_CASE("auto thinning keeps about ten thousand rows") {
  REQUIRE(detail::auto_record_every(0) == 1);
  REQUIRE(detail::auto_record_every(10000) == 1);
  REQUIRE(detail::auto_record_every(10001) == 2);
  REQUIRE(detail::auto_record_every(100000) == 10);
}

TEST_CASE("recording hits the grid points plus the final iterate") {
  auto cfg = small_logistic();
  cfg.iterations = 30;
  cfg.record_every = 7;
  auto rec = run_experiment(cfg);
  REQUIRE(rec.reps.size() == 1);
  std::vector<long long> iters;
  for (const auto& row : rec.reps[0]) iters.push_back(row.iter);
  REQUIRE(iters == std::vector<long long>{0, 7, 14, 21, 28, 30});
  REQUIRE(rec.resolved_config["effective_record_every"] == 7);

  cfg.iterations = 0;
  auto rec0 = run_experiment(cfg);
  REQUIRE(rec0.reps[0].size() == 1);
  REQUIRE(rec0.reps[0][0].iter == 0);
}

TEST_CASE("the gamma-over-n convention applies only to the tree algorithm") {
  auto cfg = small_logistic();
  auto rec = run_experiment(cfg);
  REQUIRE(rec.resolved_config["effective_gamma"].get<double>() == 0.3 / 6);
  cfg.stpp_gamma_over_n = false;
  REQUIRE(run_experiment(cfg).resolved_config["effective_gamma"].get<double>() == 0.3);
  cfg.algorithm = "sgp";
  cfg.stpp_gamma_over_n = true;
  REQUIRE(run_experiment(cfg).resolved_config["effective_gamma"].get<double>() == 0.3);
}

TEST_CASE("identical configs produce byte-identical csv output") {
  auto cfg = small_logistic();
  cfg.repetitions = 2;
  std::string a = csv_of(run_experiment(cfg));
  std::string b = csv_of(run_experiment(cfg));
  REQUIRE(a == b);
  cfg.master_seed = 1;
  std::string c = csv_of(run_experiment(cfg));
  REQUIRE(a != c);
}

TEST_CASE("csv schema: header, field count, empty optional metrics") {
  auto cfg = small_logistic();
  cfg.iterations = 3;
  auto ls = lines_of(csv_of(run_experiment(cfg)));
  REQUIRE(ls[0] == "iter,grad_norm_sq_root,opt_gap,consensus_err,fval_gap,stepsize,rep");
  REQUIRE(ls.size() == 5);  // header + iters 0..3
  for (std::size_t i = 1; i < ls.size(); ++i) {
    auto f = split(ls[i], ',');
    REQUIRE(f.size() == 7);
    REQUIRE(f[2].empty());  // no closed-form minimizer for this family
    REQUIRE(f[4].empty());
    REQUIRE(!f[1].empty());
    REQUIRE(f[6] == "0");
  }

  cfg.problem.family = "quadratic";
  cfg.problem.p = 3;
  auto lq = lines_of(csv_of(run_experiment(cfg)));
  for (std::size_t i = 1; i < lq.size(); ++i) {
    auto f = split(lq[i], ',');
    REQUIRE(!f[2].empty());
    REQUIRE(!f[4].empty());
  }
}

TEST_CASE("csv floats round-trip through seventeen digits") {
  auto cfg = small_logistic();
  cfg.iterations = 10;
  auto rec = run_experiment(cfg);
  auto ls = lines_of(csv_of(rec));
  for (std::size_t i = 1; i < ls.size(); ++i) {
    auto f = split(ls[i], ',');
    for (int k : {1, 3, 5}) {
      double v = std::stod(f[k]);
      REQUIRE(detail::fmt17(v) == f[k]);
    }
  }
}

TEST_CASE("mean rows average the repetitions pointwise") {
  auto cfg = small_logistic();
  cfg.iterations = 12;
  cfg.repetitions = 3;
  auto rec = run_experiment(cfg);
  REQUIRE(rec.mean.size() == rec.reps[0].size());
  for (std::size_t i = 0; i < rec.mean.size(); ++i) {
    REQUIRE(rec.mean[i].rep == -1);
    REQUIRE(rec.mean[i].iter == rec.reps[0][i].iter);
    double want = rec.reps[0][i].m.grad_norm_sq;
    want += rec.reps[1][i].m.grad_norm_sq;
    want += rec.reps[2][i].m.grad_norm_sq;
    want /= 3;
    REQUIRE(rec.mean[i].m.grad_norm_sq == want);
  }
}

TEST_CASE("the recorded stepsize column follows the schedule") {
  auto cfg = small_logistic();
  cfg.schedule = {"decay", 0.5, 10};
  cfg.iterations = 30;
  cfg.record_every = 7;
  auto rec = run_experiment(cfg);
  double g = 0.3 / 6;
  std::vector<double> want{g, g, g * 0.5, (g * 0.5) * 0.5, (g * 0.5) * 0.5,
                           ((g * 0.5) * 0.5) * 0.5};
  for (std::size_t i = 0; i < want.size(); ++i)
    REQUIRE(rec.reps[0][i].stepsize == want[i]);
}

TEST_CASE("a custom start point feeds the optimality gap") {
  ExperimentConfig cfg;
  cfg.topology = {"di-ring", 4};
  cfg.problem.family = "quadratic";
  cfg.problem.p = 3;
  cfg.problem.mu = 0.5;
  cfg.problem.seed = 9;
  cfg.iterations = 1;
  cfg.x0 = {1.0, 2.0, 3.0};
  auto rec = run_experiment(cfg);
  auto inst = detail::build_problem(cfg.problem, 4);
  Eigen::VectorXd x0(3);
  x0 << 1.0, 2.0, 3.0;
  REQUIRE(rec.reps[0][0].m.opt_gap.has_value());
  REQUIRE(*rec.reps[0][0].m.opt_gap == (x0 - *inst.minimizer).squaredNorm());

  cfg.x0 = {1.0};
  REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("invalid run configurations are rejected") {
  auto cfg = small_logistic();
  cfg.algorithm = "adam";
  REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_logistic();
  cfg.problem.family = "svm";
  REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_logistic();
  cfg.topology.n = 0;
  REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("size sweeps report thresholds and stepsizes") {
  ExperimentConfig cfg;
  cfg.topology = {"ring", 4};
  cfg.algorithm = "dsgd";
  cfg.problem.family = "quadratic";
  cfg.problem.p = 3;
  cfg.problem.mu = 0.5;
  cfg.problem.heterogeneity = 0.0;  // common minimizer, exact descent
  cfg.gamma = 0.5;
  cfg.iterations = 100;
  cfg.record_every = 1;
  cfg.threshold = 1e-6;
  cfg.x0 = {1.0, 1.0, 1.0};
  auto rows = sweep_n(cfg, {4, 8});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    REQUIRE(r.gamma == 0.5);
    REQUIRE(r.iters_to_threshold > 0);
    REQUIRE(r.iters_to_threshold <= 100);
    REQUIRE(r.final_grad_norm_sq <= 1e-10);
    REQUIRE(r.final_consensus <= 1e-20);
  }
  REQUIRE(rows[0].n == 4);
  REQUIRE(rows[1].n == 8);

  cfg.iterations = 3;
  cfg.threshold = 1e-30;
  auto never = sweep_n(cfg, {4});
  REQUIRE(never[0].iters_to_threshold == -1);

  std::ostringstream os;
  emit_sweep_csv(never, os);
  auto ls = lines_of(os.str());
  REQUIRE(ls[0] == "n,gamma,iters_to_threshold,final_grad_norm_sq,final_consensus");
  REQUIRE(split(ls[1], ',')[2] == "-1");
}

TEST_CASE("sweeping a grid refactorizes each size near-square") {
  ExperimentConfig cfg;
  cfg.topology = {"grid", 9, 2, 3, 3};
  cfg.problem.family = "quadratic";
  cfg.problem.p = 2;
  cfg.gamma = 0.4;
  cfg.iterations = 5;
  auto rows = sweep_n(cfg, {16, 12});
  REQUIRE(rows[0].n == 16);
  REQUIRE(rows[0].gamma == 0.4 / 16);
  REQUIRE(rows[1].n == 12);
  REQUIRE(rows[1].gamma == 0.4 / 12);
}

TEST_CASE("csv file output writes and fails loudly") {
  auto cfg = small_logistic();
  cfg.iterations = 2;
  auto rec = run_experiment(cfg);
  std::string path = "harness_test_tmp.csv";
  emit_csv(rec, path);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  REQUIRE(header == "iter,grad_norm_sq_root,opt_gap,consensus_err,fval_gap,stepsize,rep");
  f.close();
  std::remove(path.c_str());
  REQUIRE_THROWS_AS(emit_csv(rec, "/nonexistent_dir_xyz/out.csv"), std::runtime_error);
}

TEST_CASE("rate reports collect trees, branches and the transient prediction") {
  TopologySpec topo{"di-ring", 6};
  json j = theory_report(topo, 1, "nonconvex", 1.0, 0.1, 1.0, 1.0, 10000);
  REQUIRE(j["inputs"]["n"] == 6);
  REQUIRE(j["tree"]["d_pull"] == 5);
  REQUIRE(j["tree"]["d_push"] == 5);
  REQUIRE(j["tree"]["r_avg"] == 2.5);
  REQUIRE(j["tree"]["c_avg"] == 2.5);
  REQUIRE(j["branches"].size() == 3);
  REQUIRE(j["gamma"].get<double>() == 1.0 / 7500.0);
  REQUIRE(j["transient_bound"].get<double>() == 5859.375);

  json jc = theory_report(topo, 1, "convex", 1.0, 0.1, 0.0, 1.0, 10000);
  REQUIRE(jc["branches"].size() == 2);
  REQUIRE(jc["gamma"].get<double>() == 1.0 / 1875000.0);
  REQUIRE(jc["transient_bound"].get<double>() == 31.25);

  REQUIRE_THROWS_AS(theory_report(topo, 1, "flat", 1.0, 0.1, 0.0, 1.0, 10),
                    std::invalid_argument);
}
