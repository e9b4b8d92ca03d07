// Command line front end: topology inspection, experiment runs, size sweeps
// and rate-statement reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stpp/stpp.hpp"

namespace {

using nlohmann::json;

json tree_to_json(const stpp::SpanningTree& t, const stpp::TreeStats& s) {
  json j;
  j["link"] = std::vector<int>(t.link.begin() + 1, t.link.end());
  j["depth"] = std::vector<int>(t.depth.begin() + 1, t.depth.end());
  j["diameter"] = s.diameter;
  j["counts"] = s.counts;
  j["avg"] = s.avg;
  return j;
}

int cmd_topo(const stpp::TopologySpec& spec, int root, const std::string& emit_dir) {
  stpp::DirectedGraph g = stpp::build_topology(spec);
  stpp::TreePair trees = stpp::extract_trees(g, root);
  json out;
  out["family"] = spec.family;
  out["n"] = g.size();
  out["root"] = root;
  json edges = json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  out["edges"] = edges;
  out["pull"] = tree_to_json(trees.pull, trees.pull_stats);
  out["push"] = tree_to_json(trees.push, trees.push_stats);
  out["d_R"] = trees.pull_stats.diameter;
  out["d_C"] = trees.push_stats.diameter;
  out["r_avg"] = trees.pull_stats.avg;
  out["c_avg"] = trees.push_stats.avg;
  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    auto r = stpp::build_pull_matrix(trees.pull);
    auto c = stpp::build_push_matrix(trees.push);
    stpp::write_matrix_market(r.w, emit_dir + "/R.mtx");
    stpp::write_matrix_market(c.w, emit_dir + "/C.mtx");
    out["emitted"] = {emit_dir + "/R.mtx", emit_dir + "/C.mtx"};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

stpp::ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  json j = json::parse(f);
  return stpp::config_from_json(j);
}

int cmd_run(const std::string& config_path, const std::string& algo,
            const std::string& out) {
  stpp::ExperimentConfig cfg = load_config(config_path);
  if (!algo.empty()) cfg.algorithm = algo;
  if (!out.empty()) cfg.output = out;
  stpp::RunRecord rec = stpp::run_experiment(cfg);
  if (!cfg.output.empty()) {
    stpp::emit_csv(rec, cfg.output);
    json meta = rec.resolved_config;
    meta["wallclock_sec"] = rec.wallclock_sec;
    std::ofstream mf(cfg.output + ".meta.json");
    mf << meta.dump(2) << "\n";
  } else {
    stpp::emit_csv(rec, std::cout);
  }
  const auto& last = rec.mean.back();
  std::cerr << "done: iter=" << last.iter
            << " grad_norm_sq_root=" << last.m.grad_norm_sq
            << " consensus_err=" << last.m.consensus
            << " wallclock=" << rec.wallclock_sec << "s\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& ns_csv,
              const std::string& out) {
  stpp::ExperimentConfig cfg = load_config(config_path);
  std::vector<int> ns;
  std::stringstream ss(ns_csv);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) ns.push_back(std::stoi(tok));
  if (ns.empty()) throw std::runtime_error("sweep: empty --ns list");
  auto rows = stpp::sweep_n(cfg, ns);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    stpp::emit_sweep_csv(rows, f);
  } else {
    stpp::emit_sweep_csv(rows, std::cout);
  }
  return 0;
}

int cmd_theory(const stpp::TopologySpec& spec, int root, const std::string& regime,
               double L, double mu, double sigma, double delta_f, long long T) {
  json j = stpp::theory_report(spec, root, regime, L, mu, sigma, delta_f, T);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spanning-tree push-pull decentralized optimization toolkit"};
  app.require_subcommand(1);

  stpp::TopologySpec spec;
  int root = 1;
  std::string emit_dir;

  auto* topo = app.add_subcommand("topo", "inspect a topology and its spanning trees");
  topo->add_option("--family", spec.family,
                   "di-ring | ring | grid | static-exp | multi-subring")->required();
  topo->add_option("--n", spec.n, "node count")->required();
  topo->add_option("--m", spec.m, "multi-subring cycle count");
  topo->add_option("--rows", spec.rows, "grid rows (overrides factorization)");
  topo->add_option("--cols", spec.cols, "grid cols");
  topo->add_option("--root", root, "root node id");
  topo->add_option("--emit-matrices", emit_dir,
                   "write R.mtx and C.mtx (Matrix Market) into this directory");

  std::string config_path, algo, out;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--algo", algo, "override algorithm tag");
  run->add_option("--out", out, "write metrics CSV here (default: stdout)");

  std::string ns_csv;
  auto* sweep = app.add_subcommand("sweep", "repeat a config across network sizes");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--ns", ns_csv, "comma-separated sizes, e.g. 4,8,16")->required();
  sweep->add_option("--out", out, "write sweep CSV here (default: stdout)");

  std::string regime = "nonconvex";
  double L = 1.0, mu = 0.1, sigma = 1.0, delta_f = 1.0;
  long long T = 10000;
  auto* theory = app.add_subcommand("theory", "stepsize and transient report");
  theory->add_option("--family", spec.family, "topology family")->required();
  theory->add_option("--n", spec.n, "node count")->required();
  theory->add_option("--m", spec.m, "multi-subring cycle count");
  theory->add_option("--rows", spec.rows, "grid rows");
  theory->add_option("--cols", spec.cols, "grid cols");
  theory->add_option("--root", root, "root node id");
  theory->add_option("--regime", regime, "nonconvex | convex");
  theory->add_option("--L", L, "smoothness constant");
  theory->add_option("--mu", mu, "strong convexity constant (convex regime)");
  theory->add_option("--sigma", sigma, "gradient noise level");
  theory->add_option("--deltaf", delta_f, "initial objective gap");
  theory->add_option("--T", T, "horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (topo->parsed()) return cmd_topo(spec, root, emit_dir);
    if (run->parsed()) return cmd_run(config_path, algo, out);
    if (sweep->parsed()) return cmd_sweep(config_path, ns_csv, out);
    if (theory->parsed()) return cmd_theory(spec, root, regime, L, mu, sigma, delta_f, T);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
