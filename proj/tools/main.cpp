// consim command line: scenario-driven simulation of the discontinuous
// consensus protocol, plus a random graph generator for test harnesses.

#include <CLI11.hpp>
#include <cstdio>

#include "consim/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyze nonlinear (quantized) consensus protocols"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  consim::ScenarioOverrides overrides;
  double dt = 0.0, t_end = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  run->add_option("--scenario", scenario_path, "Scenario document (JSON)")->required();
  auto* dt_opt = run->add_option("--dt", dt, "Override the integrator step");
  auto* tend_opt = run->add_option("--t-end", t_end, "Override the horizon");
  auto* seed_opt = run->add_option("--seed", seed, "Override the random-initials seed");
  auto* out_opt = run->add_option("--out-dir", out_dir, "Prefix for output files");
  run->add_flag("--quiet", overrides.quiet, "Suppress per-trajectory output");

  // gen-graph
  auto* gen = app.add_subcommand("gen-graph", "Generate a random digraph file");
  int n = 5;
  double edge_probability = 0.3;
  double w_lo = 0.5, w_hi = 1.5;
  std::uint64_t gen_seed = 1;
  std::string require_str = "none";
  std::string out_path = "graph.json";
  gen->add_option("--n", n, "Node count")->required();
  gen->add_option("--edge-probability", edge_probability, "Per-ordered-pair edge probability")
      ->required();
  gen->add_option("--w-min", w_lo, "Minimum edge weight");
  gen->add_option("--w-max", w_hi, "Maximum edge weight");
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--require", require_str,
                  "Structural requirement: none | spanning-tree | strongly-connected");
  gen->add_option("--out", out_path, "Output graph file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : consim::kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (*dt_opt) overrides.dt = dt;
      if (*tend_opt) overrides.t_end = t_end;
      if (*seed_opt) overrides.seed = seed;
      if (*out_opt) overrides.out_dir = out_dir;
      return consim::run_scenario(scenario_path, overrides);
    }
    consim::GraphRequirement req;
    if (require_str == "none")
      req = consim::GraphRequirement::None;
    else if (require_str == "spanning-tree")
      req = consim::GraphRequirement::SpanningTree;
    else if (require_str == "strongly-connected")
      req = consim::GraphRequirement::StronglyConnected;
    else {
      std::fprintf(stderr, "error: unknown requirement '%s'\n", require_str.c_str());
      return consim::kExitUsage;
    }
    consim::WeightedDigraph g =
        consim::generate_random_graph(n, edge_probability, w_lo, w_hi, gen_seed, req);
    consim::write_graph_file(g, out_path);
    std::printf("wrote %s (n=%d, %zu edges)\n", out_path.c_str(), g.node_count(),
                g.edges().size());
    return consim::kExitPass;
  } catch (const consim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return consim::kExitUsage;
  }
}
