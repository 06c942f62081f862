#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "consim/analysis.hpp"

namespace consim {

// Exit codes shared by run_scenario and the CLI.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertionFailed = 1;
inline constexpr int kExitUsage = 2;

struct ScenarioOverrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

struct Scenario {
  WeightedDigraph graph;
  std::vector<MonotoneFn> nonlinearities;
  std::vector<Eigen::VectorXd> initials;
  IntegratorConfig integrator;
  std::string trajectory_csv;  // empty = not written
  std::string lyapunov_csv;
  std::string report_path;
};

/// Parses and validates a scenario document. Unknown fields are errors.
/// Throws ParseError or ValidationError.
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

/// Runs a scenario end to end: build, classify, integrate every initial
/// condition, write outputs, print verdicts. Returns 0 when every asserted
/// verdict passes, 1 on a failed assertion, 2 on parse/validation problems.
int run_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

enum class GraphRequirement { None, SpanningTree, StronglyConnected };

/// Rejection-samples digraphs (each ordered pair drawn independently) until
/// the structural requirement holds; deterministic per seed. Throws
/// RequirementUnsatisfiable after 10^4 attempts.
WeightedDigraph generate_random_graph(int n, double edge_probability, double weight_lo,
                                      double weight_hi, std::uint64_t seed,
                                      GraphRequirement require = GraphRequirement::None);

void write_graph_file(const WeightedDigraph& g, const std::string& path);
WeightedDigraph read_graph_file(const std::string& path);

/// Uniform doubles from a fixed-algorithm generator; bit-stable across
/// platforms (no std::uniform_real_distribution).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);

private:
  std::uint64_t next();
  std::uint64_t state_;
};

}  // namespace consim
