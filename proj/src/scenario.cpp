#include "consim/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace consim {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t Rng::next() {
  // splitmix64; bit-stable everywhere.
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      raise(ErrorKind::ValidationError, context + ": unknown field '" + it.key() + "'");
  }
}

const json& require_field(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end())
    raise(ErrorKind::ValidationError, context + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& context) {
  if (!v.is_number()) raise(ErrorKind::ValidationError, context + ": expected a number");
  return v.get<double>();
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorKind::ParseError, path + ": " + e.what());
  }
}

WeightedDigraph graph_from_json(const json& spec, const std::string& context) {
  if (!spec.is_object()) raise(ErrorKind::ValidationError, context + ": expected an object");
  check_keys(spec, {"n", "edges"}, context);
  const json& jn = require_field(spec, "n", context);
  if (!jn.is_number_integer() || jn.get<long>() <= 0)
    raise(ErrorKind::ValidationError, context + ": n must be a positive integer");
  int n = jn.get<int>();
  std::vector<Edge> edges;
  const json& je = require_field(spec, "edges", context);
  if (!je.is_array()) raise(ErrorKind::ValidationError, context + ": edges must be an array");
  for (const json& row : je) {
    if (!row.is_array() || row.size() != 3)
      raise(ErrorKind::ValidationError, context + ": each edge is [source, target, weight]");
    if (!row[0].is_number_integer() || !row[1].is_number_integer())
      raise(ErrorKind::ValidationError, context + ": edge endpoints must be integers");
    edges.push_back({row[0].get<int>(), row[1].get<int>(),
                     as_number(row[2], context + ".edges.weight")});
  }
  return build_graph(n, std::move(edges));
}

json graph_to_json(const WeightedDigraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.source, e.target, e.weight});
  return json{{"n", g.node_count()}, {"edges", std::move(edges)}};
}

MonotoneFn fn_from_descriptor_json(const json& desc, const std::string& context) {
  if (!desc.is_object()) raise(ErrorKind::ValidationError, context + ": expected an object");
  check_keys(desc, {"kind", "params"}, context);
  const json& jk = require_field(desc, "kind", context);
  if (!jk.is_string()) raise(ErrorKind::ValidationError, context + ": kind must be a string");
  std::string kind = jk.get<std::string>();
  json params = desc.value("params", json::object());
  if (!params.is_object())
    raise(ErrorKind::ValidationError, context + ": params must be an object");

  if (kind == "symmetric" || kind == "asymmetric" || kind == "logarithmic") {
    check_keys(params, {"delta"}, context + ".params");
    double delta = as_number(require_field(params, "delta", context), context + ".delta");
    if (kind == "symmetric") return quantizer_symmetric({delta});
    if (kind == "asymmetric") return quantizer_asymmetric({delta});
    return quantizer_logarithmic({delta});
  }
  if (kind == "sign" || kind == "saturation") {
    check_keys(params, {"scale"}, context + ".params");
    double scale = as_number(require_field(params, "scale", context), context + ".scale");
    return kind == "sign" ? sign_fn(scale) : saturation_fn(scale);
  }
  if (kind == "custom") {
    check_keys(params, {"breakpoints"}, context + ".params");
    const json& bp = require_field(params, "breakpoints", context);
    if (!bp.is_array())
      raise(ErrorKind::ValidationError, context + ": breakpoints must be an array");
    std::vector<std::pair<double, double>> pts;
    for (const json& p : bp) {
      if (!p.is_array() || p.size() != 2)
        raise(ErrorKind::ValidationError, context + ": each breakpoint is [x, y]");
      pts.emplace_back(as_number(p[0], context), as_number(p[1], context));
    }
    return piecewise_fn(std::move(pts));
  }
  raise(ErrorKind::ValidationError, context + ": unknown nonlinearity kind '" + kind + "'");
}

std::string indexed_path(const std::string& base, size_t k, size_t count) {
  if (count <= 1) return base;
  fs::path p(base);
  fs::path dir = p.parent_path();
  std::string name = p.stem().string() + "_" + std::to_string(k) + p.extension().string();
  return (dir / name).string();
}

std::string sibling_path(const std::string& base, const char* suffix) {
  fs::path p(base);
  fs::path dir = p.parent_path();
  std::string name = p.stem().string() + suffix + p.extension().string();
  return (dir / name).string();
}

void write_text_file(const std::string& path, const std::string& body) {
  fs::path p(path);
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) raise(ErrorKind::ValidationError, "cannot write '" + path + "'");
  out << body;
}

json monotonicity_to_json(const MonotonicityReport& rep) {
  json lyap = {{"V", rep.v.pass}, {"W", rep.w.pass}};
  if (rep.v1) lyap["V1"] = rep.v1->pass;
  return lyap;
}

json report_to_json(const ConvergenceReport& rep) {
  json j = {
      {"scenario_class", to_string(rep.scenario_class)},
      {"asserted", rep.asserted},
      {"limit_set_kind", to_string(rep.limit_set_kind)},
      {"in_limit_set", rep.in_limit_set},
      {"terminal_spread", rep.terminal_spread},
      {"lyapunov_pass", monotonicity_to_json(rep.lyapunov)},
      {"pass", rep.pass()},
  };
  if (rep.entry_time) j["entry_time"] = *rep.entry_time;
  return j;
}

}  // namespace

WeightedDigraph read_graph_file(const std::string& path) {
  return graph_from_json(parse_file(path), path);
}

void write_graph_file(const WeightedDigraph& g, const std::string& path) {
  write_text_file(path, graph_to_json(g).dump(2) + "\n");
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  json doc = parse_file(path);
  if (!doc.is_object()) raise(ErrorKind::ValidationError, "scenario: expected an object");
  check_keys(doc, {"graph", "nonlinearities", "initial", "integrator", "outputs"}, "scenario");

  Scenario sc;

  // graph: inline {n, edges} or {file}
  const json& jg = require_field(doc, "graph", "scenario");
  if (jg.is_object() && jg.contains("file")) {
    check_keys(jg, {"file"}, "scenario.graph");
    if (!jg["file"].is_string())
      raise(ErrorKind::ValidationError, "scenario.graph.file must be a string");
    fs::path gp(jg["file"].get<std::string>());
    if (gp.is_relative()) gp = fs::path(path).parent_path() / gp;
    sc.graph = read_graph_file(gp.string());
  } else {
    sc.graph = graph_from_json(jg, "scenario.graph");
  }
  const int n = sc.graph.node_count();

  // nonlinearities: shared descriptor or per-node list
  const json& jf = require_field(doc, "nonlinearities", "scenario");
  if (!jf.is_object())
    raise(ErrorKind::ValidationError, "scenario.nonlinearities: expected an object");
  check_keys(jf, {"shared", "per_node"}, "scenario.nonlinearities");
  if (jf.contains("shared") == jf.contains("per_node"))
    raise(ErrorKind::ValidationError,
          "scenario.nonlinearities: exactly one of 'shared' or 'per_node'");
  if (jf.contains("shared")) {
    MonotoneFn f = fn_from_descriptor_json(jf["shared"], "scenario.nonlinearities.shared");
    sc.nonlinearities.assign(n, f);
  } else {
    const json& list = jf["per_node"];
    if (!list.is_array() || static_cast<int>(list.size()) != n)
      raise(ErrorKind::ValidationError,
            "scenario.nonlinearities.per_node: expected " + std::to_string(n) + " descriptors");
    for (const json& d : list)
      sc.nonlinearities.push_back(fn_from_descriptor_json(d, "scenario.nonlinearities.per_node"));
  }

  // initial: explicit vector or random block
  const json& ji = require_field(doc, "initial", "scenario");
  if (ji.is_array()) {
    if (static_cast<int>(ji.size()) != n)
      raise(ErrorKind::ValidationError,
            "scenario.initial: expected " + std::to_string(n) + " components");
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = as_number(ji[i], "scenario.initial");
    sc.initials.push_back(std::move(x0));
  } else if (ji.is_object() && ji.contains("random")) {
    check_keys(ji, {"random"}, "scenario.initial");
    const json& r = ji["random"];
    check_keys(r, {"count", "low", "high", "seed"}, "scenario.initial.random");
    const json& jc = require_field(r, "count", "scenario.initial.random");
    if (!jc.is_number_integer() || jc.get<long>() <= 0)
      raise(ErrorKind::ValidationError, "scenario.initial.random.count must be positive");
    int count = jc.get<int>();
    double low = as_number(require_field(r, "low", "scenario.initial.random"), "low");
    double high = as_number(require_field(r, "high", "scenario.initial.random"), "high");
    if (!(low < high))
      raise(ErrorKind::ValidationError, "scenario.initial.random: low must be below high");
    std::uint64_t seed;
    if (overrides.seed) {
      seed = *overrides.seed;
    } else {
      const json& js = require_field(r, "seed", "scenario.initial.random");
      if (!js.is_number_integer())
        raise(ErrorKind::ValidationError, "scenario.initial.random.seed must be an integer");
      seed = js.get<std::uint64_t>();
    }
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd x0(n);
      for (int i = 0; i < n; ++i) x0(i) = rng.uniform(low, high);
      sc.initials.push_back(std::move(x0));
    }
  } else {
    raise(ErrorKind::ValidationError,
          "scenario.initial: expected a vector or {random: {...}}");
  }

  // integrator
  json jint = doc.value("integrator", json::object());
  if (!jint.is_object())
    raise(ErrorKind::ValidationError, "scenario.integrator: expected an object");
  check_keys(jint, {"dt", "t_end", "event_tolerance"}, "scenario.integrator");
  if (overrides.dt)
    sc.integrator.dt = *overrides.dt;
  else if (jint.contains("dt"))
    sc.integrator.dt = as_number(jint["dt"], "scenario.integrator.dt");
  else
    sc.integrator.dt = 0.0;  // resolved against the system below
  if (overrides.t_end)
    sc.integrator.t_end = *overrides.t_end;
  else
    sc.integrator.t_end = as_number(require_field(jint, "t_end", "scenario.integrator"),
                                    "scenario.integrator.t_end");
  if (jint.contains("event_tolerance"))
    sc.integrator.event_tolerance =
        as_number(jint["event_tolerance"], "scenario.integrator.event_tolerance");

  // outputs
  json jout = doc.value("outputs", json::object());
  if (!jout.is_object())
    raise(ErrorKind::ValidationError, "scenario.outputs: expected an object");
  check_keys(jout, {"trajectory_csv", "lyapunov_csv", "report"}, "scenario.outputs");
  auto out_path = [&](const char* key) -> std::string {
    if (!jout.contains(key)) return {};
    if (!jout[key].is_string())
      raise(ErrorKind::ValidationError, std::string("scenario.outputs.") + key + " must be a string");
    fs::path p(jout[key].get<std::string>());
    if (overrides.out_dir) p = fs::path(*overrides.out_dir) / p;
    return p.string();
  };
  sc.trajectory_csv = out_path("trajectory_csv");
  sc.lyapunov_csv = out_path("lyapunov_csv");
  sc.report_path = out_path("report");

  return sc;
}

int run_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  try {
    Scenario sc = load_scenario(path, overrides);
    ConsensusSystem sys = make_system(std::move(sc.graph), std::move(sc.nonlinearities));
    if (sc.integrator.dt <= 0.0) sc.integrator.dt = suggested_dt(sys);
    sc.integrator.validate();

    for (int i = 0; i < sys.dimension(); ++i)
      if (!sys.nonlinearities[i].assumption1_ok())
        std::fprintf(stderr,
                     "warning: nonlinearity %d fails the sign condition at the probe points\n", i);

    StructureReport st = analyze_structure(sys.graph);
    std::optional<LeftPerronVector> perron;
    if (st.strongly_connected) perron = left_perron(sys.lap);

    std::vector<Trajectory> trajectories = batch_integrate(sys, sc.initials, sc.integrator);

    bool all_pass = true;
    json report_entries = json::array();
    const size_t count = trajectories.size();
    for (size_t k = 0; k < count; ++k) {
      const Trajectory& traj = trajectories[k];
      ConvergenceReport rep = convergence_verdict(sys, traj, sc.integrator, perron);
      all_pass = all_pass && rep.pass();
      report_entries.push_back(report_to_json(rep));

      if (!sc.trajectory_csv.empty()) {
        std::string tp = indexed_path(sc.trajectory_csv, k, count);
        std::ostringstream body, events;
        write_trajectory_csv(traj, body);
        write_events_csv(traj, events);
        write_text_file(tp, body.str());
        write_text_file(sibling_path(tp, "_events"), events.str());
      }
      if (!sc.lyapunov_csv.empty()) {
        LyapunovTrace trace = evaluate_lyapunov(sys, traj, perron);
        std::ostringstream body;
        write_lyapunov_csv(trace, body);
        write_text_file(indexed_path(sc.lyapunov_csv, k, count), body.str());
      }
      if (!overrides.quiet) {
        std::string entry = rep.entry_time ? std::to_string(*rep.entry_time) : "-";
        std::printf("trajectory %zu: class=%s in_%s=%s entry_time=%s spread=%.6g %s\n", k,
                    to_string(rep.scenario_class), to_string(rep.limit_set_kind),
                    rep.in_limit_set ? "true" : "false", entry.c_str(), rep.terminal_spread,
                    rep.pass() ? "pass" : (rep.asserted ? "FAIL" : "not asserted"));
      }
    }

    if (!sc.report_path.empty()) {
      json report = {
          {"scenario", fs::path(path).filename().string()},
          {"n", sys.dimension()},
          {"scenario_class",
           to_string(count > 0 ? classify_scenario(sys) : ScenarioClass::Unsupported)},
          {"trajectories", std::move(report_entries)},
          {"pass", all_pass},
      };
      write_text_file(sc.report_path, report.dump(2) + "\n");
    }

    if (!overrides.quiet)
      std::printf("%s\n", all_pass ? "PASS" : "FAIL");
    return all_pass ? kExitPass : kExitAssertionFailed;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}

WeightedDigraph generate_random_graph(int n, double edge_probability, double weight_lo,
                                      double weight_hi, std::uint64_t seed,
                                      GraphRequirement require) {
  if (n < 1) raise(ErrorKind::ValidationError, "node count must be at least 1");
  if (!(edge_probability > 0.0) || edge_probability > 1.0)
    raise(ErrorKind::ValidationError, "edge probability must lie in (0, 1]");
  if (!(weight_lo > 0.0) || !(weight_lo <= weight_hi))
    raise(ErrorKind::ValidationError, "weight range must satisfy 0 < lo <= hi");

  Rng rng(seed);
  constexpr int kMaxAttempts = 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Edge> edges;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        if (s == t) continue;
        if (rng.uniform() < edge_probability)
          edges.push_back({s, t, rng.uniform(weight_lo, weight_hi)});
      }
    WeightedDigraph g = build_graph(n, std::move(edges));
    if (require == GraphRequirement::None) return g;
    StructureReport st = analyze_structure(g);
    if (require == GraphRequirement::SpanningTree && st.has_spanning_tree) return g;
    if (require == GraphRequirement::StronglyConnected && st.strongly_connected) return g;
  }
  raise(ErrorKind::RequirementUnsatisfiable,
        "no graph met the requirement within 10000 attempts");
}

}  // namespace consim
