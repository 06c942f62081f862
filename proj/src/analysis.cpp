#include "consim/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace consim {

const char* to_string(ScenarioClass c) {
  switch (c) {
    case ScenarioClass::Theorem1: return "Theorem1";
    case ScenarioClass::Theorem2: return "Theorem2";
    case ScenarioClass::Corollary1: return "Corollary1";
    case ScenarioClass::Unsupported: return "Unsupported";
  }
  return "?";
}

const char* to_string(LimitSetKind k) {
  switch (k) {
    case LimitSetKind::D1: return "D1";
    case LimitSetKind::D2: return "D2";
    case LimitSetKind::Q: return "Q";
  }
  return "?";
}

namespace {

// Hull of the Filippov intervals over [x - snap, x + snap]; by monotonicity
// this is [f((x-snap)-), f((x+snap)+)].
FilippovInterval snapped_interval(const MonotoneFn& f, double x, double snap) {
  return {f.left_limit(x - snap), f.right_limit(x + snap)};
}

}  // namespace

bool in_D1(const ConsensusSystem& sys, const Eigen::VectorXd& x, double snap) {
  if (!x.allFinite()) raise(ErrorKind::NonFiniteState, "state must be finite");
  std::vector<FilippovInterval> parts(sys.dimension());
  for (int i = 0; i < sys.dimension(); ++i)
    parts[i] = snapped_interval(sys.nonlinearities[i], x(i), snap);
  return intersect_intervals(parts).has_value();
}

bool in_D2(const ConsensusSystem& sys, const Eigen::VectorXd& x, double snap) {
  if (!sys.homogeneous)
    raise(ErrorKind::NotHomogeneous, "D2 membership needs a homogeneous system");
  if (!x.allFinite()) raise(ErrorKind::NonFiniteState, "state must be finite");
  const MonotoneFn& f = sys.nonlinearities.front();
  FilippovInterval at_min = snapped_interval(f, x.minCoeff(), snap);
  FilippovInterval at_max = snapped_interval(f, x.maxCoeff(), snap);
  return std::max(at_min.lo, at_max.lo) <= std::min(at_min.hi, at_max.hi);
}

bool in_Q(double delta, const Eigen::VectorXd& x, double snap) {
  if (!(delta > 0.0)) raise(ErrorKind::ValidationError, "delta must be positive");
  if (!x.allFinite()) raise(ErrorKind::NonFiniteState, "state must be finite");
  double k_lo = std::ceil((x.maxCoeff() - snap) / delta - 0.5);
  double k_hi = std::floor((x.minCoeff() + snap) / delta + 0.5);
  return k_lo <= k_hi;
}

ScenarioClass classify_scenario(const ConsensusSystem& sys) {
  StructureReport st = analyze_structure(sys.graph);
  bool symmetric_shared =
      sys.homogeneous && sys.nonlinearities.front().descriptor().kind == "symmetric";
  if (st.has_spanning_tree && symmetric_shared) return ScenarioClass::Corollary1;
  if (st.has_spanning_tree && sys.homogeneous) return ScenarioClass::Theorem2;
  if (st.strongly_connected) return ScenarioClass::Theorem1;
  return ScenarioClass::Unsupported;
}

double chatter_slack(const ConsensusSystem& sys, const Trajectory& traj,
                     const IntegratorConfig& cfg) {
  double sup_nu = 0.0;
  for (const SelectionState& sel : traj.selections)
    sup_nu = std::max(sup_nu, sel.nu.cwiseAbs().maxCoeff());
  double max_deg = sys.dimension() > 0 ? sys.lap.in_degrees.maxCoeff() : 0.0;
  return 2.0 * cfg.dt * max_deg * sup_nu;
}

ConvergenceReport convergence_verdict(const ConsensusSystem& sys, const Trajectory& traj,
                                      const IntegratorConfig& cfg,
                                      const std::optional<LeftPerronVector>& perron) {
  if (traj.size() == 0) raise(ErrorKind::ValidationError, "trajectory is empty");

  ConvergenceReport rep;
  rep.scenario_class = classify_scenario(sys);
  rep.asserted = rep.scenario_class != ScenarioClass::Unsupported;

  switch (rep.scenario_class) {
    case ScenarioClass::Corollary1: rep.limit_set_kind = LimitSetKind::Q; break;
    case ScenarioClass::Theorem2: rep.limit_set_kind = LimitSetKind::D2; break;
    case ScenarioClass::Theorem1: rep.limit_set_kind = LimitSetKind::D1; break;
    case ScenarioClass::Unsupported:
      rep.limit_set_kind = sys.homogeneous ? LimitSetKind::D2 : LimitSetKind::D1;
      break;
  }

  auto member = [&](const Eigen::VectorXd& x) {
    switch (rep.limit_set_kind) {
      case LimitSetKind::Q:
        return in_Q(sys.nonlinearities.front().descriptor().delta, x);
      case LimitSetKind::D2:
        return sys.homogeneous ? in_D2(sys, x) : in_D1(sys, x);
      case LimitSetKind::D1:
        return in_D1(sys, x);
    }
    return false;
  };

  // Earliest index from which membership holds at every later recorded step.
  long entry = -1;
  for (long k = static_cast<long>(traj.size()) - 1; k >= 0; --k) {
    if (member(traj.states[k]))
      entry = k;
    else
      break;
  }
  rep.in_limit_set = entry >= 0;
  if (rep.in_limit_set) rep.entry_time = traj.times[entry];

  const Eigen::VectorXd& last = traj.states.back();
  rep.terminal_spread = last.maxCoeff() - last.minCoeff();

  LyapunovTrace trace = evaluate_lyapunov(sys, traj, perron);
  rep.lyapunov = monotonicity_report(trace, chatter_slack(sys, traj, cfg));

  switch (rep.scenario_class) {
    case ScenarioClass::Theorem1:
      rep.lyapunov_ok = rep.lyapunov.v1 ? rep.lyapunov.v1->pass : false;
      break;
    case ScenarioClass::Theorem2:
    case ScenarioClass::Corollary1:
      rep.lyapunov_ok = rep.lyapunov.v.pass && rep.lyapunov.w.pass &&
                        (!rep.lyapunov.v1 || rep.lyapunov.v1->pass);
      break;
    case ScenarioClass::Unsupported:
      rep.lyapunov_ok = rep.lyapunov.all_pass();
      break;
  }
  return rep;
}

}  // namespace consim
