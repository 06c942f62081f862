#pragma once

#include <optional>
#include <string>

#include "consim/lyapunov.hpp"

namespace consim {

enum class ScenarioClass { Theorem1, Theorem2, Corollary1, Unsupported };
enum class LimitSetKind { D1, D2, Q };

const char* to_string(ScenarioClass c);
const char* to_string(LimitSetKind k);

/// Points within snap of a discontinuity surface count as on it; absorbs
/// event-localization rounding of integrated trajectories.
inline constexpr double kMembershipSnap = 1e-9;

/// x in D1: some constant a*1 lies in the product of per-coordinate
/// Filippov intervals, i.e. the intervals have a common point.
bool in_D1(const ConsensusSystem& sys, const Eigen::VectorXd& x,
           double snap = kMembershipSnap);

/// Homogeneous reformulation: the intervals at min x and max x intersect.
/// Throws NotHomogeneous for heterogeneous systems.
bool in_D2(const ConsensusSystem& sys, const Eigen::VectorXd& x,
           double snap = kMembershipSnap);

/// Some integer k puts every coordinate inside [(k-1/2)delta, (k+1/2)delta].
bool in_Q(double delta, const Eigen::VectorXd& x, double snap = kMembershipSnap);

/// Corollary1: spanning tree + shared symmetric quantizer. Theorem2:
/// spanning tree + homogeneous. Theorem1: strongly connected. Otherwise
/// Unsupported (simulation allowed, no verdict asserted).
ScenarioClass classify_scenario(const ConsensusSystem& sys);

/// Monotonicity budget for discrete trajectories:
/// 2 * dt * max in-degree * (largest |nu| realized along the trajectory).
double chatter_slack(const ConsensusSystem& sys, const Trajectory& traj,
                     const IntegratorConfig& cfg);

struct ConvergenceReport {
  ScenarioClass scenario_class = ScenarioClass::Unsupported;
  bool asserted = false;  // Unsupported scenarios never assert a verdict
  LimitSetKind limit_set_kind = LimitSetKind::D1;
  bool in_limit_set = false;
  std::optional<double> entry_time;  // first time membership holds through t_end
  double terminal_spread = 0.0;      // max - min of the final state
  MonotonicityReport lyapunov;
  bool lyapunov_ok = false;  // the class-guaranteed sequences pass

  bool pass() const { return !asserted || (in_limit_set && lyapunov_ok); }
};

ConvergenceReport convergence_verdict(const ConsensusSystem& sys, const Trajectory& traj,
                                      const IntegratorConfig& cfg,
                                      const std::optional<LeftPerronVector>& perron = {});

}  // namespace consim
