#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "consim/inclusion.hpp"

namespace consim {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  double event_tolerance = 1e-9;
  int chatter_window = 4;
  /// 0 requests the automatic one-step overshoot bound
  /// dt * max in-degree * sup|f| (estimated over the initial box).
  double snap_band = 0.0;

  void validate() const;
};

enum class EventKind { Crossing, SlidingEngage, SlidingRelease };

const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;
  int coordinate = 0;
  double point = 0.0;  // the discontinuity involved
  EventKind kind = EventKind::Crossing;
  bool via_chatter = false;  // engagement forced by the chattering fallback
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<SelectionState> selections;
  std::vector<Event> events;

  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  size_t size() const { return times.size(); }
};

/// dt = (min quantizer step)/100 when the system has quantizers, else 1e-3.
double suggested_dt(const ConsensusSystem& sys);

/// Event-aware forward Euler over the inclusion: steps split exactly at
/// discontinuity crossings, coordinates whose flow reverses across a surface
/// are pinned there under the equivalent-control selection until it leaves
/// the admissible interval. Deterministic per (sys, x0, cfg).
Trajectory integrate(const ConsensusSystem& sys, const Eigen::VectorXd& x0,
                     const IntegratorConfig& cfg);

/// Independent trajectories, order preserving; may run concurrently but the
/// result is scheduling-independent.
std::vector<Trajectory> batch_integrate(const ConsensusSystem& sys,
                                        const std::vector<Eigen::VectorXd>& x0s,
                                        const IntegratorConfig& cfg);

/// Header t,x0,...,x{n-1},nu0,...,nu{n-1}; one row per accepted step,
/// 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
/// Header t,coordinate,point,kind.
void write_events_csv(const Trajectory& traj, std::ostream& os);

}  // namespace consim
