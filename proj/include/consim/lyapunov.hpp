#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "consim/integrator.hpp"

namespace consim {

// Pointwise evaluation of V = max_i x_i, W = -min_i x_i and, when a left
// Perron vector is available, V1 = sum_i w_i F_i(x_i) along a trajectory.
struct LyapunovTrace {
  std::vector<double> times;
  std::vector<double> v_max;
  std::vector<double> w_neg_min;
  std::vector<double> v1;  // empty when no Perron vector was supplied
  std::vector<std::vector<int>> argmax_sets;  // tie tolerance 1e-9
  std::vector<std::vector<int>> argmin_sets;

  bool has_v1() const { return !v1.empty(); }
};

LyapunovTrace evaluate_lyapunov(const ConsensusSystem& sys, const Trajectory& traj,
                                const std::optional<LeftPerronVector>& perron = {});

struct SequenceMonotonicity {
  double max_increase = 0.0;  // max over k of seq[k+1] - seq[k]
  int worst_step = -1;
  bool pass = true;           // max_increase <= slack
};

struct MonotonicityReport {
  double slack = 0.0;
  SequenceMonotonicity v;
  SequenceMonotonicity w;
  std::optional<SequenceMonotonicity> v1;

  bool all_pass() const { return v.pass && w.pass && (!v1 || v1->pass); }
};

MonotonicityReport monotonicity_report(const LyapunovTrace& trace, double slack);

/// Header t,V,W,V1 (V1 is nan when absent); 17 significant digits.
void write_lyapunov_csv(const LyapunovTrace& trace, std::ostream& os);

}  // namespace consim
