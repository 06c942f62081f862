#include "consim/lyapunov.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace consim {

namespace {
constexpr double kTieTol = 1e-9;
}

LyapunovTrace evaluate_lyapunov(const ConsensusSystem& sys, const Trajectory& traj,
                                const std::optional<LeftPerronVector>& perron) {
  if (traj.size() == 0) raise(ErrorKind::ValidationError, "trajectory is empty");
  const int n = sys.dimension();
  LyapunovTrace trace;
  trace.times = traj.times;
  trace.v_max.reserve(traj.size());
  trace.w_neg_min.reserve(traj.size());
  trace.argmax_sets.reserve(traj.size());
  trace.argmin_sets.reserve(traj.size());
  if (perron) trace.v1.reserve(traj.size());

  for (size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd& x = traj.states[k];
    double vmax = x.maxCoeff();
    double vmin = x.minCoeff();
    trace.v_max.push_back(vmax);
    trace.w_neg_min.push_back(-vmin);
    std::vector<int> amax, amin;
    for (int i = 0; i < n; ++i) {
      if (x(i) >= vmax - kTieTol) amax.push_back(i);
      if (x(i) <= vmin + kTieTol) amin.push_back(i);
    }
    trace.argmax_sets.push_back(std::move(amax));
    trace.argmin_sets.push_back(std::move(amin));
    if (perron) {
      double v1 = 0.0;
      for (int i = 0; i < n; ++i)
        v1 += perron->w(i) * sys.nonlinearities[i].primitive(x(i));
      trace.v1.push_back(v1);
    }
  }
  return trace;
}

namespace {

SequenceMonotonicity sequence_monotonicity(const std::vector<double>& seq, double slack) {
  SequenceMonotonicity out;
  for (size_t k = 0; k + 1 < seq.size(); ++k) {
    double inc = seq[k + 1] - seq[k];
    if (out.worst_step < 0 || inc > out.max_increase) {
      out.max_increase = inc;
      out.worst_step = static_cast<int>(k);
    }
  }
  out.pass = out.max_increase <= slack;
  return out;
}

}  // namespace

MonotonicityReport monotonicity_report(const LyapunovTrace& trace, double slack) {
  if (slack < 0.0) raise(ErrorKind::ValidationError, "slack must be non-negative");
  MonotonicityReport rep;
  rep.slack = slack;
  rep.v = sequence_monotonicity(trace.v_max, slack);
  rep.w = sequence_monotonicity(trace.w_neg_min, slack);
  if (trace.has_v1()) rep.v1 = sequence_monotonicity(trace.v1, slack);
  return rep;
}

void write_lyapunov_csv(const LyapunovTrace& trace, std::ostream& os) {
  os << "t,V,W,V1\n";
  char buf[140];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t k = 0; k < trace.times.size(); ++k) {
    double v1 = trace.has_v1() ? trace.v1[k] : nan;
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", trace.times[k],
                  trace.v_max[k], trace.w_neg_min[k], v1);
    os << buf;
  }
}

}  // namespace consim
