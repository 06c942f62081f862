#include "consim/inclusion.hpp"

#include <cmath>

namespace consim {

ConsensusSystem make_system(WeightedDigraph g, std::vector<MonotoneFn> fs) {
  if (static_cast<int>(fs.size()) != g.node_count())
    raise(ErrorKind::ValidationError,
          "expected " + std::to_string(g.node_count()) + " nonlinearities, got " +
              std::to_string(fs.size()));
  bool homogeneous = true;
  for (size_t i = 1; i < fs.size(); ++i)
    if (!(fs[i].descriptor() == fs[0].descriptor())) {
      homogeneous = false;
      break;
    }
  ConsensusSystem sys;
  sys.lap = laplacian(g);
  sys.graph = std::move(g);
  sys.nonlinearities = std::move(fs);
  sys.homogeneous = homogeneous;
  return sys;
}

std::vector<FilippovInterval> set_valued_rhs(const ConsensusSystem& sys,
                                             const Eigen::VectorXd& x) {
  if (!x.allFinite()) raise(ErrorKind::NonFiniteState, "state must be finite");
  std::vector<FilippovInterval> out(sys.dimension());
  for (int i = 0; i < sys.dimension(); ++i)
    out[i] = filippov_interval(sys.nonlinearities[i], x(i));
  return out;
}

SelectionState nominal_selection(const ConsensusSystem& sys, const Eigen::VectorXd& x) {
  auto intervals = set_valued_rhs(sys, x);
  const int n = sys.dimension();
  SelectionState sel;
  sel.nu.resize(n);
  for (int i = 0; i < n; ++i) sel.nu(i) = intervals[i].midpoint();
  sel.sliding_mask.assign(n, false);
  sel.derivative = -(sys.lap.matrix * sel.nu);
  return sel;
}

SelectionState equivalent_control(const LaplacianMatrix& lap,
                                  const std::vector<FilippovInterval>& intervals,
                                  const Eigen::VectorXd& base,
                                  const std::vector<bool>& active) {
  const int n = static_cast<int>(base.size());
  SelectionState sel;
  sel.nu = base;
  sel.sliding_mask.assign(n, false);

  std::vector<int> act;
  for (int i = 0; i < n; ++i)
    if (active[i]) act.push_back(i);

  if (!act.empty()) {
    const int m = static_cast<int>(act.size());
    // Rows of the active coordinates, split into active/inactive columns:
    // A nu_act = -(B nu_inact) makes the active flow tangent to its surface.
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a(r, c) = lap.matrix(act[r], act[c]);
      for (int j = 0; j < n; ++j)
        if (!active[j]) b(r) -= lap.matrix(act[r], j) * base(j);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::VectorXd solved;
    if (qr.rank() == m) {
      solved = qr.solve(b);
    } else {
      // Tikhonov-regularized normal equations for the singular case.
      Eigen::MatrixXd reg = a.transpose() * a + 1e-12 * Eigen::MatrixXd::Identity(m, m);
      solved = reg.ldlt().solve(a.transpose() * b);
    }

    for (int r = 0; r < m; ++r) {
      int i = act[r];
      double v = solved(r);
      if (intervals[i].contains(v)) {
        sel.nu(i) = v;
        sel.sliding_mask[i] = true;
      } else {
        sel.nu(i) = std::clamp(v, intervals[i].lo, intervals[i].hi);
      }
    }
  }

  sel.derivative = -(lap.matrix * sel.nu);
  return sel;
}

SelectionState sliding_selection(const ConsensusSystem& sys, const Eigen::VectorXd& x,
                                 const std::vector<bool>& active) {
  if (static_cast<int>(active.size()) != sys.dimension())
    raise(ErrorKind::ValidationError, "active mask size must match the state dimension");
  auto intervals = set_valued_rhs(sys, x);
  Eigen::VectorXd base(sys.dimension());
  for (int i = 0; i < sys.dimension(); ++i) base(i) = intervals[i].midpoint();
  return equivalent_control(sys.lap, intervals, base, active);
}

}  // namespace consim
