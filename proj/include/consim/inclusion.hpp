#pragma once

#include <Eigen/Dense>
#include <vector>

#include "consim/graph.hpp"
#include "consim/nonlinearity.hpp"

namespace consim {

// The protocol x' = -L f(x) with per-node monotone nonlinearities, read as
// the inclusion x' in -L x (product of per-coordinate Filippov intervals).
struct ConsensusSystem {
  WeightedDigraph graph;
  LaplacianMatrix lap;
  std::vector<MonotoneFn> nonlinearities;
  bool homogeneous = false;

  int dimension() const { return graph.node_count(); }
};

/// Validates nonlinearity count and caches the Laplacian; homogeneous is
/// derived from descriptor equality.
ConsensusSystem make_system(WeightedDigraph g, std::vector<MonotoneFn> fs);

/// One element of the inclusion's right-hand side.
struct SelectionState {
  Eigen::VectorXd nu;              // nu_i in [f_i(x_i-), f_i(x_i+)]
  std::vector<bool> sliding_mask;  // coordinates in genuine sliding motion
  Eigen::VectorXd derivative;      // exactly -L * nu
};

/// Per-coordinate Filippov intervals at x.
std::vector<FilippovInterval> set_valued_rhs(const ConsensusSystem& sys,
                                             const Eigen::VectorXd& x);

/// Midpoint selection: nu_i = interval midpoint (the single value at
/// continuity points); deterministic and reproducible.
SelectionState nominal_selection(const ConsensusSystem& sys, const Eigen::VectorXd& x);

/// Equivalent-control selection: on active coordinates, solve (L nu)_i = 0
/// so their flow is tangent to the discontinuity surface; clamp solutions
/// into their intervals. sliding_mask is true where no clamping was needed.
SelectionState sliding_selection(const ConsensusSystem& sys, const Eigen::VectorXd& x,
                                 const std::vector<bool>& active);

/// As above with explicit values for inactive coordinates and explicit
/// admissible intervals (the integrator widens intervals for chatter-pinned
/// coordinates).
SelectionState equivalent_control(const LaplacianMatrix& lap,
                                  const std::vector<FilippovInterval>& intervals,
                                  const Eigen::VectorXd& base,
                                  const std::vector<bool>& active);

}  // namespace consim
