#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "consim/errors.hpp"

namespace consim {

/// Directed edge source -> target with a strictly positive weight.
struct Edge {
  int source = 0;
  int target = 0;
  double weight = 1.0;
};

// Communication topology. The adjacency convention follows the receiver-row
// form: an edge (j -> i) sets a_ij = weight, i.e. row = receiver, column =
// sender. Instances are immutable after construction and safe to share
// across threads.
class WeightedDigraph {
public:
  WeightedDigraph() = default;  // empty placeholder; build_graph makes real ones

  int node_count() const { return n_; }
  /// Edges sorted by (source, target); this ordering fixes incidence columns.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Out-neighbor lists (edge direction = information flow).
  const std::vector<std::vector<int>>& successors() const { return successors_; }

  /// Dense adjacency with a_{target,source} = weight.
  Eigen::MatrixXd adjacency() const;

private:
  friend WeightedDigraph build_graph(int n, std::vector<Edge> edges,
                                     std::vector<std::string> labels);

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> successors_;
};

/// Validates and freezes a digraph. Throws DuplicateEdge, SelfLoop,
/// NonPositiveWeight or IndexOutOfRange.
WeightedDigraph build_graph(int n, std::vector<Edge> edges,
                            std::vector<std::string> labels = {});

/// L = D - A with D_ii = sum_j a_ij (in-degrees); rows sum to zero.
struct LaplacianMatrix {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd in_degrees;
  Eigen::MatrixXd adjacency;
};

LaplacianMatrix laplacian(const WeightedDigraph& g);

/// n x m signed matrix; column j carries +1 at the origin of edge j and -1
/// at its destination.
struct IncidenceMatrix {
  Eigen::MatrixXd matrix;
};

IncidenceMatrix incidence(const WeightedDigraph& g);

struct StructureReport {
  bool strongly_connected = false;
  bool has_spanning_tree = false;
  /// Nodes of the unique source component of the condensation (ascending);
  /// empty when no spanning tree exists.
  std::vector<int> root_set;
  /// Strongly connected components, sources of the condensation first.
  std::vector<std::vector<int>> scc_decomposition;
};

StructureReport analyze_structure(const WeightedDigraph& g);

struct LeftPerronVector {
  Eigen::VectorXd w;             // strictly positive, sums to one
  double residual = 0.0;         // ||w^T L||_inf
  double psd_certificate = 0.0;  // min eigenvalue of sym(L^T diag(w))
};

/// Positive left null vector of L, normalized to sum one, together with the
/// positive semi-definiteness certificate of sym(L^T diag(w)). Throws
/// NotStronglyConnected or SolverDidNotConverge.
LeftPerronVector left_perron(const LaplacianMatrix& lap, double tol = 1e-10);

}  // namespace consim
