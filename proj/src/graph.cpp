#include "consim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace consim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorKind::SolverDidNotConverge: return "SolverDidNotConverge";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NotHomogeneous: return "NotHomogeneous";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::RequirementUnsatisfiable: return "RequirementUnsatisfiable";
  }
  return "Error";
}

Eigen::MatrixXd WeightedDigraph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) a(e.target, e.source) = e.weight;
  return a;
}

WeightedDigraph build_graph(int n, std::vector<Edge> edges,
                            std::vector<std::string> labels) {
  if (n <= 0) raise(ErrorKind::IndexOutOfRange, "node count must be positive");
  for (const Edge& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n)
      raise(ErrorKind::IndexOutOfRange,
            "edge (" + std::to_string(e.source) + ", " + std::to_string(e.target) +
                ") outside [0, " + std::to_string(n) + ")");
    if (e.source == e.target)
      raise(ErrorKind::SelfLoop, "self-loop at node " + std::to_string(e.source));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      raise(ErrorKind::NonPositiveWeight,
            "edge (" + std::to_string(e.source) + ", " + std::to_string(e.target) +
                ") has weight " + std::to_string(e.weight));
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (size_t k = 1; k < edges.size(); ++k) {
    if (edges[k].source == edges[k - 1].source && edges[k].target == edges[k - 1].target)
      raise(ErrorKind::DuplicateEdge,
            "duplicate edge (" + std::to_string(edges[k].source) + ", " +
                std::to_string(edges[k].target) + ")");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    raise(ErrorKind::IndexOutOfRange, "label count does not match node count");

  WeightedDigraph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.labels_ = std::move(labels);
  g.successors_.assign(n, {});
  for (const Edge& e : g.edges_) g.successors_[e.source].push_back(e.target);
  return g;
}

LaplacianMatrix laplacian(const WeightedDigraph& g) {
  LaplacianMatrix lap;
  lap.adjacency = g.adjacency();
  lap.in_degrees = lap.adjacency.rowwise().sum();
  lap.matrix = Eigen::MatrixXd(lap.in_degrees.asDiagonal()) - lap.adjacency;
  return lap;
}

IncidenceMatrix incidence(const WeightedDigraph& g) {
  const auto& edges = g.edges();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(g.node_count(), edges.size());
  for (size_t j = 0; j < edges.size(); ++j) {
    b(edges[j].source, j) = 1.0;
    b(edges[j].target, j) = -1.0;
  }
  return IncidenceMatrix{std::move(b)};
}

namespace {

// Iterative Tarjan; emits components in reverse topological order of the
// condensation. Returns component index per node and the component list.
struct SccResult {
  std::vector<int> component_of;
  std::vector<std::vector<int>> components;
};

SccResult tarjan_scc(int n, const std::vector<std::vector<int>>& succ) {
  SccResult res;
  res.component_of.assign(n, -1);
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;

  struct Frame {
    int node;
    size_t child;
  };
  std::vector<Frame> call;

  for (int start = 0; start < n; ++start) {
    if (index[start] != -1) continue;
    call.push_back({start, 0});
    index[start] = lowlink[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;

    while (!call.empty()) {
      Frame& fr = call.back();
      int v = fr.node;
      if (fr.child < succ[v].size()) {
        int w = succ[v][fr.child++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        call.pop_back();
        if (!call.empty())
          lowlink[call.back().node] = std::min(lowlink[call.back().node], lowlink[v]);
        if (lowlink[v] == index[v]) {
          std::vector<int> comp;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            res.component_of[w] = static_cast<int>(res.components.size());
            comp.push_back(w);
          } while (w != v);
          std::sort(comp.begin(), comp.end());
          res.components.push_back(std::move(comp));
        }
      }
    }
  }
  return res;
}

StructureReport structure_from(int n, const std::vector<std::vector<int>>& succ) {
  SccResult scc = tarjan_scc(n, succ);
  const int num_comp = static_cast<int>(scc.components.size());

  std::vector<bool> has_incoming(num_comp, false);
  for (int v = 0; v < n; ++v)
    for (int w : succ[v])
      if (scc.component_of[v] != scc.component_of[w])
        has_incoming[scc.component_of[w]] = true;

  StructureReport rep;
  rep.strongly_connected = (num_comp == 1);
  int sources = 0, source_comp = -1;
  for (int c = 0; c < num_comp; ++c) {
    if (!has_incoming[c]) {
      ++sources;
      source_comp = c;
    }
  }
  rep.has_spanning_tree = (sources == 1);
  if (rep.has_spanning_tree) rep.root_set = scc.components[source_comp];

  // Tarjan yields reverse topological order; flip so sources come first.
  rep.scc_decomposition.assign(scc.components.rbegin(), scc.components.rend());
  return rep;
}

}  // namespace

StructureReport analyze_structure(const WeightedDigraph& g) {
  return structure_from(g.node_count(), g.successors());
}

LeftPerronVector left_perron(const LaplacianMatrix& lap, double tol) {
  const int n = static_cast<int>(lap.matrix.rows());
  if (!(tol > 0.0)) raise(ErrorKind::SolverDidNotConverge, "tolerance must be positive");

  // Re-validate strong connectivity from the adjacency pattern.
  std::vector<std::vector<int>> succ(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && lap.adjacency(i, j) > 0.0) succ[j].push_back(i);
  if (!structure_from(n, succ).strongly_connected)
    raise(ErrorKind::NotStronglyConnected, "left Perron vector requires a strongly connected digraph");

  LeftPerronVector out;
  if (n == 1) {
    out.w = Eigen::VectorXd::Ones(1);
    out.residual = 0.0;
    out.psd_certificate = 0.0;
    return out;
  }

  const Eigen::MatrixXd lt = lap.matrix.transpose();
  const double scale = std::max(1.0, lt.cwiseAbs().maxCoeff());

  auto residual_of = [&](const Eigen::VectorXd& w) {
    return (lt * w).cwiseAbs().maxCoeff();
  };

  // Inverse iteration on L^T with a tiny shift standing in for the zero
  // eigenvalue; converges in a handful of iterations at desk scale.
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  const double shift = 1e-10 * scale;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lt - shift * Eigen::MatrixXd::Identity(n, n));
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd y = lu.solve(w);
    double norm = y.lpNorm<1>();
    if (!(norm > 0.0) || !y.allFinite()) break;
    y /= norm;
    if (y.sum() < 0.0) y = -y;
    w = y;
    if (residual_of(w) <= tol && w.minCoeff() > 0.0) {
      converged = true;
      break;
    }
  }

  if (!converged && n <= 64) {
    // Full eigendecomposition fallback: take the eigenvector of the smallest
    // |eigenvalue| of L^T.
    Eigen::EigenSolver<Eigen::MatrixXd> es(lt);
    int best = 0;
    for (int k = 1; k < n; ++k)
      if (std::abs(es.eigenvalues()(k)) < std::abs(es.eigenvalues()(best))) best = k;
    Eigen::VectorXd cand = es.eigenvectors().col(best).real();
    double norm = cand.lpNorm<1>();
    if (norm > 0.0) {
      cand /= norm;
      if (cand.sum() < 0.0) cand = -cand;
      if (residual_of(cand) <= tol && cand.minCoeff() > 0.0) {
        w = cand;
        converged = true;
      }
    }
  }

  if (!converged)
    raise(ErrorKind::SolverDidNotConverge, "left Perron iteration did not reach tolerance");

  w /= w.sum();
  out.w = w;
  out.residual = residual_of(w);

  Eigen::MatrixXd lw = lap.matrix.transpose() * w.asDiagonal();
  Eigen::MatrixXd sym = 0.5 * (lw + lw.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> saes(sym, Eigen::EigenvaluesOnly);
  out.psd_certificate = saes.eigenvalues().minCoeff();
  return out;
}

}  // namespace consim
