// Brute-force reference implementations used only by tests. Everything here
// is deliberately independent of the library's computation paths.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "consim/graph.hpp"
#include "consim/nonlinearity.hpp"

namespace oracle {

// All-pairs reachability by BFS over the edge lists.
inline std::vector<std::vector<bool>> reachability(const consim::WeightedDigraph& g) {
  const int n = g.node_count();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    reach[s][s] = true;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : g.successors()[v])
        if (!reach[s][w]) {
          reach[s][w] = true;
          q.push(w);
        }
    }
  }
  return reach;
}

inline bool strongly_connected(const consim::WeightedDigraph& g) {
  auto reach = reachability(g);
  for (const auto& row : reach)
    for (bool r : row)
      if (!r) return false;
  return true;
}

inline bool has_spanning_tree(const consim::WeightedDigraph& g) {
  auto reach = reachability(g);
  for (const auto& row : reach)
    if (std::all_of(row.begin(), row.end(), [](bool r) { return r; })) return true;
  return false;
}

inline std::vector<int> root_set(const consim::WeightedDigraph& g) {
  auto reach = reachability(g);
  std::vector<int> roots;
  for (int s = 0; s < g.node_count(); ++s)
    if (std::all_of(reach[s].begin(), reach[s].end(), [](bool r) { return r; }))
      roots.push_back(s);
  return roots;
}

// Filippov interval endpoints as min/max of f over the punctured ball
// (x - eps, x + eps) \ {x}, sampled on a dense grid.
inline consim::FilippovInterval filippov_bruteforce(const consim::MonotoneFn& f, double x,
                                                    double eps = 1e-9, int samples = 200) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= samples; ++k) {
    double off = eps * k / (samples + 1);
    for (double p : {x - off, x + off}) {
      double v = f.evaluate(p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

// Nonempty intersection of intervals decided by scanning candidate values.
inline bool intervals_intersect_gridscan(const std::vector<consim::FilippovInterval>& parts,
                                         int grid = 2000) {
  double lo = parts.front().lo, hi = parts.front().hi;
  for (const auto& p : parts) {
    lo = std::min(lo, p.lo);
    hi = std::max(hi, p.hi);
  }
  auto feasible = [&](double a) {
    for (const auto& p : parts)
      if (a < p.lo || a > p.hi) return false;
    return true;
  };
  if (feasible(lo) || feasible(hi)) return true;
  for (int k = 0; k <= grid; ++k)
    if (feasible(lo + (hi - lo) * k / grid)) return true;
  // endpoints of every part are the only candidates that matter for closed
  // intervals; check them too
  for (const auto& p : parts)
    if (feasible(p.lo) || feasible(p.hi)) return true;
  return false;
}

// Practical-consensus membership by scanning integer cells directly.
inline bool in_Q_kscan(double delta, const Eigen::VectorXd& x, int k_range = 100,
                       double snap = 1e-9) {
  for (int k = -k_range; k <= k_range; ++k) {
    bool ok = true;
    for (int i = 0; i < x.size(); ++i)
      if (x(i) < (k - 0.5) * delta - snap || x(i) > (k + 0.5) * delta + snap) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

// Simpson quadrature on a fixed fine grid; independent of the library's
// adaptive routine. Adequate for the step functions under test.
inline double quad_fixed(const consim::MonotoneFn& f, double a, double b, int cells = 200000) {
  if (a == b) return 0.0;
  double s = 1.0;
  if (a > b) {
    std::swap(a, b);
    s = -1.0;
  }
  double h = (b - a) / cells;
  double acc = 0.0;
  for (int k = 0; k < cells; ++k) {
    double x0 = a + k * h;
    acc += (f.evaluate(x0) + 4.0 * f.evaluate(x0 + 0.5 * h) + f.evaluate(x0 + h)) * h / 6.0;
  }
  return s * acc;
}

// Deterministic splitmix64-based uniform sampler for property tests.
class Rand {
public:
  explicit Rand(std::uint64_t seed) : state_(seed) {}

  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

private:
  std::uint64_t state_;
};

// Random digraph with the requested structural property (rejection sampling).
inline consim::WeightedDigraph random_digraph(Rand& rng, int n, double p, bool need_spanning_tree,
                                              bool need_strongly_connected) {
  for (int attempt = 0; attempt < 20000; ++attempt) {
    std::vector<consim::Edge> edges;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        if (s != t && rng.uniform() < p) edges.push_back({s, t, rng.uniform(0.5, 1.5)});
    consim::WeightedDigraph g = consim::build_graph(n, std::move(edges));
    if (need_strongly_connected && !strongly_connected(g)) continue;
    if (need_spanning_tree && !has_spanning_tree(g)) continue;
    return g;
  }
  throw std::runtime_error("oracle::random_digraph: rejection sampling failed");
}

}  // namespace oracle
