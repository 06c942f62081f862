#include <doctest.h>

#include "consim/graph.hpp"
#include "oracles.hpp"

using namespace consim;

TEST_SUITE_BEGIN("graph");

TEST_CASE("build_graph validates and normalizes") {
  SUBCASE("adjacency orientation: edge 0->1 sets a_10") {
    auto g = build_graph(2, {{0, 1, 1.0}});
    Eigen::MatrixXd a = g.adjacency();
    CHECK(a(1, 0) == 1.0);
    CHECK(a(0, 1) == 0.0);
  }
  SUBCASE("single isolated node") {
    auto g = build_graph(1, {});
    CHECK(g.node_count() == 1);
    CHECK(g.edges().empty());
  }
  SUBCASE("self-loop rejected") {
    CHECK_THROWS_AS(build_graph(2, {{0, 0, 1.0}}), Error);
    try {
      build_graph(2, {{0, 0, 1.0}});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SelfLoop);
    }
  }
  SUBCASE("duplicate edge rejected") {
    try {
      build_graph(3, {{0, 1, 1.0}, {0, 1, 2.0}});
      FAIL("expected DuplicateEdge");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DuplicateEdge);
    }
  }
  SUBCASE("non-positive weight rejected") {
    try {
      build_graph(2, {{0, 1, 0.0}});
      FAIL("expected NonPositiveWeight");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonPositiveWeight);
    }
  }
  SUBCASE("out-of-range index rejected") {
    try {
      build_graph(2, {{0, 2, 1.0}});
      FAIL("expected IndexOutOfRange");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IndexOutOfRange);
    }
  }
  SUBCASE("edges sorted by (source, target)") {
    auto g = build_graph(3, {{2, 0, 1.0}, {0, 2, 1.0}, {0, 1, 1.0}});
    CHECK(g.edges()[0].source == 0);
    CHECK(g.edges()[0].target == 1);
    CHECK(g.edges()[2].source == 2);
  }
}

TEST_CASE("laplacian matches L = D - A") {
  SUBCASE("2-node edge v0->v1 weight 1") {
    auto lap = laplacian(build_graph(2, {{0, 1, 1.0}}));
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 0, -1, 1;
    CHECK((lap.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("2-cycle unit weights") {
    auto lap = laplacian(build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
    Eigen::MatrixXd expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK((lap.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("row sums vanish on random graphs") {
    oracle::Rand rng(42);
    for (int rep = 0; rep < 50; ++rep) {
      int n = rng.uniform_int(1, 12);
      auto g = oracle::random_digraph(rng, n, 0.4, false, false);
      auto lap = laplacian(g);
      Eigen::VectorXd row_sums = lap.matrix * Eigen::VectorXd::Ones(n);
      CHECK(row_sums.cwiseAbs().maxCoeff() <= 1e-12);
      // off-diagonal <= 0, diagonal >= 0
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j)
            CHECK(lap.matrix(i, j) >= 0.0);
          else
            CHECK(lap.matrix(i, j) <= 0.0);
        }
    }
  }
}

TEST_CASE("incidence columns carry +1 origin / -1 destination") {
  SUBCASE("single edge") {
    auto b = incidence(build_graph(2, {{0, 1, 1.0}}));
    CHECK(b.matrix(0, 0) == 1.0);
    CHECK(b.matrix(1, 0) == -1.0);
  }
  SUBCASE("2-cycle") {
    auto b = incidence(build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
    Eigen::MatrixXd expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK((b.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("columns sum to zero on random graphs") {
    oracle::Rand rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      auto g = oracle::random_digraph(rng, rng.uniform_int(2, 10), 0.4, false, false);
      auto b = incidence(g);
      if (b.matrix.cols() > 0)
        CHECK((Eigen::RowVectorXd::Ones(g.node_count()) * b.matrix).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("analyze_structure named examples") {
  SUBCASE("directed path") {
    auto st = analyze_structure(build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    CHECK(st.has_spanning_tree);
    CHECK_FALSE(st.strongly_connected);
    CHECK(st.root_set == std::vector<int>{0});
  }
  SUBCASE("3-cycle") {
    auto st = analyze_structure(build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}));
    CHECK(st.strongly_connected);
    CHECK(st.has_spanning_tree);
    CHECK(st.root_set == std::vector<int>{0, 1, 2});
    CHECK(st.scc_decomposition.size() == 1);
  }
  SUBCASE("two disjoint nodes") {
    auto st = analyze_structure(build_graph(2, {}));
    CHECK_FALSE(st.has_spanning_tree);
    CHECK(st.root_set.empty());
    CHECK(st.scc_decomposition.size() == 2);
  }
}

TEST_CASE("analyze_structure agrees with the BFS reachability oracle") {
  oracle::Rand rng(2024);
  for (int rep = 0; rep < 400; ++rep) {
    int n = rng.uniform_int(1, 6);
    double p = rng.uniform(0.05, 0.9);
    std::vector<Edge> edges;
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        if (s != t && rng.uniform() < p) edges.push_back({s, t, 1.0});
    auto g = build_graph(n, std::move(edges));
    auto st = analyze_structure(g);

    CHECK(st.strongly_connected == oracle::strongly_connected(g));
    CHECK(st.has_spanning_tree == oracle::has_spanning_tree(g));
    CHECK(st.root_set == oracle::root_set(g));

    // scc_decomposition is a partition in condensation order: no edge goes
    // from a later component back to an earlier one.
    std::vector<int> comp_of(n, -1);
    int seen = 0;
    for (size_t c = 0; c < st.scc_decomposition.size(); ++c)
      for (int v : st.scc_decomposition[c]) {
        CHECK(comp_of[v] == -1);
        comp_of[v] = static_cast<int>(c);
        ++seen;
      }
    CHECK(seen == n);
    for (const Edge& e : g.edges()) CHECK(comp_of[e.source] <= comp_of[e.target]);
  }
}

TEST_CASE("left_perron on hand-solvable cycles") {
  SUBCASE("2-cycle unit weights") {
    auto lp = left_perron(laplacian(build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}})));
    CHECK(lp.w(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lp.w(1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("3-cycle unit weights") {
    auto lp = left_perron(laplacian(build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}})));
    for (int i = 0; i < 3; ++i) CHECK(lp.w(i) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  SUBCASE("weighted 2-cycle, hand null-space oracle") {
    // Edges (0->1, w=2) and (1->0, w=1): a_10 = 2, a_01 = 1, so the
    // null-space balance w0 * a_01 = w1 * a_10 gives w0 = 2 w1.
    auto lap = laplacian(build_graph(2, {{0, 1, 2.0}, {1, 0, 1.0}}));
    auto lp = left_perron(lap);
    CHECK(lp.w(0) == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(lp.w(1) == doctest::Approx(1.0 / 3).epsilon(1e-10));
    CHECK(lp.residual <= 1e-10);
  }
  SUBCASE("not strongly connected raises") {
    try {
      left_perron(laplacian(build_graph(2, {{0, 1, 1.0}})));
      FAIL("expected NotStronglyConnected");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotStronglyConnected);
    }
  }
}

TEST_CASE("left_perron certificate properties on random strongly connected digraphs") {
  oracle::Rand rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    int n = rng.uniform_int(2, 20);
    auto g = oracle::random_digraph(rng, n, n <= 4 ? 0.6 : 0.3, false, true);
    auto lp = left_perron(laplacian(g), 1e-10);
    CHECK(lp.w.minCoeff() > 0.0);
    CHECK(lp.residual <= 1e-10);
    CHECK(lp.w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp.psd_certificate >= -1e-10);
  }
}

TEST_SUITE_END();
