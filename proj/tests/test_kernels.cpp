// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ust3d/resistance.hpp"
#include "ust3d/treewalk.hpp"
#include "ust3d/wilson.hpp"

using namespace ust3d;

namespace {

SpanningTree single_edge() {
  SpanningTree t;
  t.add_child({1, 0, 0}, t.add_root(kOrigin));
  t.mark_all_complete();
  return t;
}

}  // namespace

TEST(Resistance, SeriesAndParallel) {
  EXPECT_DOUBLE_EQ(effective_resistance(FiniteGraph::path(2), {0}, {1}), 1.0);
  EXPECT_DOUBLE_EQ(effective_resistance(FiniteGraph::path(8), {0}, {7}), 7.0);
  // two disjoint length-2 paths 0-1-3 and 0-2-3
  const FiniteGraph two(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
  EXPECT_DOUBLE_EQ(effective_resistance(two, {0}, {3}), 1.0);
  EXPECT_EQ(effective_resistance_exact(FiniteGraph::complete(4), {0}, {1}), Rational(1, 2));
}

TEST(Resistance, Rejections) {
  const auto g = FiniteGraph::path(4);
  EXPECT_THROW(effective_resistance(g, {}, {1}), InvalidInput);
  EXPECT_THROW(effective_resistance(g, {0, 1}, {1}), InvalidInput);
  EXPECT_THROW(effective_resistance(g, {0}, {9}), InvalidInput);
}

TEST(Resistance, MatchesDenseOracle) {
  Rng rng({71, 0});
  for (int trial = 0; trial < 30; ++trial) {
    // random connected graph: a random tree plus random chords
    const int n = 5 + static_cast<int>(rng.below(20));
    std::vector<FiniteGraph::Edge> edges;
    std::set<std::pair<int, int>> seen;
    for (int v = 1; v < n; ++v) {
      const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
      edges.emplace_back(u, v);
      seen.insert({u, v});
    }
    for (int k = 0; k < n; ++k) {
      int u = static_cast<int>(rng.below(n)), v = static_cast<int>(rng.below(n));
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (seen.insert({u, v}).second) edges.emplace_back(u, v);
    }
    const FiniteGraph g(n, edges);
    const std::vector<int> a{0}, b{n - 1, n / 2};
    const Rational want = oracle::dirichlet_resistance(g, a, b);
    EXPECT_EQ(effective_resistance_exact(g, a, b), want);
    EXPECT_NEAR(effective_resistance(g, a, b), static_cast<double>(want), 1e-12);
  }
}

TEST(Resistance, LargeGraphDoublePath) {
  const auto g = FiniteGraph::grid(30, 30);
  ASSERT_GT(g.vertex_count(), kExactSolveLimit);
  const double r = effective_resistance(g, {0}, {899});
  // dense grounded Laplacian, plain Gaussian elimination
  const int n = g.vertex_count() - 1;
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
  for (int v = 1; v <= n; ++v) {
    a[static_cast<std::size_t>(v - 1)][static_cast<std::size_t>(v - 1)] = g.degree(v);
    for (int w : g.neighbors(v))
      if (w != 0) a[static_cast<std::size_t>(v - 1)][static_cast<std::size_t>(w - 1)] = -1.0;
  }
  a[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(n)] = 1.0;
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) {
      auto& ri = a[static_cast<std::size_t>(i)];
      const auto& rk = a[static_cast<std::size_t>(k)];
      if (ri[static_cast<std::size_t>(k)] == 0.0) continue;
      const double f = ri[static_cast<std::size_t>(k)] / rk[static_cast<std::size_t>(k)];
      for (int j = k; j <= n; ++j) ri[static_cast<std::size_t>(j)] -= f * rk[static_cast<std::size_t>(j)];
    }
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    const auto& ri = a[static_cast<std::size_t>(i)];
    double s = ri[static_cast<std::size_t>(n)];
    for (int j = i + 1; j < n; ++j) s -= ri[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
    u[static_cast<std::size_t>(i)] = s / ri[static_cast<std::size_t>(i)];
  }
  EXPECT_NEAR(r, u.back(), 1e-9);
  const GroundedLaplacian lap(g, 17);
  EXPECT_NEAR(lap.resistance(0, 899), r, 1e-9);
  EXPECT_NEAR(lap.resistance(899, 0), r, 1e-9);
}

TEST(TreeResistance, Basics) {
  const auto t = oracle::star_tree(3);
  EXPECT_EQ(tree_resistance(t, kOrigin, Point{1, 0, 0}), 1.0);
  EXPECT_EQ(tree_resistance(t, kOrigin, kOrigin), 0.0);
  EXPECT_EQ(tree_resistance(t, Point{1, 0, 0}, Point{0, 1, 0}), 2.0);
}

TEST(TreeResistance, MatchesLaplacianSolve) {
  const auto t = oracle::random_lattice_tree(10000, {72, 0});
  const auto tg = component_graph(t, 0);
  const GroundedLaplacian lap(tg.graph);
  Rng rng({73, 0});
  for (int i = 0; i < 100; ++i) {
    const int x = static_cast<int>(rng.below(t.size())), y = static_cast<int>(rng.below(t.size()));
    const Point px = t.point(tg.tree_ids[static_cast<std::size_t>(x)]);
    const Point py = t.point(tg.tree_ids[static_cast<std::size_t>(y)]);
    EXPECT_NEAR(tree_resistance(t, px, py), lap.resistance(x, y), 1e-9);
  }
}

TEST(PointToSet, Basics) {
  const auto star = oracle::star_tree(3);
  EXPECT_DOUBLE_EQ(point_to_set_resistance(star, kOrigin, {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}}), 1.0 / 3.0);
  EXPECT_EQ(point_to_set_resistance(star, kOrigin, {kOrigin}), 0.0);
  const auto line = oracle::line_tree(10);
  EXPECT_DOUBLE_EQ(point_to_set_resistance(line, {2, 0, 0}, {{9, 0, 0}}), 7.0);
  EXPECT_THROW(point_to_set_resistance(line, {2, 0, 0}, {}), InvalidInput);
}

TEST(PointToSet, MatchesDirichletOracle) {
  Rng rng({74, 0});
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = oracle::random_lattice_tree(10 + rng.below(60), RngConfig{75, 0}.child(trial));
    const auto g = oracle::as_graph(t);
    const int x = static_cast<int>(rng.below(t.size()));
    std::vector<int> b;
    std::vector<Point> bp;
    for (int k = 0; k < 4; ++k) {
      const int v = static_cast<int>(rng.below(t.size()));
      if (v == x || std::find(b.begin(), b.end(), v) != b.end()) continue;
      b.push_back(v);
      bp.push_back(t.point(v));
    }
    if (b.empty()) continue;
    const double want = static_cast<double>(oracle::dirichlet_resistance(g, {x}, b));
    EXPECT_NEAR(point_to_set_resistance(t, t.point(x), bp), want, 1e-9);
  }
}

TEST(HeatKernel, SingleEdge) {
  const auto t = single_edge();
  for (std::uint64_t n : {0u, 2u, 10u, 200u}) EXPECT_EQ(heat_kernel_exact(t, kOrigin, n).value, 1.0);
  EXPECT_EQ(heat_kernel_exact(t, kOrigin, 3).value, 0.0);
  const auto mc = heat_kernel_mc(t, kOrigin, 6, 1000, {1, 0});
  EXPECT_EQ(mc.value, 1.0);
  EXPECT_EQ(mc.std_error, 0.0);
}

TEST(HeatKernel, Star) {
  const auto t = oracle::star_tree(3);
  EXPECT_DOUBLE_EQ(heat_kernel_exact(t, kOrigin, 2).value, 1.0 / 3.0);
}

TEST(HeatKernel, MatchesMatrixPower) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = oracle::random_lattice_tree(50, RngConfig{81, 0}.child(s));
    for (std::uint64_t n : {1u, 2u, 7u, 20u, 51u}) {
      const auto p = oracle::transition_power(t, n);
      for (TreeId x = 0; x < static_cast<TreeId>(t.size()); x += 7) {
        const auto xi = static_cast<std::size_t>(x);
        EXPECT_NEAR(heat_kernel_exact(t, t.point(x), n).value, p[xi][xi] / t.degree(x), 1e-12);
        const TreeId y = static_cast<TreeId>((xi * 13 + 5) % t.size());
        EXPECT_NEAR(heat_kernel(t, t.point(x), t.point(y), n),
                    p[xi][static_cast<std::size_t>(y)] / t.degree(y), 1e-12);
      }
    }
  }
}

TEST(HeatKernel, OddStepsVanish) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = oracle::random_lattice_tree(120, RngConfig{82, 0}.child(s));
    for (std::uint64_t n = 1; n < 60; n += 2) {
      EXPECT_EQ(heat_kernel_exact(t, kOrigin, n).value, 0.0);
      EXPECT_EQ(heat_kernel_mc(t, kOrigin, n, 200, {s, n}).value, 0.0);
    }
  }
}

TEST(HeatKernel, Symmetry) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = oracle::random_lattice_tree(50, RngConfig{83, 0}.child(s));
    for (TreeId x = 0; x < 50; x += 3)
      for (TreeId y = 0; y < 50; y += 5)
        for (std::uint64_t n : {2u, 9u, 30u})
          EXPECT_NEAR(heat_kernel(t, t.point(x), t.point(y), n),
                      heat_kernel(t, t.point(y), t.point(x), n), 1e-15);
  }
}

TEST(HeatKernel, MassConserved) {
  const auto t = oracle::random_lattice_tree(300, {84, 0});
  const auto d = distribution_after(t, kOrigin, 2000);
  EXPECT_LT(d.max_drift, 1e-10);
}

TEST(HeatKernel, McAgreesWithExact) {
  int within = 0, total = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto t = oracle::random_lattice_tree(80, RngConfig{85, 0}.child(s));
    for (std::uint64_t n : {2u, 10u, 30u}) {
      const double exact = heat_kernel_exact(t, kOrigin, n).value;
      const auto mc = heat_kernel_mc(t, kOrigin, n, 100000, RngConfig{86, s}.child(n));
      ++total;
      within += std::abs(mc.value - exact) <= 3.0 * mc.std_error;
    }
  }
  EXPECT_GE(within, total - 1);
}

TEST(HeatKernel, McIndependentOfJobs) {
  const auto t = oracle::random_lattice_tree(80, {87, 0});
  EXPECT_EQ(heat_kernel_mc(t, kOrigin, 10, 20000, {1, 0}, 1).value,
            heat_kernel_mc(t, kOrigin, 10, 20000, {1, 0}, 3).value);
}

TEST(HeatKernel, RejectsUnfinishedTrees) {
  SpanningTree t;
  const auto r = t.add_root(kOrigin);
  t.add_child({1, 0, 0}, r);
  t.set_complete(r);
  EXPECT_NO_THROW(heat_kernel_exact(t, kOrigin, 1));
  EXPECT_THROW(heat_kernel_exact(t, kOrigin, 2), RuntimeFailure);
  EXPECT_THROW(heat_kernel_mc(t, kOrigin, 2, 10, {0, 0}), RuntimeFailure);
}

TEST(ReturnBounds, BracketTheExactValue) {
  const auto t = oracle::random_lattice_tree(400, {88, 0});
  const std::vector<std::uint64_t> steps{10, 40, 100, 200};
  const auto tight = return_bounds(t, t.id(kOrigin), steps, 100);
  for (std::uint64_t d : {3u, 6u, 12u, 25u}) {
    const auto b = return_bounds(t, t.id(kOrigin), steps, d);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      EXPECT_LE(b[i].lower, tight[i].lower + 1e-15);
      EXPECT_GE(b[i].upper, tight[i].lower - 1e-15);
    }
  }
  for (const auto& b : tight) EXPECT_EQ(b.lower, b.upper);
}

TEST(Bk06, HandExamples) {
  const auto e = bk06_bound_check(single_edge(), kOrigin, 1);
  EXPECT_EQ(e.volume, 2u);
  EXPECT_EQ(e.n, 4u);
  EXPECT_EQ(e.lhs, 1.0);
  EXPECT_EQ(e.rhs, 1.0);
  EXPECT_TRUE(e.holds());
  const auto s = bk06_bound_check(oracle::star_tree(3), kOrigin, 1);
  EXPECT_EQ(s.volume, 4u);
  EXPECT_EQ(s.n, 8u);
  EXPECT_DOUBLE_EQ(s.lhs, 1.0 / 3.0);
  EXPECT_EQ(s.rhs, 0.5);
  EXPECT_TRUE(s.holds());
}

TEST(Bk06, HoldsOnRandomTrees) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto t = oracle::random_lattice_tree(200, RngConfig{89, 0}.child(s));
    for (std::uint64_t r = 1; r <= 4; ++r) EXPECT_TRUE(bk06_bound_check(t, kOrigin, r).holds());
  }
}
