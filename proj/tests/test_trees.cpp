// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ust3d/stats.hpp"
#include "ust3d/ust.hpp"
#include "ust3d/wilson.hpp"

using namespace ust3d;

namespace {

std::vector<std::uint64_t> tree_histogram(const FiniteGraph& g, std::uint64_t samples,
                                          RngConfig cfg, std::optional<std::vector<int>> order = {}) {
  const auto all = oracle::enumerate_spanning_trees(g);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = i;
  std::vector<std::uint64_t> counts(all.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) ++counts[index.at(wilson_finite(g, 0, cfg.child(s), order).edge_ids(g))];
  return counts;
}

bool acyclic_connected_restriction(const SpanningTree& t, std::int64_t r) {
  // Edges with both ends in the window, checked with union-find.
  const auto pts = Box(kOrigin, r, Metric::linf).points();
  PointMap<std::size_t> idx;
  for (std::size_t i = 0; i < pts.size(); ++i) idx[pts[i]] = i;
  std::vector<std::size_t> up(pts.size());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = i;
  auto find = [&](std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  };
  for (const Point& p : pts) {
    if (!t.contains(p)) return false;
    const TreeId v = t.id(p);
    const TreeId par = t.parent(v);
    if (par == SpanningTree::kNone || !idx.contains(t.point(par))) continue;
    const auto a = find(idx[p]), b = find(idx[t.point(par)]);
    if (a == b) return false;
    up[a] = b;
  }
  return true;
}

}  // namespace

TEST(MatrixTree, SmallGraphs) {
  EXPECT_EQ(matrix_tree_count(FiniteGraph::complete(3)), 3);
  EXPECT_EQ(matrix_tree_count(FiniteGraph::cycle(4)), 4);
  EXPECT_EQ(matrix_tree_count(FiniteGraph::complete(6)), 1296);  // n^(n-2)
  EXPECT_EQ(matrix_tree_count(FiniteGraph::path(5)), 1);
}

TEST(MatrixTree, GridAgreesWithEnumeration) {
  const auto g = FiniteGraph::grid(3, 3);
  ASSERT_EQ(g.edges().size(), 12u);
  const auto all = oracle::enumerate_spanning_trees(g);
  EXPECT_EQ(matrix_tree_count(g), BigInt(all.size()));
  EXPECT_EQ(all.size(), 192u);
}

TEST(FiniteGraphTest, Rejections) {
  EXPECT_THROW(FiniteGraph(3, {{0, 1}}), InvalidInput);
  EXPECT_THROW(FiniteGraph(2, {{0, 0}, {0, 1}}), InvalidInput);
  EXPECT_THROW(FiniteGraph(2, {{0, 1}, {1, 0}}), InvalidInput);
}

TEST(WilsonFinite, TreeIsReproduced) {
  const auto g = FiniteGraph::path(6);
  for (std::uint64_t s = 0; s < 50; ++s)
    EXPECT_EQ(wilson_finite(g, 2, {s, 0}).edge_ids(g), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(WilsonFinite, UniformOnSmallGraphs) {
  for (const auto& g : {FiniteGraph::complete(3), FiniteGraph::cycle(4), FiniteGraph::grid(3, 3)}) {
    const auto counts = tree_histogram(g, 30000, {31, 0});
    EXPECT_GT(chi_square_uniform(counts).p_value, 1e-3);
  }
}

TEST(WilsonFinite, UniformUnderAnyOrder) {
  const auto g = FiniteGraph::grid(3, 3);
  const std::vector<int> order{8, 4, 0, 2, 6, 1, 3, 5, 7};
  EXPECT_GT(chi_square_uniform(tree_histogram(g, 30000, {32, 0}, order)).p_value, 1e-3);
}

TEST(WilsonFinite, Rejections) {
  const auto g = FiniteGraph::cycle(4);
  EXPECT_THROW(wilson_finite(g, 7, {0, 0}), InvalidInput);
  EXPECT_THROW(wilson_finite(g, 0, {0, 0}, std::vector<int>{1, 2}), InvalidInput);
}

TEST(WindowUst, RadiusZero) {
  UstWindowConfig cfg;
  cfg.radius = 0;
  const auto t = sample_window_ust(cfg, {1, 0});
  ASSERT_TRUE(t.contains(kOrigin));
  // only the root branch: one component, a simple path
  EXPECT_EQ(t.roots().size(), 1u);
  for (std::size_t v = 0; v < t.size(); ++v) EXPECT_LE(t.degree(static_cast<TreeId>(v)), 2);
}

TEST(WindowUst, Rejections) {
  UstWindowConfig cfg;
  cfg.radius = -1;
  EXPECT_THROW(sample_window_ust(cfg, {1, 0}), InvalidInput);
  cfg.radius = 2;
  cfg.root_factor = 1;
  EXPECT_THROW(sample_window_ust(cfg, {1, 0}), InvalidInput);
}

TEST(WindowUst, RestrictionIsAForestSpanningTheWindow) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    UstWindowConfig cfg;
    cfg.radius = 4;
    const auto t = sample_window_ust(cfg, {40, s});
    EXPECT_TRUE(acyclic_connected_restriction(t, 4));
    int max_deg = 0;
    for (std::size_t v = 0; v < t.size(); ++v) max_deg = std::max(max_deg, t.degree(static_cast<TreeId>(v)));
    EXPECT_LE(max_deg, 6);
    EXPECT_EQ(t.total_degree(), 2 * (t.size() - t.roots().size()));
    for (const Point& p : Box(kOrigin, 3, Metric::linf).points()) EXPECT_TRUE(t.complete(t.id(p)));
  }
}

TEST(WindowUst, Deterministic) {
  UstWindowConfig cfg;
  cfg.radius = 3;
  std::stringstream a, b;
  write_tree(a, sample_window_ust(cfg, {9, 0}));
  write_tree(b, sample_window_ust(cfg, {9, 0}));
  EXPECT_EQ(a.str(), b.str());
}

namespace {

// Coarse statistics of the tree restricted to B_inf(0, 1).
struct LocalStats {
  std::vector<std::uint64_t> origin_degree = std::vector<std::uint64_t>(7, 0);
  std::vector<std::uint64_t> inner_edges = std::vector<std::uint64_t>(27, 0);
};

void record(LocalStats& st, const SpanningTree& t) {
  ++st.origin_degree[static_cast<std::size_t>(t.degree(t.id(kOrigin)))];
  std::size_t edges = 0;
  for (const Point& p : Box(kOrigin, 1, Metric::linf).points()) {
    const TreeId par = t.parent(t.id(p));
    if (par != SpanningTree::kNone && linf_distance(t.point(par), kOrigin) <= 1) ++edges;
  }
  ++st.inner_edges[edges];
}

}  // namespace

TEST(WindowUst, TruncationStability) {
  LocalStats k4, k8;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    UstWindowConfig cfg;
    cfg.radius = 1;
    cfg.root_factor = 4;
    record(k4, sample_window_ust(cfg, RngConfig{41, 0}.child(s)));
    cfg.root_factor = 8;
    record(k8, sample_window_ust(cfg, RngConfig{42, 0}.child(s)));
  }
  EXPECT_GT(chi_square_two_sample(k4.origin_degree, k8.origin_degree).p_value, 1e-3);
  EXPECT_GT(chi_square_two_sample(k4.inner_edges, k8.inner_edges).p_value, 1e-3);
}

TEST(WindowUst, AdaptiveGrowthMatchesFullWindow) {
  // Completing only the origin must give the same law for its neighbourhood
  // as processing the whole window.
  std::vector<std::uint64_t> full(7, 0), adaptive(7, 0), spiral(7, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    UstWindowConfig cfg;
    cfg.radius = 2;
    cfg.root_factor = 3;
    const auto t = sample_window_ust(cfg, RngConfig{43, 0}.child(s));
    ++full[static_cast<std::size_t>(t.degree(t.id(kOrigin)))];
    cfg.order = VertexOrder::spiral;
    const auto u = sample_window_ust(cfg, RngConfig{45, 0}.child(s));
    ++spiral[static_cast<std::size_t>(u.degree(u.id(kOrigin)))];
    LatticeWilson lw(6, RngConfig{44, 0}.child(s));
    const auto ball = lw.grow_ball(kOrigin, 1, 2);
    ASSERT_FALSE(ball.clipped);
    ++adaptive[ball.volume() - 1];
  }
  EXPECT_GT(chi_square_two_sample(full, adaptive).p_value, 1e-3);
  EXPECT_GT(chi_square_two_sample(full, spiral).p_value, 1e-3);
}

TEST(GrowBall, ClippedAtWindowEdge) {
  LatticeWilson lw(40, {3, 0});
  const auto ball = lw.grow_ball(kOrigin, 500, 3);
  EXPECT_TRUE(ball.clipped);
  const auto inner = lw.grow_ball(kOrigin, 1, 3);
  EXPECT_FALSE(inner.clipped);
}

TEST(TreeQueries, PathAgreesWithBfs) {
  const auto t = oracle::random_lattice_tree(3000, {51, 0});
  Rng rng({52, 0});
  for (int i = 0; i < 200; ++i) {
    const Point x = t.point(static_cast<TreeId>(rng.below(t.size())));
    const Point y = t.point(static_cast<TreeId>(rng.below(t.size())));
    const auto p = path_in_tree(t, x, y);
    EXPECT_EQ(p.vertices(), oracle::bfs_path(t, x, y));
    EXPECT_EQ(intrinsic_distance(t, x, y), p.length());
  }
}

TEST(TreeQueries, TrivialPaths) {
  const auto t = oracle::line_tree(5);
  EXPECT_EQ(path_in_tree(t, {2, 0, 0}, {2, 0, 0}).length(), 0u);
  const Point x{3, 0, 0};
  const Point par = t.point(t.parent(t.id(x)));
  EXPECT_EQ(path_in_tree(t, x, par).vertices(), (std::vector<Point>{x, par}));
}

TEST(TreeQueries, Balls) {
  const auto t = oracle::line_tree(40);
  EXPECT_EQ(intrinsic_ball(t, Point{20, 0, 0}, 0).volume(), 1u);
  for (std::uint64_t r = 0; r <= 20; ++r)
    EXPECT_EQ(intrinsic_ball(t, Point{20, 0, 0}, r).volume(), 2 * r + 1);
  const auto u = oracle::random_lattice_tree(2000, {53, 0});
  std::size_t prev = 0;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const auto v = intrinsic_ball(u, kOrigin, r).volume();
    EXPECT_LE(prev, v);
    prev = v;
  }
}

TEST(TreeQueries, DegreeMeasure) {
  const auto t = oracle::star_tree(3);
  EXPECT_EQ(degree_measure(t, kOrigin), 3);
  EXPECT_EQ(degree_measure(t, Point{1, 0, 0}), 1);
  const auto u = oracle::random_lattice_tree(500, {54, 0});
  EXPECT_EQ(u.total_degree(), 2 * (u.size() - 1));
}

TEST(TreeQueries, Rejections) {
  SpanningTree t;
  const auto r = t.add_root(kOrigin);
  EXPECT_THROW(t.add_child({2, 0, 0}, r), InvalidInput);
  EXPECT_THROW(t.add_child(kOrigin, r), InvalidInput);
  EXPECT_THROW(t.id({5, 5, 5}), InvalidInput);
}

TEST(TreeFile, RoundTripIsByteIdentical) {
  UstWindowConfig cfg;
  cfg.radius = 3;
  const auto t = sample_window_ust(cfg, {61, 0});
  std::stringstream a;
  write_tree(a, t);
  const auto u = read_tree(a);
  EXPECT_EQ(u.size(), t.size());
  std::stringstream b;
  write_tree(b, u);
  EXPECT_EQ(a.str(), b.str());
  for (std::size_t v = 0; v < t.size(); ++v) {
    const Point p = t.point(static_cast<TreeId>(v));
    EXPECT_EQ(u.complete(u.id(p)), t.complete(static_cast<TreeId>(v)));
    EXPECT_EQ(u.degree(u.id(p)), t.degree(static_cast<TreeId>(v)));
  }
}

TEST(TreeFile, Rejections) {
  std::stringstream bad_header("ust3d-tree v2 2 0 -1 0\n1 0 0 0 0 0\n");
  EXPECT_THROW(read_tree(bad_header), InvalidInput);
  std::stringstream count("ust3d-tree v1 3 0 -1 0\n1 0 0 0 0 0\n");
  EXPECT_THROW(read_tree(count), InvalidInput);
  std::stringstream cycle("ust3d-tree v1 2 0 -1 0\n1 0 0 0 0 0\n0 0 0 1 0 0\n");
  EXPECT_THROW(read_tree(cycle), InvalidInput);
  std::stringstream far("ust3d-tree v1 2 0 -1 0\n3 0 0 0 0 0\n");
  EXPECT_THROW(read_tree(far), InvalidInput);
  std::stringstream junk("ust3d-tree v1 2 0 -1 0\n1 0 0 0 0\n");
  EXPECT_THROW(read_tree(junk), InvalidInput);
}
