// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ust3d/geometry.hpp"
#include "ust3d/lerw.hpp"
#include "ust3d/rng.hpp"
#include "ust3d/ust.hpp"

namespace ust3d {

// ---------------------------------------------------------------------------
// Finite graphs

/// Simple connected undirected graph on vertices 0..n-1.
class FiniteGraph {
 public:
  using Edge = std::pair<int, int>;

  FiniteGraph(int vertex_count, std::vector<Edge> edges) : n_(vertex_count) {
    if (vertex_count < 1) throw InvalidInput("FiniteGraph: needs at least one vertex");
    for (auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n_ || v >= n_) throw InvalidInput("FiniteGraph: bad vertex");
      if (u == v) throw InvalidInput("FiniteGraph: self-loop");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw InvalidInput("FiniteGraph: parallel edge");
    edges_ = std::move(edges);
    adj_.resize(static_cast<std::size_t>(n_));
    for (const auto& [u, v] : edges_) {
      adj_[static_cast<std::size_t>(u)].push_back(v);
      adj_[static_cast<std::size_t>(v)].push_back(u);
    }
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : adj_[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++reached;
          stack.push_back(w);
        }
    }
    if (reached != n_) throw InvalidInput("FiniteGraph: graph is disconnected");
  }

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  int degree(int v) const { return static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); }

  /// Index of edge {u, v} in edges(), or -1.
  int edge_index(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{u, v});
    return (it != edges_.end() && *it == Edge{u, v}) ? static_cast<int>(it - edges_.begin()) : -1;
  }

  static FiniteGraph complete(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return {n, std::move(e)};
  }
  static FiniteGraph cycle(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return {n, std::move(e)};
  }
  static FiniteGraph path(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return {n, std::move(e)};
  }
  /// rows x cols grid; vertex (r, c) has id r * cols + c.
  static FiniteGraph grid(int rows, int cols) {
    std::vector<Edge> e;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (c + 1 < cols) e.emplace_back(r * cols + c, r * cols + c + 1);
        if (r + 1 < rows) e.emplace_back(r * cols + c, (r + 1) * cols + c);
      }
    return {rows * cols, std::move(e)};
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

/// A rooted spanning tree of a FiniteGraph as a parent array.
struct GraphTree {
  int root = 0;
  std::vector<int> parent;  ///< -1 at the root

  /// Sorted edge indices into g.edges(); identifies the tree.
  std::vector<int> edge_ids(const FiniteGraph& g) const {
    std::vector<int> ids;
    for (int v = 0; v < static_cast<int>(parent.size()); ++v)
      if (parent[static_cast<std::size_t>(v)] >= 0)
        ids.push_back(g.edge_index(v, parent[static_cast<std::size_t>(v)]));
    std::sort(ids.begin(), ids.end());
    return ids;
  }
};

/// Wilson's algorithm on a finite graph. Vertices are processed in `order`
/// (default 0..n-1); the walk started at v draws from stream cfg.child(v).
inline GraphTree wilson_finite(const FiniteGraph& g, int root, RngConfig cfg,
                               std::optional<std::vector<int>> order = std::nullopt) {
  const int n = g.vertex_count();
  if (root < 0 || root >= n) throw InvalidInput("wilson_finite: bad root");
  if (!order) {
    order.emplace(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) (*order)[static_cast<std::size_t>(i)] = i;
  }
  GraphTree t;
  t.root = root;
  t.parent.assign(static_cast<std::size_t>(n), -1);
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<int> next(static_cast<std::size_t>(n), -1);
  in_tree[static_cast<std::size_t>(root)] = 1;
  for (int v : *order) {
    if (v < 0 || v >= n) throw InvalidInput("wilson_finite: bad vertex in order");
    if (in_tree[static_cast<std::size_t>(v)]) continue;
    Rng rng(cfg.child(static_cast<std::uint64_t>(v)));
    // Last-exit pointers: retracing them from v yields the loop erasure.
    for (int u = v; !in_tree[static_cast<std::size_t>(u)];) {
      const auto& nb = g.neighbors(u);
      const int w = nb[rng.below(nb.size())];
      next[static_cast<std::size_t>(u)] = w;
      u = w;
    }
    for (int u = v; !in_tree[static_cast<std::size_t>(u)]; u = next[static_cast<std::size_t>(u)]) {
      in_tree[static_cast<std::size_t>(u)] = 1;
      t.parent[static_cast<std::size_t>(u)] = next[static_cast<std::size_t>(u)];
    }
  }
  for (int v = 0; v < n; ++v)
    if (!in_tree[static_cast<std::size_t>(v)]) throw InvalidInput("wilson_finite: order misses a vertex");
  return t;
}

using BigInt = boost::multiprecision::cpp_int;

/// Number of spanning trees: det of the Laplacian with row/column 0 removed,
/// by fraction-free (Bareiss) elimination over arbitrary-precision integers.
inline BigInt matrix_tree_count(const FiniteGraph& g) {
  const int n = g.vertex_count() - 1;
  if (n == 0) return 1;
  std::vector<std::vector<BigInt>> a(static_cast<std::size_t>(n),
                                     std::vector<BigInt>(static_cast<std::size_t>(n), 0));
  for (int v = 1; v <= n; ++v) a[v - 1][v - 1] = g.degree(v);
  for (const auto& [u, v] : g.edges())
    if (u > 0 && v > 0) a[u - 1][v - 1] = a[v - 1][u - 1] = -1;
  BigInt prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k] == 0) {
      int p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  BigInt det = a[n - 1][n - 1];
  return sign > 0 ? det : BigInt(-det);
}

// ---------------------------------------------------------------------------
// Lattice Wilson sampler

enum class VertexOrder { lexicographic, spiral, supplied };

struct UstWindowConfig {
  std::int64_t radius = 0;       ///< window B_inf(0, R)
  std::int64_t root_factor = 4;  ///< K; the root branch runs to exit of B_inf(0, K R)
  VertexOrder order = VertexOrder::lexicographic;
  std::vector<Point> supplied_order;
  std::uint64_t step_cap = 1'000'000'000;

  std::int64_t wired_radius() const { return radius * root_factor; }
};

/// Wilson's algorithm on Z^3 with the boundary of B_inf(0, W) wired, W = K R.
///
/// The first branch is the loop erasure of a walk from the origin run until it
/// leaves B_inf(0, W). Each later branch is the loop erasure of a walk from
/// its start run until it hits the current tree or leaves B_inf(0, W); in the
/// second case the exit point becomes a boundary root. Walks are never
/// confined to the window. The walk from z draws from the stream
/// cfg.child(point_stream(z)).
///
/// Branches may be added in any order, including orders chosen from the
/// tree built so far; the law of the resulting tree does not change.
class LatticeWilson {
 public:
  LatticeWilson(std::int64_t wired_radius, RngConfig cfg,
                std::uint64_t step_cap = 1'000'000'000)
      : wired_(wired_radius), cfg_(cfg), step_cap_(step_cap) {
    if (wired_radius < 0) throw InvalidInput("LatticeWilson: negative wired radius");
    LoopEraser le(kOrigin);
    Rng rng(cfg_.child(kRootStream));
    Point cur = kOrigin;
    std::uint64_t steps = 0;
    while (!outside(cur)) {
      if (++steps > step_cap_) throw RuntimeFailure("LatticeWilson: root branch hit the step cap");
      cur = neighbor(cur, rng.direction());
      le.push(cur);
    }
    attach(le.vertices(), std::nullopt);
    steps_ += steps;
  }

  const SpanningTree& tree() const { return tree_; }
  SpanningTree release() && { return std::move(tree_); }
  std::int64_t wired_radius() const { return wired_; }
  std::uint64_t total_steps() const { return steps_; }
  std::uint64_t boundary_exits() const { return exits_; }

  bool outside(const Point& p) const { return linf_distance(p, kOrigin) > wired_; }

  /// Runs the branch from z unless z is already in the tree.
  void add_branch(const Point& z) {
    if (tree_.contains(z) || outside(z)) return;
    Rng rng(cfg_.child(point_stream(z)));
    eraser_.clear();
    eraser_.push(z);
    Point cur = z;
    std::uint64_t steps = 0;
    std::optional<TreeId> hit;
    while (true) {
      if (++steps > step_cap_)
        throw RuntimeFailure("LatticeWilson: branch walk hit the step cap");
      cur = neighbor(cur, rng.direction());
      if (auto h = tree_.find(cur)) {
        hit = *h;
        break;
      }
      eraser_.push(cur);
      if (outside(cur)) break;
    }
    steps_ += steps;
    if (!hit) ++exits_;
    attach(eraser_.vertices(), hit);
  }

  /// Adds branches from every lattice neighbour of v that is not yet in the
  /// tree, after which v's tree neighbourhood is final.
  void complete_vertex(TreeId v) {
    if (tree_.complete(v)) return;
    const Point p = tree_.point(v);
    for (const Point& e : kUnitSteps) add_branch(p + e);
    tree_.set_complete(v);
  }

  /// B_U(x, r), completing every vertex at distance < r inside the region
  /// B_inf(0, limit - 1) on demand. The ball is exact unless it reaches a
  /// vertex at distance < r outside that region, in which case it is
  /// reported as clipped.
  IntrinsicBall grow_ball(const Point& x, std::uint64_t r, std::int64_t limit) {
    add_branch(x);
    const TreeId xid = tree_.id(x);
    IntrinsicBall ball;
    absl::flat_hash_set<TreeId> seen{xid};
    ball.vertices.push_back(xid);
    ball.dist.push_back(0);
    for (std::size_t head = 0; head < ball.vertices.size(); ++head) {
      const TreeId v = ball.vertices[head];
      const std::uint32_t d = ball.dist[head];
      if (d >= r) continue;
      if (linf_distance(tree_.point(v), kOrigin) < limit) complete_vertex(v);
      if (!tree_.complete(v)) ball.clipped = true;
      for (TreeId w : tree_.neighbors(v))
        if (seen.insert(w).second) {
          ball.vertices.push_back(w);
          ball.dist.push_back(d + 1);
        }
    }
    return ball;
  }

 private:
  static constexpr std::uint64_t kRootStream = std::uint64_t{1} << 63;

  /// Stores a loop-erased branch b_0..b_L. If `hit` is set, b_L's successor is
  /// that tree vertex; otherwise b_L lies outside the wired box and becomes a
  /// root.
  void attach(const std::vector<Point>& branch, std::optional<TreeId> hit) {
    std::size_t i = branch.size();
    TreeId up;
    if (hit) {
      up = *hit;
    } else {
      up = tree_.add_root(branch[--i]);
    }
    while (i > 0) up = tree_.add_child(branch[--i], up);
  }

  std::int64_t wired_;
  RngConfig cfg_;
  std::uint64_t step_cap_;
  SpanningTree tree_;
  LoopEraser eraser_;
  std::uint64_t steps_ = 0;
  std::uint64_t exits_ = 0;
};

/// The window points in the configured processing order.
inline std::vector<Point> window_order(const UstWindowConfig& cfg) {
  const Box window(kOrigin, cfg.radius, Metric::linf);
  std::vector<Point> pts = window.points();
  switch (cfg.order) {
    case VertexOrder::lexicographic:
      break;
    case VertexOrder::spiral:
      std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return linf_distance(a, kOrigin) < linf_distance(b, kOrigin);
      });
      break;
    case VertexOrder::supplied: {
      std::vector<Point> s = cfg.supplied_order;
      std::vector<Point> sorted_s = s;
      std::sort(sorted_s.begin(), sorted_s.end());
      std::vector<Point> sorted_w = pts;
      std::sort(sorted_w.begin(), sorted_w.end());
      if (sorted_s != sorted_w)
        throw InvalidInput("sample_window_ust: supplied order must list each window point once");
      pts = std::move(s);
      break;
    }
  }
  return pts;
}

/// A UST sample on the window B_inf(0, R): the root branch from the origin,
/// then one branch per window vertex in the configured order.
inline SpanningTree sample_window_ust(const UstWindowConfig& cfg, RngConfig rng) {
  if (cfg.radius < 0) throw InvalidInput("sample_window_ust: R must be >= 0");
  if (cfg.root_factor < 2) throw InvalidInput("sample_window_ust: K must be >= 2");
  LatticeWilson w(cfg.wired_radius(), rng, cfg.step_cap);
  for (const Point& p : window_order(cfg)) w.add_branch(p);
  SpanningTree t = std::move(w).release();
  t.metadata() = {rng.seed, cfg.radius, cfg.root_factor};
  t.mark_complete_by_neighbourhood(cfg.wired_radius());
  return t;
}

}  // namespace ust3d
