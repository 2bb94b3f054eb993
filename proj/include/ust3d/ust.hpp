// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ust3d/geometry.hpp"

namespace ust3d {

/// A spanning tree (or forest) of lattice points, stored as a parent map over
/// dense vertex ids. Every parent is a lattice neighbour of its child. Roots
/// have no parent; a tree grown by Wilson's algorithm has one primary root at
/// the far end of the root branch and, when branch walks leave the wired box,
/// one extra root per exit point (all of them identified with the wired
/// boundary, hence not connected to each other inside the stored structure).
///
/// A vertex is `complete` when its set of tree neighbours is final: no later
/// growth of the tree can attach anything to it. Ball and heat-kernel queries
/// use completeness to detect when a finite sample is too small.
class SpanningTree {
 public:
  using Id = std::int32_t;
  static constexpr Id kNone = -1;

  struct Metadata {
    std::uint64_t seed = 0;
    std::int64_t window = -1;       ///< window radius R; negative for standalone trees
    std::int64_t root_factor = 0;   ///< K; the wired box is B_inf(0, K R)
  };

  std::size_t size() const { return points_.size(); }
  bool contains(const Point& p) const { return index_.contains(p); }

  std::optional<Id> find(const Point& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Id id(const Point& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw InvalidInput("SpanningTree: vertex not in tree");
    return it->second;
  }

  const Point& point(Id v) const { return points_[static_cast<std::size_t>(v)]; }
  Id parent(Id v) const { return parent_[static_cast<std::size_t>(v)]; }
  std::uint32_t depth(Id v) const { return depth_[static_cast<std::size_t>(v)]; }
  Id component(Id v) const { return component_[static_cast<std::size_t>(v)]; }
  int degree(Id v) const { return degree_[static_cast<std::size_t>(v)]; }
  std::span<const Id> neighbors(Id v) const {
    const auto& a = nbrs_[static_cast<std::size_t>(v)];
    return {a.data(), static_cast<std::size_t>(degree(v))};
  }

  const std::vector<Id>& roots() const { return roots_; }
  /// The first root added; for lattice USTs the end of the root branch.
  Id root() const {
    if (roots_.empty()) throw InvalidInput("SpanningTree: empty tree");
    return roots_.front();
  }

  bool complete(Id v) const { return complete_[static_cast<std::size_t>(v)] != 0; }
  void set_complete(Id v, bool c = true) { complete_[static_cast<std::size_t>(v)] = c; }
  void mark_all_complete() { std::fill(complete_.begin(), complete_.end(), 1); }

  /// Recomputes completeness under Wilson growth semantics: a vertex is
  /// complete when each lattice neighbour is in the tree or outside the
  /// wired box B_inf(0, wired_radius).
  void mark_complete_by_neighbourhood(std::int64_t wired_radius) {
    for (std::size_t v = 0; v < size(); ++v) {
      bool c = true;
      for (const Point& e : kUnitSteps) {
        const Point q = points_[v] + e;
        if (linf_distance(q, kOrigin) <= wired_radius && !contains(q)) {
          c = false;
          break;
        }
      }
      complete_[v] = c;
    }
  }

  Metadata& metadata() { return meta_; }
  const Metadata& metadata() const { return meta_; }

  /// Adds a new component root.
  Id add_root(const Point& p) {
    const Id v = insert_point(p);
    parent_.push_back(kNone);
    depth_.push_back(0);
    component_.push_back(v);
    roots_.push_back(v);
    return v;
  }

  /// Adds a new vertex hanging from an existing one.
  Id add_child(const Point& p, Id parent) {
    if (parent < 0 || static_cast<std::size_t>(parent) >= size())
      throw InvalidInput("SpanningTree: unknown parent");
    if (!adjacent(p, point(parent)))
      throw InvalidInput("SpanningTree: parent is not a lattice neighbour");
    if (degree(parent) >= 6) throw InvalidInput("SpanningTree: degree exceeds 6");
    const Id v = insert_point(p);
    parent_.push_back(parent);
    depth_.push_back(depth(parent) + 1);
    component_.push_back(component(parent));
    link(v, parent);
    return v;
  }

  Id add_child(const Point& p, const Point& parent) { return add_child(p, id(parent)); }

  /// Sum of tree degrees over all vertices.
  std::size_t total_degree() const {
    std::size_t s = 0;
    for (auto d : degree_) s += d;
    return s;
  }

 private:
  Id insert_point(const Point& p) {
    if (size() >= static_cast<std::size_t>(std::numeric_limits<Id>::max()))
      throw RuntimeFailure("SpanningTree: too many vertices");
    const Id v = static_cast<Id>(size());
    if (!index_.try_emplace(p, v).second) throw InvalidInput("SpanningTree: duplicate vertex");
    points_.push_back(p);
    nbrs_.push_back({});
    degree_.push_back(0);
    complete_.push_back(0);
    return v;
  }

  void link(Id a, Id b) {
    nbrs_[static_cast<std::size_t>(a)][degree_[static_cast<std::size_t>(a)]++] = b;
    nbrs_[static_cast<std::size_t>(b)][degree_[static_cast<std::size_t>(b)]++] = a;
  }

  std::vector<Point> points_;
  PointMap<Id> index_;
  std::vector<Id> parent_;
  std::vector<std::uint32_t> depth_;
  std::vector<Id> component_;
  std::vector<std::array<Id, 6>> nbrs_;
  std::vector<std::uint8_t> degree_;
  std::vector<std::uint8_t> complete_;
  std::vector<Id> roots_;
  Metadata meta_;
};

using TreeId = SpanningTree::Id;

/// mu_U({x}): the number of tree edges containing x.
inline int degree_measure(const SpanningTree& t, const Point& x) { return t.degree(t.id(x)); }

/// The unique tree path from x to y, found by climbing to the lowest common
/// ancestor.
inline Path path_in_tree(const SpanningTree& t, const Point& x, const Point& y) {
  TreeId a = t.id(x);
  TreeId b = t.id(y);
  if (t.component(a) != t.component(b))
    throw InvalidInput("path_in_tree: vertices lie in different components");
  std::vector<Point> up, down;
  while (t.depth(a) > t.depth(b)) {
    up.push_back(t.point(a));
    a = t.parent(a);
  }
  while (t.depth(b) > t.depth(a)) {
    down.push_back(t.point(b));
    b = t.parent(b);
  }
  while (a != b) {
    up.push_back(t.point(a));
    down.push_back(t.point(b));
    a = t.parent(a);
    b = t.parent(b);
  }
  up.push_back(t.point(a));
  up.insert(up.end(), down.rbegin(), down.rend());
  return Path::trusted(std::move(up));
}

/// d_U(x, y).
inline std::uint64_t intrinsic_distance(const SpanningTree& t, const Point& x, const Point& y) {
  TreeId a = t.id(x);
  TreeId b = t.id(y);
  if (t.component(a) != t.component(b))
    throw InvalidInput("intrinsic_distance: vertices lie in different components");
  std::uint64_t d = 0;
  while (t.depth(a) > t.depth(b)) a = t.parent(a), ++d;
  while (t.depth(b) > t.depth(a)) b = t.parent(b), ++d;
  while (a != b) a = t.parent(a), b = t.parent(b), d += 2;
  return d;
}

/// The path from x up the parent chain to its component root. On a lattice
/// UST sample this stands in for the infinite ray gamma(x, infinity).
inline Path path_to_root(const SpanningTree& t, const Point& x) {
  std::vector<Point> v;
  for (TreeId a = t.id(x); a != SpanningTree::kNone; a = t.parent(a)) v.push_back(t.point(a));
  return Path::trusted(std::move(v));
}

struct IntrinsicBall {
  std::vector<TreeId> vertices;     ///< breadth-first order
  std::vector<std::uint32_t> dist;  ///< d_U(x, vertices[i])
  bool clipped = false;             ///< some vertex closer than r is not complete
  std::size_t volume() const { return vertices.size(); }
};

/// B_U(x, r) by breadth-first search. The result is exact unless `clipped`:
/// then a vertex at distance < r had an unfinished neighbourhood and the
/// true ball may be larger.
inline IntrinsicBall intrinsic_ball(const SpanningTree& t, TreeId x, std::uint64_t r) {
  IntrinsicBall ball;
  absl::flat_hash_set<TreeId> seen{x};
  ball.vertices.push_back(x);
  ball.dist.push_back(0);
  for (std::size_t head = 0; head < ball.vertices.size(); ++head) {
    const TreeId v = ball.vertices[head];
    const std::uint32_t d = ball.dist[head];
    if (d >= r) continue;
    if (!t.complete(v)) ball.clipped = true;
    for (TreeId w : t.neighbors(v)) {
      if (seen.insert(w).second) {
        ball.vertices.push_back(w);
        ball.dist.push_back(d + 1);
      }
    }
  }
  return ball;
}

inline IntrinsicBall intrinsic_ball(const SpanningTree& t, const Point& x, std::uint64_t r) {
  return intrinsic_ball(t, t.id(x), r);
}

// Serialization. Header "ust3d-tree v1 <vertex-count> <seed> <R> <K>", then
// one line "x y z px py pz" per non-root vertex in breadth-first order from
// the roots (roots in point order, children in point order), so that writing
// a loaded tree reproduces the input bytes.

namespace detail {

inline std::vector<std::vector<TreeId>> children_lists(const SpanningTree& t) {
  std::vector<std::vector<TreeId>> ch(t.size());
  for (std::size_t v = 0; v < t.size(); ++v)
    if (const TreeId p = t.parent(static_cast<TreeId>(v)); p != SpanningTree::kNone)
      ch[static_cast<std::size_t>(p)].push_back(static_cast<TreeId>(v));
  for (auto& c : ch)
    std::sort(c.begin(), c.end(), [&](TreeId a, TreeId b) { return t.point(a) < t.point(b); });
  return ch;
}

}  // namespace detail

inline void write_tree(std::ostream& os, const SpanningTree& t) {
  const auto& meta = t.metadata();
  os << "ust3d-tree v1 " << t.size() << ' ' << meta.seed << ' ' << meta.window << ' '
     << meta.root_factor << '\n';
  const auto ch = detail::children_lists(t);
  std::vector<TreeId> roots = t.roots();
  std::sort(roots.begin(), roots.end(), [&](TreeId a, TreeId b) { return t.point(a) < t.point(b); });
  for (TreeId r : roots)
    if (ch[static_cast<std::size_t>(r)].empty())
      throw InvalidInput("write_tree: an isolated root cannot be represented");
  std::deque<TreeId> queue(roots.begin(), roots.end());
  while (!queue.empty()) {
    const TreeId v = queue.front();
    queue.pop_front();
    for (TreeId c : ch[static_cast<std::size_t>(v)]) {
      os << t.point(c) << ' ' << t.point(v) << '\n';
      queue.push_back(c);
    }
  }
}

inline SpanningTree read_tree(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw InvalidInput("read_tree: missing header");
  std::istringstream hs(header);
  std::string magic, version, extra;
  std::size_t count = 0;
  SpanningTree::Metadata meta;
  if (!(hs >> magic >> version >> count >> meta.seed >> meta.window >> meta.root_factor) ||
      (hs >> extra) || magic != "ust3d-tree" || version != "v1")
    throw InvalidInput("read_tree: malformed header");

  PointMap<Point> parent_of;
  PointMap<std::vector<Point>> children;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Point c, p;
    if (!(ls >> c.x >> c.y >> c.z >> p.x >> p.y >> p.z) || (ls >> extra))
      throw InvalidInput("read_tree: malformed line " + std::to_string(line_no));
    if (!parent_of.try_emplace(c, p).second)
      throw InvalidInput("read_tree: vertex listed twice at line " + std::to_string(line_no));
    children[p].push_back(c);
  }
  std::vector<Point> roots;
  for (const auto& [p, _] : children)
    if (!parent_of.contains(p)) roots.push_back(p);
  std::sort(roots.begin(), roots.end());

  SpanningTree t;
  std::deque<TreeId> queue;
  for (const Point& r : roots) queue.push_back(t.add_root(r));
  while (!queue.empty()) {
    const TreeId v = queue.front();
    queue.pop_front();
    auto it = children.find(t.point(v));
    if (it == children.end()) continue;
    auto kids = it->second;
    std::sort(kids.begin(), kids.end());
    for (const Point& c : kids) queue.push_back(t.add_child(c, v));
  }
  if (t.size() != parent_of.size() + roots.size())
    throw InvalidInput("read_tree: parent links contain a cycle");
  if (t.size() != count) throw InvalidInput("read_tree: vertex count does not match header");
  t.metadata() = meta;
  if (meta.window < 0)
    t.mark_all_complete();
  else
    t.mark_complete_by_neighbourhood(meta.window * meta.root_factor);
  return t;
}

}  // namespace ust3d
