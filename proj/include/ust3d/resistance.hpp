// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <boost/multiprecision/cpp_int.hpp>

#include "ust3d/geometry.hpp"
#include "ust3d/ust.hpp"
#include "ust3d/wilson.hpp"

namespace ust3d {

using Rational = boost::multiprecision::cpp_rational;

/// Graphs up to this many vertices are solved in exact rational arithmetic.
inline constexpr int kExactSolveLimit = 500;

/// Symmetric positive-definite sparse factorization A = L D L^T by Gaussian
/// elimination in greedy minimum-degree order. Ties go to rows that are not
/// diagonally heavier than their off-diagonal sum, so on a grounded tree
/// Laplacian the leaves go first, there is no fill and every pivot is 1.
template <typename Scalar>
class SparseLdlt {
 public:
  using Row = std::vector<std::pair<int, Scalar>>;

  /// `offdiag[i]` lists (j, a_ij) for j != i; the pattern must be symmetric.
  SparseLdlt(std::vector<Scalar> diag, const std::vector<Row>& offdiag) {
    const int n = static_cast<int>(diag.size());
    std::vector<absl::flat_hash_map<int, Scalar>> work(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (const auto& [j, a] : offdiag[static_cast<std::size_t>(i)])
        work[static_cast<std::size_t>(i)][j] = a;
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    std::vector<char> heavy(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      Scalar off(0);
      for (const auto& [j, a] : offdiag[static_cast<std::size_t>(i)]) off += a < Scalar(0) ? -a : a;
      heavy[static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)] != off;
    }
    using Entry = std::tuple<std::size_t, char, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    for (int i = 0; i < n; ++i)
      queue.emplace(work[static_cast<std::size_t>(i)].size(), heavy[static_cast<std::size_t>(i)], i);
    order_.reserve(static_cast<std::size_t>(n));
    rows_.resize(static_cast<std::size_t>(n));
    pivot_.resize(static_cast<std::size_t>(n));
    while (!queue.empty()) {
      const auto [deg, h, p] = queue.top();
      queue.pop();
      const auto up = static_cast<std::size_t>(p);
      if (done[up] || deg != work[up].size() || h != heavy[up]) continue;
      done[up] = 1;
      order_.push_back(p);
      const Scalar app = diag[up];
      if (!(app > Scalar(0))) throw RuntimeFailure("SparseLdlt: matrix is not positive definite");
      pivot_[up] = app;
      Row row(work[up].begin(), work[up].end());
      for (const auto& [i, aip] : row) {
        auto& wi = work[static_cast<std::size_t>(i)];
        wi.erase(p);
        diag[static_cast<std::size_t>(i)] -= aip * aip / app;
        for (const auto& [j, ajp] : row)
          if (j != i) wi[j] -= aip * ajp / app;
      }
      for (const auto& [i, _] : row) {
        const auto ui = static_cast<std::size_t>(i);
        heavy[ui] |= heavy[up];
        queue.emplace(work[ui].size(), heavy[ui], i);
      }
      rows_[up] = std::move(row);
      work[up].clear();
    }
    pos_.resize(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < order_.size(); ++k) pos_[static_cast<std::size_t>(order_[k])] = k;
  }

  /// b^T A^{-1} b for a sparse b given as (index, value) pairs. Only the
  /// elimination-tree ancestors of the support are visited.
  Scalar energy(const std::vector<std::pair<int, Scalar>>& b) const {
    absl::flat_hash_map<int, Scalar> z;
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> queue;
    for (const auto& [i, v] : b) {
      auto [it, fresh] = z.try_emplace(i, Scalar(0));
      it->second += v;
      if (fresh) queue.push(pos_[static_cast<std::size_t>(i)]);
    }
    Scalar e(0);
    while (!queue.empty()) {
      const std::size_t k = queue.top();
      queue.pop();
      const int p = order_[k];
      const auto up = static_cast<std::size_t>(p);
      const Scalar bp = z[p];
      if (bp == Scalar(0)) continue;
      e += bp * bp / pivot_[up];
      for (const auto& [j, a] : rows_[up]) {
        auto [it, fresh] = z.try_emplace(j, Scalar(0));
        it->second -= a * bp / pivot_[up];
        if (fresh) queue.push(pos_[static_cast<std::size_t>(j)]);
      }
    }
    return e;
  }

  std::vector<Scalar> solve(std::vector<Scalar> b) const {
    for (int p : order_) {
      const auto up = static_cast<std::size_t>(p);
      const Scalar bp = b[up];
      if (bp == Scalar(0)) continue;
      for (const auto& [j, a] : rows_[up]) b[static_cast<std::size_t>(j)] -= a * bp / pivot_[up];
    }
    std::vector<Scalar> x(b.size());
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const auto up = static_cast<std::size_t>(*it);
      Scalar s = b[up];
      for (const auto& [j, a] : rows_[up]) s -= a * x[static_cast<std::size_t>(j)];
      x[up] = s / pivot_[up];
    }
    return x;
  }

 private:
  std::vector<int> order_;
  std::vector<std::size_t> pos_;
  std::vector<Row> rows_;
  std::vector<Scalar> pivot_;
};

namespace detail {

inline std::vector<char> terminal_mask(int n, const std::vector<int>& set, const char* what) {
  std::vector<char> m(static_cast<std::size_t>(n), 0);
  for (int v : set) {
    if (v < 0 || v >= n) throw InvalidInput(std::string(what) + ": vertex out of range");
    m[static_cast<std::size_t>(v)] = 1;
  }
  return m;
}

/// Unit-conductance Dirichlet problem f = 1 on A, f = 0 on B, harmonic
/// elsewhere; returns the current E(f, f) flowing out of A.
template <typename Scalar>
Scalar dirichlet_current(const FiniteGraph& g, const std::vector<char>& in_a,
                         const std::vector<char>& in_b) {
  const int n = g.vertex_count();
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  std::vector<int> interior;
  for (int v = 0; v < n; ++v)
    if (!in_a[static_cast<std::size_t>(v)] && !in_b[static_cast<std::size_t>(v)]) {
      local[static_cast<std::size_t>(v)] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  std::vector<Scalar> f(static_cast<std::size_t>(n), Scalar(0));
  for (int v = 0; v < n; ++v)
    if (in_a[static_cast<std::size_t>(v)]) f[static_cast<std::size_t>(v)] = Scalar(1);
  if (!interior.empty()) {
    std::vector<Scalar> diag(interior.size()), rhs(interior.size(), Scalar(0));
    std::vector<typename SparseLdlt<Scalar>::Row> off(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const int v = interior[k];
      diag[k] = Scalar(g.degree(v));
      for (int w : g.neighbors(v)) {
        if (const int lw = local[static_cast<std::size_t>(w)]; lw >= 0)
          off[k].emplace_back(lw, Scalar(-1));
        else if (in_a[static_cast<std::size_t>(w)])
          rhs[k] += Scalar(1);
      }
    }
    const SparseLdlt<Scalar> ldlt(std::move(diag), off);
    const auto x = ldlt.solve(std::move(rhs));
    for (std::size_t k = 0; k < interior.size(); ++k) f[static_cast<std::size_t>(interior[k])] = x[k];
  }
  Scalar current(0);
  for (int a = 0; a < n; ++a)
    if (in_a[static_cast<std::size_t>(a)])
      for (int w : g.neighbors(a)) current += f[static_cast<std::size_t>(a)] - f[static_cast<std::size_t>(w)];
  return current;
}

}  // namespace detail

/// R_eff(A, B) on the unit-resistance network g: the reciprocal of the minimal
/// energy of a function equal to 1 on A and 0 on B. Exact rational arithmetic
/// up to kExactSolveLimit vertices, double-precision elimination beyond.
inline double effective_resistance(const FiniteGraph& g, const std::vector<int>& a,
                                   const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw InvalidInput("effective_resistance: empty terminal set");
  const auto in_a = detail::terminal_mask(g.vertex_count(), a, "effective_resistance");
  const auto in_b = detail::terminal_mask(g.vertex_count(), b, "effective_resistance");
  for (int v = 0; v < g.vertex_count(); ++v)
    if (in_a[static_cast<std::size_t>(v)] && in_b[static_cast<std::size_t>(v)])
      throw InvalidInput("effective_resistance: terminal sets intersect");
  if (g.vertex_count() <= kExactSolveLimit) {
    const Rational c = detail::dirichlet_current<Rational>(g, in_a, in_b);
    return static_cast<double>(Rational(1) / c);
  }
  return 1.0 / detail::dirichlet_current<double>(g, in_a, in_b);
}

/// Exact rational value of R_eff(A, B); for small graphs only.
inline Rational effective_resistance_exact(const FiniteGraph& g, const std::vector<int>& a,
                                           const std::vector<int>& b) {
  const auto in_a = detail::terminal_mask(g.vertex_count(), a, "effective_resistance_exact");
  const auto in_b = detail::terminal_mask(g.vertex_count(), b, "effective_resistance_exact");
  for (int v = 0; v < g.vertex_count(); ++v)
    if (in_a[static_cast<std::size_t>(v)] && in_b[static_cast<std::size_t>(v)])
      throw InvalidInput("effective_resistance_exact: terminal sets intersect");
  if (a.empty() || b.empty()) throw InvalidInput("effective_resistance_exact: empty terminal set");
  return Rational(1) / detail::dirichlet_current<Rational>(g, in_a, in_b);
}

/// Point-to-point resistances on one graph from a single factorization of the
/// Laplacian grounded at `ground`: R(x, y) = (e_x - e_y)^T L_g^{-1} (e_x - e_y).
class GroundedLaplacian {
 public:
  explicit GroundedLaplacian(const FiniteGraph& g, int ground = 0)
      : n_(g.vertex_count()), ground_(ground), ldlt_(build(g, ground)) {}

  double resistance(int x, int y) const {
    if (x < 0 || y < 0 || x >= n_ || y >= n_) throw InvalidInput("GroundedLaplacian: bad vertex");
    if (x == y) return 0.0;
    std::vector<std::pair<int, double>> b;
    if (x != ground_) b.emplace_back(reduced(x), 1.0);
    if (y != ground_) b.emplace_back(reduced(y), -1.0);
    return ldlt_.energy(b);
  }

 private:
  int reduced(int v) const { return v < ground_ ? v : v - 1; }

  static SparseLdlt<double> build(const FiniteGraph& g, int ground) {
    const int n = g.vertex_count();
    if (ground < 0 || ground >= n) throw InvalidInput("GroundedLaplacian: bad ground vertex");
    auto red = [ground](int v) { return v < ground ? v : v - 1; };
    std::vector<double> diag;
    std::vector<SparseLdlt<double>::Row> off;
    for (int v = 0; v < n; ++v) {
      if (v == ground) continue;
      diag.push_back(g.degree(v));
      off.emplace_back();
      for (int w : g.neighbors(v))
        if (w != ground) off.back().emplace_back(red(w), -1.0);
    }
    return SparseLdlt<double>(std::move(diag), off);
  }

  int n_;
  int ground_;
  SparseLdlt<double> ldlt_;
};

/// The connected component of `comp_of` in t as a FiniteGraph, with the map
/// from graph vertex to tree id.
struct TreeGraph {
  FiniteGraph graph;
  std::vector<TreeId> tree_ids;
  absl::flat_hash_map<TreeId, int> local;
};

inline TreeGraph component_graph(const SpanningTree& t, TreeId comp_of) {
  const TreeId comp = t.component(comp_of);
  std::vector<TreeId> ids;
  absl::flat_hash_map<TreeId, int> local;
  for (std::size_t v = 0; v < t.size(); ++v)
    if (t.component(static_cast<TreeId>(v)) == comp) {
      local.emplace(static_cast<TreeId>(v), static_cast<int>(ids.size()));
      ids.push_back(static_cast<TreeId>(v));
    }
  std::vector<FiniteGraph::Edge> edges;
  for (TreeId v : ids)
    if (const TreeId p = t.parent(v); p != SpanningTree::kNone)
      edges.emplace_back(local.at(v), local.at(p));
  return {FiniteGraph(static_cast<int>(ids.size()), std::move(edges)), std::move(ids),
          std::move(local)};
}

/// R_eff(x, y) on a tree: the length of the unique path (series law).
inline double tree_resistance(const SpanningTree& t, const Point& x, const Point& y) {
  return static_cast<double>(intrinsic_distance(t, x, y));
}

/// R_eff(x, B) inside the tree, by series/parallel reduction of the tree
/// rooted at x. Each subtree below a child c of v presents the resistance
/// 1 + R(c -> B within subtree(c)); siblings combine in parallel. Returns 0
/// when x is in B.
inline double point_to_set_resistance(const SpanningTree& t, const Point& x,
                                      const std::vector<Point>& b) {
  if (b.empty()) throw InvalidInput("point_to_set_resistance: empty set");
  const TreeId xid = t.id(x);
  absl::flat_hash_set<TreeId> grounded;
  for (const Point& p : b) {
    const TreeId v = t.id(p);
    if (t.component(v) == t.component(xid)) grounded.insert(v);
  }
  if (grounded.contains(xid)) return 0.0;
  if (grounded.empty())
    throw InvalidInput("point_to_set_resistance: set is not connected to x");

  // Iterative DFS from x; conductance[v] = conductance from v to B within the
  // subtree hanging below v (infinite when v is in B).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  absl::flat_hash_map<TreeId, double> conductance;
  struct Frame {
    TreeId v;
    TreeId from;
    std::size_t next;
  };
  std::vector<Frame> stack{{xid, SpanningTree::kNone, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (grounded.contains(f.v) && f.v != xid) {
      conductance[f.v] = kInf;
      stack.pop_back();
      continue;
    }
    const auto nb = t.neighbors(f.v);
    if (f.next < nb.size()) {
      const TreeId w = nb[f.next++];
      if (w != f.from) stack.push_back({w, f.v, 0});
      continue;
    }
    double c = 0.0;
    for (TreeId w : nb) {
      if (w == f.from) continue;
      const double cw = conductance.at(w);
      // Unit edge in series with the child's resistance 1 / cw.
      if (cw > 0.0) c += (cw == kInf) ? 1.0 : cw / (1.0 + cw);
    }
    conductance[f.v] = c;
    stack.pop_back();
  }
  return 1.0 / conductance.at(xid);
}

}  // namespace ust3d
