// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ust3d/geometry.hpp"
#include "ust3d/parallel.hpp"
#include "ust3d/rng.hpp"
#include "ust3d/ust.hpp"

namespace ust3d {

/// p_n(x, x) for the simple random walk on a tree. Exact results carry
/// std_error 0 and trials 0.
struct HeatKernelEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
};

/// The walk restricted to B_U(x, radius), as a compressed adjacency array.
/// Neighbours outside the ball are dropped from the lists but kept in the
/// degrees, so transition probabilities stay those of the full tree.
class LocalChain {
 public:
  LocalChain(const SpanningTree& t, TreeId x, std::uint64_t radius)
      : ball_(intrinsic_ball(t, x, radius + 1)) {
    // The extra layer is only used to decide completeness of the inner ball.
    std::size_t inside = 0;
    while (inside < ball_.vertices.size() && ball_.dist[inside] <= radius) ++inside;
    ball_.vertices.resize(inside);
    ball_.dist.resize(inside);
    absl::flat_hash_map<TreeId, std::uint32_t> local;
    for (std::size_t i = 0; i < inside; ++i) local.emplace(ball_.vertices[i], static_cast<std::uint32_t>(i));
    offsets_.push_back(0);
    for (std::size_t i = 0; i < inside; ++i) {
      const TreeId v = ball_.vertices[i];
      const auto nb = t.neighbors(v);
      inv_degree_.push_back(1.0 / static_cast<double>(nb.size()));
      degree_.push_back(static_cast<int>(nb.size()));
      for (TreeId w : nb) {
        auto it = local.find(w);
        if (it != local.end()) targets_.push_back(it->second);
      }
      escape_.push_back(static_cast<int>(nb.size()) -
                        static_cast<int>(targets_.size() - offsets_.back()));
      offsets_.push_back(static_cast<std::uint32_t>(targets_.size()));
    }
  }

  std::size_t size() const { return inv_degree_.size(); }
  bool clipped() const { return ball_.clipped; }
  const IntrinsicBall& ball() const { return ball_; }
  int degree(std::size_t i) const { return degree_[i]; }
  double inv_degree(std::size_t i) const { return inv_degree_[i]; }
  std::span<const std::uint32_t> targets(std::size_t i) const {
    return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  int escape_edges(std::size_t i) const { return escape_[i]; }

 private:
  IntrinsicBall ball_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> inv_degree_;
  std::vector<int> degree_;
  std::vector<int> escape_;
};

/// Two-sided bounds on p_n(x, x) from the walk killed on leaving B_U(x, D).
/// Mass that leaves at a time from which it can no longer come back by time n
/// is discarded; the rest bounds the unknown returning contribution. When
/// D >= n/2 the two bounds coincide.
struct ReturnBounds {
  std::uint64_t n = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on p_n(x, x) for every n in `steps` (sorted ascending), using the
/// state space B_U(x, D). Every vertex of B_U(x, D) must be complete.
inline std::vector<ReturnBounds> return_bounds(const SpanningTree& t, TreeId x,
                                               std::span<const std::uint64_t> steps,
                                               std::uint64_t radius) {
  if (!std::is_sorted(steps.begin(), steps.end()))
    throw InvalidInput("return_bounds: steps must be sorted");
  const LocalChain chain(t, x, radius);
  if (chain.clipped())
    throw RuntimeFailure("return_bounds: B_U(x, " + std::to_string(radius) +
                         ") reaches an unfinished part of the tree; increase the window");
  const std::size_t m = chain.size();
  std::vector<double> cur(m, 0.0), next(m, 0.0);
  cur[0] = 1.0;
  const double mu_x = chain.degree(0);
  const std::uint64_t horizon = steps.empty() ? 0 : steps.back();
  std::vector<ReturnBounds> out;
  std::size_t want = 0;
  // returnable[k] = mass that escaped at a step s and could still be back by
  // the k-th requested time.
  std::vector<double> leaked(steps.size(), 0.0);
  for (std::uint64_t s = 0;; ++s) {
    while (want < steps.size() && steps[want] == s) {
      out.push_back({s, cur[0] / mu_x, (cur[0] + leaked[want]) / mu_x});
      ++want;
    }
    if (s == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    double escaped = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double c = cur[i];
      if (c == 0.0) continue;
      const double share = c * chain.inv_degree(i);
      for (std::uint32_t j : chain.targets(i)) next[j] += share;
      escaped += share * chain.escape_edges(i);
    }
    if (escaped > 0.0) {
      // Escaped at time s + 1 at distance radius + 1; a return needs at least
      // radius + 1 further steps.
      for (std::size_t k = want; k < steps.size(); ++k)
        if (steps[k] >= s + 1 + radius + 1) leaked[k] += escaped;
    }
    cur.swap(next);
  }
  return out;
}

/// p_n(x, x) = P_x(X_n = x) / mu(x), computed by iterating the distribution
/// over B_U(x, floor(n/2)); a returning path never goes further. Rejects the
/// query when that ball reaches an unfinished part of the tree.
inline HeatKernelEstimate heat_kernel_exact(const SpanningTree& t, const Point& x, std::uint64_t n) {
  const TreeId xid = t.id(x);
  const std::uint64_t steps[] = {n};
  const auto b = return_bounds(t, xid, steps, n / 2);
  return {b.front().lower, 0.0, n, 0};
}

/// The full distribution of X_n under P_x over B_U(x, n). Every vertex closer
/// than n must be complete. Total mass is monitored after every step and a
/// drift above `drift_tolerance` is a hard failure.
struct Distribution {
  std::vector<TreeId> vertices;
  std::vector<double> mass;
  double max_drift = 0.0;

  double at(TreeId v) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i] == v) return mass[i];
    return 0.0;
  }
};

inline Distribution distribution_after(const SpanningTree& t, const Point& x, std::uint64_t n,
                                       double drift_tolerance = 1e-10) {
  const LocalChain chain(t, t.id(x), n);
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.ball().dist[i] < n && !t.complete(chain.ball().vertices[i]))
      throw RuntimeFailure("distribution_after: the walk can reach an unfinished vertex");
  const std::size_t m = chain.size();
  std::vector<double> cur(m, 0.0), next(m, 0.0);
  cur[0] = 1.0;
  Distribution d;
  for (std::uint64_t s = 0; s < n; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (cur[i] == 0.0) continue;
      const double share = cur[i] * chain.inv_degree(i);
      for (std::uint32_t j : chain.targets(i)) next[j] += share;
    }
    cur.swap(next);
    double total = 0.0;
    for (double c : cur) total += c;
    d.max_drift = std::max(d.max_drift, std::abs(total - 1.0));
    if (d.max_drift > drift_tolerance)
      throw RuntimeFailure("distribution_after: probability mass drifted by " +
                           std::to_string(d.max_drift));
  }
  d.vertices = chain.ball().vertices;
  d.mass = std::move(cur);
  return d;
}

/// p_n(x, y) = P_x(X_n = y) / mu(y).
inline double heat_kernel(const SpanningTree& t, const Point& x, const Point& y, std::uint64_t n) {
  const auto d = distribution_after(t, x, n);
  const TreeId yid = t.id(y);
  return d.at(yid) / t.degree(yid);
}

/// Monte Carlo p_n(x, x): the return frequency of `trials` independent
/// n-step walks (stream cfg.child(i) for walk i), divided by mu(x).
inline HeatKernelEstimate heat_kernel_mc(const SpanningTree& t, const Point& x, std::uint64_t n,
                                         std::uint64_t trials, RngConfig cfg, unsigned jobs = 1) {
  if (trials < 1) throw InvalidInput("heat_kernel_mc: trials must be >= 1");
  const TreeId xid = t.id(x);
  const LocalChain chain(t, xid, n / 2);
  if (chain.clipped())
    throw RuntimeFailure("heat_kernel_mc: the walk can reach an unfinished part of the tree");
  // Compressed adjacency over the ball plus one sentinel "far" state: a walker
  // beyond distance n/2 can no longer return in time and is stopped.
  const std::size_t far = chain.size();
  std::vector<std::uint32_t> offsets{0}, targets;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (std::uint32_t j : chain.targets(i)) targets.push_back(j);
    for (int e = 0; e < chain.escape_edges(i); ++e) targets.push_back(static_cast<std::uint32_t>(far));
    offsets.push_back(static_cast<std::uint32_t>(targets.size()));
  }
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  const auto counts = parallel_map(blocks, jobs, [&](std::size_t b) {
    std::uint64_t returned = 0;
    const std::uint64_t first = b * kBlock;
    const std::uint64_t last = std::min(trials, first + kBlock);
    for (std::uint64_t i = first; i < last; ++i) {
      Rng rng(cfg.child(i));
      std::size_t v = 0;
      for (std::uint64_t s = 0; s < n && v != far; ++s) {
        const auto lo = offsets[v];
        const auto deg = offsets[v + 1] - lo;
        v = targets[lo + rng.below(deg)];
      }
      if (v == 0) ++returned;
    }
    return returned;
  });
  std::uint64_t returned = 0;
  for (auto c : counts) returned += c;
  const double p = static_cast<double>(returned) / static_cast<double>(trials);
  const double mu = chain.degree(0);
  return {p / mu, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) / mu, n, trials};
}

enum class BoundStatus { holds, violated, undetermined };

struct Bk06Check {
  std::uint64_t r = 0;
  std::uint64_t volume = 0;       ///< |B_U(x, r)|
  std::uint64_t n = 0;            ///< 2 r |B_U(x, r)|
  double lhs = 0.0;               ///< lower bound on p_n(x, x); exact when lhs_upper == lhs
  double lhs_upper = 0.0;
  double rhs = 0.0;               ///< 2 / |B_U(x, r)|
  BoundStatus status = BoundStatus::undetermined;
  bool holds() const { return status == BoundStatus::holds; }
};

/// Checks p_{2r|B|}(x, x) <= 2/|B| with B = B_U(x, r), computing the left side
/// on the state space B_U(x, D) (all of whose vertices must be complete). The
/// inequality is certified when the upper bound on the left side is below the
/// right side, and refuted when the lower bound exceeds it.
inline Bk06Check bk06_bound_check(const SpanningTree& t, const Point& x, std::uint64_t r,
                                  std::uint64_t state_radius) {
  const TreeId xid = t.id(x);
  const auto ball = intrinsic_ball(t, xid, r);
  if (ball.clipped) throw RuntimeFailure("bk06_bound_check: B_U(x, r) is clipped");
  Bk06Check c;
  c.r = r;
  c.volume = ball.volume();
  c.n = 2 * r * c.volume;
  c.rhs = 2.0 / static_cast<double>(c.volume);
  const std::uint64_t steps[] = {c.n};
  const auto b = return_bounds(t, xid, steps, std::min(state_radius, c.n / 2));
  c.lhs = b.front().lower;
  c.lhs_upper = b.front().upper;
  if (c.lhs_upper <= c.rhs)
    c.status = BoundStatus::holds;
  else if (c.lhs > c.rhs)
    c.status = BoundStatus::violated;
  return c;
}

/// As above with the exact state space B_U(x, r |B|).
inline Bk06Check bk06_bound_check(const SpanningTree& t, const Point& x, std::uint64_t r) {
  const auto ball = intrinsic_ball(t, t.id(x), r);
  return bk06_bound_check(t, x, r, r * ball.volume());
}

}  // namespace ust3d
