// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ust3d/geometry.hpp"
#include "ust3d/rng.hpp"
#include "ust3d/tube.hpp"

namespace ust3d {

inline constexpr std::uint64_t kDefaultHitStepCap = 100'000'000;

/// When a simple random walk stops. A walk stops at the first index that
/// satisfies any configured condition:
///  - exit:   distance from the ball centre is >= radius (the walk has left the
///            open ball), measured in the ball's metric;
///  - target: the vertex lies in the target set;
///  - cap:    the walk has taken `step_cap` steps.
struct StopRule {
  std::optional<Box> exit;
  std::shared_ptr<const PointSet> target;
  std::uint64_t step_cap = std::numeric_limits<std::uint64_t>::max();

  static StopRule exit_ball(std::int64_t radius, Point center = kOrigin,
                            Metric metric = Metric::euclidean) {
    StopRule r;
    r.exit = Box(center, radius, metric);
    return r;
  }
  static StopRule hit_set(std::shared_ptr<const PointSet> target,
                          std::uint64_t cap = kDefaultHitStepCap) {
    if (!target) throw InvalidInput("StopRule::hit_set: null target");
    StopRule r;
    r.target = std::move(target);
    r.step_cap = cap;
    return r;
  }
  static StopRule steps(std::uint64_t n) {
    StopRule r;
    r.step_cap = n;
    return r;
  }

  bool exited(const Point& p) const {
    if (!exit) return false;
    if (exit->metric == Metric::linf) return linf_distance(p, exit->center) >= exit->radius;
    return squared_distance(p, exit->center) >= detail::checked_mul(exit->radius, exit->radius);
  }
  bool hit(const Point& p) const { return target && target->contains(p); }
};

enum class WalkOutcome { exited, hit, step_limit };

struct WalkResult {
  Path path;
  WalkOutcome outcome = WalkOutcome::step_limit;

  /// The step cap fired before any other condition; `path` holds the
  /// partial walk. For a pure step-count rule this is the normal outcome.
  bool cap_reached() const { return outcome == WalkOutcome::step_limit; }
};

/// Runs a simple random walk from `start` until `stop` fires.
inline WalkResult run_walk(const Point& start, const StopRule& stop, RngConfig cfg) {
  if (stop.exit && stop.exited(start))
    throw InvalidInput("run_walk: start must lie strictly inside the exit ball");
  if (stop.target && !stop.exit && stop.step_cap == std::numeric_limits<std::uint64_t>::max())
    throw InvalidInput("run_walk: a hit-set rule without an exit ball needs a step cap");
  Rng rng(cfg);
  WalkResult res;
  std::vector<Point> v{start};
  Point cur = start;
  if (stop.hit(cur)) {
    res.path = Path::trusted(std::move(v));
    res.outcome = WalkOutcome::hit;
    return res;
  }
  for (std::uint64_t n = 0;; ++n) {
    if (n == stop.step_cap) {
      res.outcome = WalkOutcome::step_limit;
      break;
    }
    cur = neighbor(cur, rng.direction());
    v.push_back(cur);
    if (stop.hit(cur)) {
      res.outcome = WalkOutcome::hit;
      break;
    }
    if (stop.exited(cur)) {
      res.outcome = WalkOutcome::exited;
      break;
    }
  }
  res.path = Path::trusted(std::move(v));
  return res;
}

/// All k in [0, len) such that the vertex sets of path[0..k] and
/// path[k+1..len] are disjoint.
template <typename PathLike>
std::vector<std::size_t> cut_times(const PathLike& path, std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  if (first >= last) return out;
  PointMap<std::size_t> last_seen;
  last_seen.reserve(last - first + 1);
  for (std::size_t i = first; i <= last; ++i) last_seen[path[i]] = i;
  std::size_t reach = 0;
  for (std::size_t k = first; k < last; ++k) {
    reach = std::max(reach, last_seen.at(path[k]));
    if (reach <= k) out.push_back(k);
  }
  return out;
}

inline std::vector<std::size_t> cut_times(const Path& path) {
  if (path.empty()) return {};
  return cut_times(path, 0, path.length());
}

/// Nice cut times of `path` in box j (j >= 1) of the tube: indices k with
///  (i)   t(a_j + q/2) <= k <= t(a_j + q),
///  (ii)  path[t(a_j)..k] and path[k+1..t(a_{j+1})] share no vertex,
///  (iii) path[k..t(a_{j+1})] avoids Q(a_j),
///  (iv)  path[k] lies in Q[a_j + q/2, a_j + q],
/// where t(a) is the first time the path visits Q(a). If any of the hitting
/// times is undefined the result is empty.
inline std::vector<std::size_t> nice_cut_times(const Path& path, const TubeGeometry& g,
                                               std::int64_t j) {
  if (j < 1) throw InvalidInput("nice_cut_times: box index must be >= 1");
  const std::int64_t aj = g.face(j);
  const std::int64_t aj1 = g.face(j + 1);
  const std::int64_t half_q = g.slab(aj, g.q() / 2.0);
  const std::int64_t full_q = g.slab(aj, g.q());
  const auto tj = g.hitting_time(path, aj);
  if (!tj) return {};
  const auto tj1 = g.hitting_time(path, aj1);
  const auto lo = g.hitting_time(path, half_q);
  const auto hi = g.hitting_time(path, full_q);
  if (!tj1 || !lo || !hi || *tj1 <= *tj) return {};

  std::size_t last_on_aj = *tj;
  for (std::size_t i = *tj; i <= *tj1; ++i)
    if (g.on_face(path[i], aj)) last_on_aj = i;

  PointMap<std::size_t> last_seen;
  for (std::size_t i = *tj; i <= *tj1; ++i) last_seen[path[i]] = i;

  std::vector<std::size_t> out;
  std::size_t reach = 0;
  for (std::size_t k = *tj; k <= std::min(*hi, *tj1); ++k) {
    reach = std::max(reach, last_seen.at(path[k]));
    if (k < *lo) continue;
    const bool disjoint = reach <= k;
    const bool avoids_face = k > last_on_aj;
    const bool in_window = g.in_tube(path[k], half_q, full_q);
    if (disjoint && avoids_face && in_window) out.push_back(k);
  }
  return out;
}

inline std::vector<Point> nice_cut_points(const Path& path, const TubeGeometry& g,
                                          std::int64_t j) {
  std::vector<Point> out;
  for (std::size_t k : nice_cut_times(path, g, j)) out.push_back(path[k]);
  return out;
}

}  // namespace ust3d
