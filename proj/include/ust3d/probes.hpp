// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ust3d/geometry.hpp"
#include "ust3d/lerw.hpp"
#include "ust3d/parallel.hpp"
#include "ust3d/rng.hpp"
#include "ust3d/srw.hpp"
#include "ust3d/stats.hpp"
#include "ust3d/treewalk.hpp"
#include "ust3d/tube.hpp"
#include "ust3d/ust.hpp"
#include "ust3d/wilson.hpp"

namespace ust3d {

inline constexpr double kDefaultBeta = 1.624;

// ---------------------------------------------------------------------------
// Spiral box sequence

/// Centres of side-m boxes visited in an outward spiral. shell[i] is the
/// stage at which box i was added; stage 1 is the origin box and the box
/// above it.
struct BoxSequence {
  std::int64_t m = 0;
  int n_scale = 0;
  std::vector<Point> centers;
  std::vector<int> shell;

  std::size_t size() const { return centers.size(); }
};

namespace detail {

/// Square spiral over {|x|, |y| <= h} from (0, 0) outwards, in box units.
inline std::vector<std::pair<std::int64_t, std::int64_t>> square_spiral(std::int64_t h) {
  static constexpr std::int64_t dx[] = {1, 0, -1, 0};
  static constexpr std::int64_t dy[] = {0, 1, 0, -1};
  const std::int64_t side = 2 * h + 1;
  const auto total = static_cast<std::size_t>(side * side);
  std::vector<std::pair<std::int64_t, std::int64_t>> out{{0, 0}};
  std::int64_t x = 0, y = 0;
  for (int leg = 0; out.size() < total; ++leg) {
    const std::int64_t len = leg / 2 + 1;
    for (std::int64_t s = 0; s < len && out.size() < total; ++s) {
      x += dx[leg % 4];
      y += dy[leg % 4];
      out.emplace_back(x, y);
    }
  }
  return out;
}

/// The ring {max(|x|, |y|) == h} as a cycle, rotated to start at `from`.
inline std::vector<std::pair<std::int64_t, std::int64_t>> square_ring(
    std::int64_t h, std::pair<std::int64_t, std::int64_t> from, bool reverse) {
  std::vector<std::pair<std::int64_t, std::int64_t>> ring;
  for (std::int64_t y = -h; y < h; ++y) ring.emplace_back(h, y);
  for (std::int64_t x = h; x > -h; --x) ring.emplace_back(x, h);
  for (std::int64_t y = h; y > -h; --y) ring.emplace_back(-h, y);
  for (std::int64_t x = -h; x < h; ++x) ring.emplace_back(x, -h);
  const auto it = std::find(ring.begin(), ring.end(), from);
  std::rotate(ring.begin(), it, ring.end());
  if (reverse) std::reverse(ring.begin() + 1, ring.end());
  return ring;
}

}  // namespace detail

/// The 2N(2N-1)^2 boxes of {|x|, |y| <= N-1} times 2N layers, visited so that
/// consecutive centres are m apart. Stage n extends the previous block by one
/// layer at the end it finished on, covers that new face outwards from its
/// centre, walks the side rings layer by layer in alternating directions and
/// finishes inwards on the new face at the opposite end, at its centre.
inline BoxSequence spiral_box_sequence(int n_scale, std::int64_t m) {
  if (n_scale < 1) throw InvalidInput("spiral_box_sequence: N must be >= 1");
  if (m < 1) throw InvalidInput("spiral_box_sequence: m must be >= 1");
  BoxSequence seq;
  seq.m = m;
  seq.n_scale = n_scale;
  auto push = [&](std::int64_t x, std::int64_t y, std::int64_t z, int shell) {
    seq.centers.push_back({detail::checked_mul(x, m), detail::checked_mul(y, m),
                           detail::checked_mul(z, m)});
    seq.shell.push_back(shell);
  };
  push(0, 0, 0, 1);
  push(0, 0, 1, 1);
  std::int64_t zlo = 0, zhi = 1;
  bool at_top = true;
  for (int n = 2; n <= n_scale; ++n) {
    const std::int64_t h = n - 1;
    const auto face = detail::square_spiral(h);
    const std::int64_t step = at_top ? -1 : 1;
    const std::int64_t near_z = at_top ? zhi + 1 : zlo - 1;
    const std::int64_t far_z = at_top ? zlo - 1 : zhi + 1;
    for (const auto& [x, y] : face) push(x, y, near_z, n);
    auto corner = face.back();
    bool reverse = false;
    for (std::int64_t z = near_z + step; z != far_z; z += step) {
      const auto ring = detail::square_ring(h, corner, reverse);
      for (const auto& [x, y] : ring) push(x, y, z, n);
      corner = ring.back();
      reverse = !reverse;
    }
    for (auto it = face.rbegin(); it != face.rend(); ++it) push(it->first, it->second, far_z, n);
    zlo = std::min(near_z, far_z);
    zhi = std::max(near_z, far_z);
    at_top = !at_top;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Tube events

enum class Flag { no, yes, undefined };

inline const char* to_string(Flag f) {
  switch (f) {
    case Flag::no: return "false";
    case Flag::yes: return "true";
    case Flag::undefined: return "undefined";
  }
  return "undefined";
}

inline Flag flag_of(bool b) { return b ? Flag::yes : Flag::no; }

struct BoxEvents {
  std::int64_t j = 0;
  Flag a = Flag::undefined;   ///< no-backtracking passage through box j
  Flag b = Flag::undefined;   ///< a nice cut point exists in box j
  Flag e = Flag::undefined;   ///< len(lambda_j) <= C m^beta
  Flag f = Flag::undefined;   ///< estimated hitting probability >= eta
  std::optional<std::size_t> t_enter;  ///< first visit to Q(a_j) (0 for j == 0)
  std::optional<std::size_t> t_exit;   ///< first visit to Q(a_{j+1})
  std::size_t lambda_length = 0;
  double hit_probability = 0.0;
  double hit_std_error = 0.0;
};

struct EventFlags {
  std::vector<BoxEvents> boxes;
};

struct TubeEventParams {
  std::int64_t boxes = 1;      ///< boxes 0..boxes are examined
  double c = 1.0;              ///< length constant
  double eta = 0.1;            ///< hittability threshold
  std::uint64_t hit_trials = 1000;
  double beta = kDefaultBeta;
};

/// A_j for a path on the tube. A_0 needs the path to start at the origin.
inline Flag tube_event_a(const Path& path, const TubeGeometry& g, std::int64_t j) {
  const std::int64_t aj = g.face(j);
  const std::int64_t aj1 = g.face(j + 1);
  const auto t1 = g.hitting_time(path, aj1);
  if (!t1) return Flag::undefined;
  if (!g.on_inner_face(path[*t1], aj1)) return Flag::no;
  const std::int64_t back = g.slab(aj1, -g.q());
  const std::int64_t back2 = g.slab(aj1, -2.0 * g.q());
  const auto tb = g.hitting_time(path, back);
  if (j == 0) {
    for (std::size_t k = 0; k <= *t1; ++k)
      if (!g.in_tube(path[k], aj, aj1)) return Flag::no;
    if (tb)
      for (std::size_t k = *tb; k <= *t1; ++k)
        if (g.on_face(path[k], back2)) return Flag::no;
    return Flag::yes;
  }
  const auto t0 = g.hitting_time(path, aj);
  if (!t0) return Flag::undefined;
  if (*t0 >= *t1) return Flag::no;
  const std::int64_t lo = g.slab(aj, -g.q());
  for (std::size_t k = *t0; k <= *t1; ++k)
    if (!g.in_tube(path[k], lo, aj1) || g.in_forbidden(path[k], j)) return Flag::no;
  if (tb)
    for (std::size_t k = *tb; k <= *t1; ++k)
      if (!g.in_tube(path[k], back2, aj1)) return Flag::no;
  return Flag::yes;
}

/// Monte Carlo estimate of the probability that a walk from `start` hits
/// `target` before its Euclidean distance from `start` reaches 2m/5.
struct HitEstimate {
  double p = 0.0;
  double std_error = 0.0;
};

inline HitEstimate hit_before_exit(const Point& start, const PointSet& target, std::int64_t m,
                                   std::uint64_t trials, RngConfig cfg) {
  if (trials < 1) throw InvalidInput("hit_before_exit: trials must be >= 1");
  std::uint64_t hits = 0;
  const std::int64_t lim = 4 * m * m;  // 25 |R - x|^2 >= 4 m^2
  for (std::uint64_t i = 0; i < trials; ++i) {
    Rng rng(cfg.child(i));
    Point cur = start;
    while (true) {
      if (target.contains(cur)) {
        ++hits;
        break;
      }
      if (25 * squared_distance(cur, start) >= lim) break;
      cur = neighbor(cur, rng.direction());
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

/// Per-box event flags for a walk path along the tube. Flags whose slab
/// hitting times are missing are left undefined; B_j is only evaluated when
/// A_j holds.
inline EventFlags tube_event_check(const Path& path, const TubeGeometry& g,
                                   const TubeEventParams& params, RngConfig cfg) {
  if (params.boxes < 0) throw InvalidInput("tube_event_check: negative box count");
  if (!(params.c > 0.0)) throw InvalidInput("tube_event_check: C must be positive");
  if (path.empty()) throw InvalidInput("tube_event_check: empty path");
  EventFlags out;
  const double bound = params.c * std::pow(static_cast<double>(g.m()), params.beta);
  for (std::int64_t j = 0; j <= params.boxes; ++j) {
    BoxEvents ev;
    ev.j = j;
    ev.t_enter = j == 0 ? std::optional<std::size_t>(0) : g.hitting_time(path, g.face(j));
    ev.t_exit = g.hitting_time(path, g.face(j + 1));
    ev.a = tube_event_a(path, g, j);
    if (j >= 1 && ev.a == Flag::yes) ev.b = flag_of(!nice_cut_times(path, g, j).empty());
    if (ev.t_enter && ev.t_exit && *ev.t_enter < *ev.t_exit) {
      const Path lambda = loop_erase(path.slice(*ev.t_enter, *ev.t_exit));
      ev.lambda_length = lambda.length();
      ev.e = flag_of(static_cast<double>(ev.lambda_length) <= bound);
      if (params.hit_trials > 0) {
        PointSet target(lambda.begin(), lambda.end());
        const auto h = hit_before_exit(g.box_center(j), target, g.m(), params.hit_trials,
                                       cfg.child(static_cast<std::uint64_t>(j)));
        ev.hit_probability = h.p;
        ev.hit_std_error = h.std_error;
        ev.f = flag_of(h.p >= params.eta);
      }
    }
    out.boxes.push_back(ev);
  }
  return out;
}

/// A walk from the origin run until it first visits Q(a_{boxes+1}), leaves
/// B_inf(0, 2 m (boxes + 2)), or takes `step_cap` steps.
inline Path tube_walk(const TubeGeometry& g, std::int64_t boxes, RngConfig cfg,
                      std::uint64_t step_cap = 100'000'000) {
  if (boxes < 0) throw InvalidInput("tube_walk: negative box count");
  const std::int64_t target = g.face(boxes + 1);
  const std::int64_t far = detail::checked_mul(2 * g.m(), boxes + 2);
  Rng rng(cfg);
  std::vector<Point> v{kOrigin};
  Point p = kOrigin;
  for (std::uint64_t s = 0; s < step_cap; ++s) {
    p = neighbor(p, rng.direction());
    v.push_back(p);
    if (g.on_face(p, target) || linf_distance(p, kOrigin) > far) break;
  }
  return Path::trusted(std::move(v));
}

/// Runs one walk from `start` on Q~(a_1) just long enough to decide A_1.
inline bool sample_a1(const TubeGeometry& g, const Point& start, RngConfig cfg) {
  const std::int64_t a1 = g.face(1), a2 = g.face(2);
  if (!g.on_inner_face(start, a1)) throw InvalidInput("sample_a1: start must lie on Q~(a_1)");
  const std::int64_t lo = g.slab(a1, -g.q());
  const std::int64_t back = g.slab(a2, -g.q());
  const std::int64_t back2 = g.slab(a2, -2.0 * g.q());
  Rng rng(cfg);
  Point p = start;
  bool seen_back = g.along(p) == back;
  if (g.in_forbidden(p, 1)) return false;
  while (true) {
    p = neighbor(p, rng.direction());
    if (!g.in_tube(p, lo, a2) || g.in_forbidden(p, 1)) return false;
    if (g.along(p) == back) seen_back = true;
    if (seen_back && g.along(p) < back2) return false;
    if (g.along(p) == a2) return g.on_inner_face(p, a2);
  }
}

struct FrequencyEstimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double freq = 0.0;
  double std_error = 0.0;
};

/// Empirical P(A_1) for walks started at the centre of Q~(a_1).
inline FrequencyEstimate a1_frequency(const TubeGeometry& g, std::uint64_t trials, RngConfig cfg,
                                      unsigned jobs = 1) {
  if (trials < 1) throw InvalidInput("a1_frequency: trials must be >= 1");
  Point start;
  start[g.axis()] = g.face(1);
  constexpr std::uint64_t kBlock = 1024;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  const auto counts = parallel_map(blocks, jobs, [&](std::size_t b) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = b * kBlock; i < std::min(trials, (b + 1) * kBlock); ++i)
      hits += sample_a1(g, start, cfg.child(i)) ? 1 : 0;
    return hits;
  });
  FrequencyEstimate est;
  est.trials = trials;
  for (auto c : counts) est.hits += c;
  est.freq = static_cast<double>(est.hits) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.freq * (1.0 - est.freq) / static_cast<double>(trials));
  return est;
}

// ---------------------------------------------------------------------------
// Scaling experiments

struct SampleTreeConfig {
  std::int64_t window = 512;
  std::int64_t root_factor = 4;
  std::uint64_t step_cap = 1'000'000'000;
};

struct VolumeRow {
  std::uint64_t r = 0;
  std::uint64_t used = 0;
  std::uint64_t clipped = 0;
  double median = 0.0;
  double mean = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
};

struct VolumeScaling {
  std::vector<VolumeRow> rows;
  ExponentFit fit;
  std::vector<std::string> warnings;
};

/// |B_U(0, r)| for every r in `radii` on one tree sample; entries whose ball
/// reaches the window edge come back empty.
inline std::vector<std::optional<std::uint64_t>> sample_ball_volumes(
    std::span<const std::uint64_t> radii, const SampleTreeConfig& tc, RngConfig cfg) {
  LatticeWilson lw(detail::checked_mul(tc.window, tc.root_factor), cfg, tc.step_cap);
  const std::uint64_t r_max = *std::max_element(radii.begin(), radii.end());
  const auto ball = lw.grow_ball(kOrigin, r_max, tc.window);
  std::vector<std::optional<std::uint64_t>> out;
  for (std::uint64_t r : radii) {
    bool clipped = false;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < ball.vertices.size() && ball.dist[i] <= r; ++i) {
      ++count;
      if (ball.dist[i] < r && !lw.tree().complete(ball.vertices[i])) clipped = true;
    }
    out.push_back(clipped ? std::nullopt : std::optional<std::uint64_t>(count));
  }
  return out;
}

/// Table and fit from per-sample volumes (one entry per radius, empty when
/// the ball was clipped). Radii where every sample is clipped are dropped.
inline VolumeScaling summarize_volumes(
    std::span<const std::uint64_t> radii,
    const std::vector<std::vector<std::optional<std::uint64_t>>>& per_sample) {
  VolumeScaling out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    VolumeRow row;
    row.r = radii[i];
    std::vector<double> v;
    for (const auto& s : per_sample) {
      if (s.at(i))
        v.push_back(static_cast<double>(*s[i]));
      else
        ++row.clipped;
    }
    row.used = v.size();
    if (v.empty()) {
      out.warnings.push_back("r=" + std::to_string(row.r) + " dropped: every sample clipped");
      continue;
    }
    row.median = median(v);
    row.mean = mean(v);
    row.q10 = quantile(v, 0.1);
    row.q90 = quantile(v, 0.9);
    out.rows.push_back(row);
    xs.push_back(static_cast<double>(row.r));
    ys.push_back(row.median);
  }
  if (xs.size() >= 2) out.fit = loglog_fit(xs, ys);
  return out;
}

/// Intrinsic ball volumes of x on a fixed tree, empty where clipped.
inline std::vector<std::optional<std::uint64_t>> ball_volumes(const SpanningTree& t,
                                                              const Point& x,
                                                              std::span<const std::uint64_t> radii) {
  std::vector<std::optional<std::uint64_t>> out;
  for (std::uint64_t r : radii) {
    const auto b = intrinsic_ball(t, x, r);
    out.push_back(b.clipped ? std::nullopt : std::optional<std::uint64_t>(b.volume()));
  }
  return out;
}

namespace detail {
inline void check_increasing(std::span<const std::uint64_t> xs, const char* what) {
  if (xs.empty()) throw InvalidInput(std::string(what) + ": empty list");
  if (xs.front() < 1) throw InvalidInput(std::string(what) + ": values must be >= 1");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] <= xs[i - 1]) throw InvalidInput(std::string(what) + ": values must be strictly increasing");
}
}  // namespace detail

/// Median |B_U(0, r)| over independent window USTs, fitted against r on
/// log-log axes. Each sample uses stream cfg.child(s), so results do not
/// depend on `jobs`.
inline VolumeScaling volume_scaling_experiment(std::span<const std::uint64_t> radii,
                                               std::uint64_t samples,
                                               const SampleTreeConfig& tc, RngConfig cfg,
                                               unsigned jobs = 1) {
  detail::check_increasing(radii, "volume_scaling_experiment: radii");
  if (samples < 1) throw InvalidInput("volume_scaling_experiment: samples must be >= 1");
  const auto per_sample = parallel_map(samples, jobs, [&](std::size_t s) {
    return sample_ball_volumes(radii, tc, cfg.child(s));
  });
  return summarize_volumes(radii, per_sample);
}

struct HeatKernelRow {
  std::uint64_t n = 0;           ///< the kernel is p_{2n}(0, 0)
  double median = 0.0;
  double mean = 0.0;
  double normalized_mean = 0.0;  ///< mean of n^{3/(3+beta)} p_{2n}(0,0)
  double normalized_variance = 0.0;
  double max_gap = 0.0;          ///< largest upper-lower bound gap across samples
};

struct HeatKernelScaling {
  std::vector<HeatKernelRow> rows;
  ExponentFit fit;
  double beta = kDefaultBeta;
};

struct KernelSampleOptions {
  std::uint64_t initial_radius = 64;
  double relative_gap = 1e-6;
};

/// p_{2n}(0, 0) for every n on one tree sample, with the intrinsic state
/// radius doubled until the two-sided bounds agree to `relative_gap`.
inline std::vector<ReturnBounds> sample_return_probabilities(std::span<const std::uint64_t> ns,
                                                             const SampleTreeConfig& tc,
                                                             const KernelSampleOptions& opt,
                                                             RngConfig cfg) {
  LatticeWilson lw(detail::checked_mul(tc.window, tc.root_factor), cfg, tc.step_cap);
  std::vector<std::uint64_t> steps;
  for (auto n : ns) steps.push_back(2 * n);
  const std::uint64_t exact_radius = steps.back() / 2;
  for (std::uint64_t d = std::min(opt.initial_radius, exact_radius);; d = std::min(2 * d, exact_radius)) {
    const auto ball = lw.grow_ball(kOrigin, d + 1, tc.window);
    if (ball.clipped)
      throw RuntimeFailure("sample_return_probabilities: the walk region reaches the window edge; "
                           "increase the window");
    auto b = return_bounds(lw.tree(), lw.tree().id(kOrigin), steps, d);
    bool tight = true;
    for (const auto& r : b)
      if (r.upper - r.lower > opt.relative_gap * r.lower) tight = false;
    if (tight || d == exact_radius) return b;
  }
}

/// Table, fit and normalized-kernel spread from per-sample bounds.
inline HeatKernelScaling summarize_kernels(std::span<const std::uint64_t> ns,
                                           const std::vector<std::vector<ReturnBounds>>& per_sample,
                                           double beta = kDefaultBeta) {
  HeatKernelScaling out;
  out.beta = beta;
  const double expo = 3.0 / (3.0 + beta);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    HeatKernelRow row;
    row.n = ns[i];
    std::vector<double> v, normalized;
    for (const auto& s : per_sample) {
      v.push_back(s.at(i).lower);
      normalized.push_back(std::pow(static_cast<double>(ns[i]), expo) * s[i].lower);
      row.max_gap = std::max(row.max_gap, s[i].upper - s[i].lower);
    }
    row.median = median(v);
    row.mean = mean(v);
    row.normalized_mean = mean(normalized);
    row.normalized_variance = normalized.size() > 1 ? variance(normalized) : 0.0;
    out.rows.push_back(row);
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(row.median);
  }
  if (xs.size() >= 2) out.fit = loglog_fit(xs, ys);
  return out;
}

/// Exact p_{2n}(x, x) on a fixed, fully complete tree.
inline std::vector<ReturnBounds> return_probabilities(const SpanningTree& t, const Point& x,
                                                      std::span<const std::uint64_t> ns) {
  std::vector<std::uint64_t> steps;
  for (auto n : ns) steps.push_back(2 * n);
  return return_bounds(t, t.id(x), steps, steps.back() / 2);
}

/// Median p_{2n}(0, 0) over independent window USTs, fitted against n on
/// log-log axes, with the spread of n^{3/(3+beta)} p_{2n}(0, 0) across trees.
inline HeatKernelScaling heat_kernel_scaling_experiment(std::span<const std::uint64_t> ns,
                                                        std::uint64_t samples,
                                                        const SampleTreeConfig& tc, RngConfig cfg,
                                                        unsigned jobs = 1,
                                                        double beta = kDefaultBeta,
                                                        const KernelSampleOptions& opt = {}) {
  detail::check_increasing(ns, "heat_kernel_scaling_experiment: n values");
  if (samples < 1) throw InvalidInput("heat_kernel_scaling_experiment: samples must be >= 1");
  const auto per_sample = parallel_map(samples, jobs, [&](std::size_t s) {
    return sample_return_probabilities(ns, tc, opt, cfg.child(s));
  });
  return summarize_kernels(ns, per_sample, beta);
}

}  // namespace ust3d
