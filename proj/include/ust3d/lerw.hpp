// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ust3d/geometry.hpp"
#include "ust3d/parallel.hpp"
#include "ust3d/rng.hpp"
#include "ust3d/stats.hpp"

namespace ust3d {

/// Chronological loop erasure computed forward: vertices are appended as the
/// walk visits them, and a revisit truncates the partial path back to the
/// earlier occurrence. Expected O(1) per step.
class LoopEraser {
 public:
  LoopEraser() = default;
  explicit LoopEraser(const Point& start) { push(start); }

  void push(const Point& p) {
    auto [it, inserted] = index_.try_emplace(p, path_.size());
    if (inserted) {
      path_.push_back(p);
      return;
    }
    const std::size_t keep = it->second + 1;
    for (std::size_t i = keep; i < path_.size(); ++i) index_.erase(path_[i]);
    path_.resize(keep);
  }

  bool contains(const Point& p) const { return index_.contains(p); }
  std::size_t length() const { return path_.empty() ? 0 : path_.size() - 1; }
  const std::vector<Point>& vertices() const { return path_; }
  std::vector<Point> take() && { return std::move(path_); }

  void clear() {
    path_.clear();
    index_.clear();
  }

 private:
  std::vector<Point> path_;
  PointMap<std::size_t> index_;
};

/// LE(path): a simple path from path.front() to path.back().
inline Path loop_erase(const Path& path) {
  if (path.empty()) return {};
  LoopEraser le;
  for (const Point& p : path) le.push(p);
  return Path::trusted(std::move(le).take());
}

/// M_n: length of the loop erasure of a simple random walk from the origin
/// run until it leaves the open Euclidean ball of radius n.
inline std::uint64_t sample_lerw_length(std::int64_t n, RngConfig cfg) {
  if (n < 1) throw InvalidInput("sample_lerw_length: n must be >= 1");
  Rng rng(cfg);
  LoopEraser le(kOrigin);
  const std::int64_t n2 = n * n;
  Point cur = kOrigin;
  while (true) {
    cur = neighbor(cur, rng.direction());
    le.push(cur);
    if (cur.x * cur.x + cur.y * cur.y + cur.z * cur.z >= n2) break;
  }
  return le.length();
}

struct GrowthRow {
  std::int64_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

struct BetaEstimate {
  std::vector<GrowthRow> rows;
  ExponentFit fit;
};

/// Least-squares slope of log E(M_n) against log n from given means.
inline ExponentFit fit_growth_exponent(std::span<const std::int64_t> radii,
                                       std::span<const double> means) {
  if (radii.size() < 2) throw InvalidInput("fit_growth_exponent: needs >= 2 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw InvalidInput("fit_growth_exponent: radii must be strictly increasing");
  std::vector<double> x(radii.begin(), radii.end());
  return loglog_fit(x, means);
}

/// Samples of M_n, one independent stream per trial.
inline std::vector<double> sample_lerw_lengths(std::int64_t n, std::uint64_t trials,
                                               RngConfig cfg, unsigned jobs = 1) {
  const RngConfig family = cfg.child(static_cast<std::uint64_t>(n));
  return parallel_map(trials, jobs, [&](std::size_t t) {
    return static_cast<double>(sample_lerw_length(n, family.child(t)));
  });
}

/// Growth-exponent estimate from sample means of M_n over `radii`.
inline BetaEstimate estimate_beta(std::span<const std::int64_t> radii, std::uint64_t trials,
                                  RngConfig cfg, unsigned jobs = 1) {
  if (trials < 1) throw InvalidInput("estimate_beta: trials must be >= 1");
  if (radii.size() < 2) throw InvalidInput("estimate_beta: needs >= 2 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw InvalidInput("estimate_beta: radii must be strictly increasing");
  BetaEstimate est;
  std::vector<double> means;
  for (std::int64_t n : radii) {
    const auto xs = sample_lerw_lengths(n, trials, cfg, jobs);
    est.rows.push_back({n, mean(xs), standard_error(xs), trials});
    means.push_back(est.rows.back().mean);
  }
  est.fit = fit_growth_exponent(radii, means);
  return est;
}

struct TailRow {
  double kappa = 0.0;
  double upper_freq = 0.0;  ///< fraction of samples >= kappa * mean
  double lower_freq = 0.0;  ///< fraction of samples <= mean / kappa
};

struct TailProfile {
  double mean = 0.0;
  std::uint64_t trials = 0;
  std::vector<TailRow> rows;
};

/// Empirical upper and lower tails of M_n / E(M_n), with E(M_n) replaced by
/// the sample mean.
inline TailProfile tail_profile_from_samples(std::span<const double> samples,
                                             std::span<const double> kappas) {
  for (std::size_t i = 1; i < kappas.size(); ++i)
    if (kappas[i] <= kappas[i - 1])
      throw InvalidInput("tail_profile: kappa grid must be strictly increasing");
  for (double k : kappas)
    if (!(k >= 1.0)) throw InvalidInput("tail_profile: kappa must be >= 1");
  TailProfile prof;
  prof.trials = samples.size();
  prof.mean = mean(samples);
  const double total = static_cast<double>(samples.size());
  for (double k : kappas) {
    std::uint64_t up = 0, down = 0;
    for (double s : samples) {
      if (s >= k * prof.mean) ++up;
      if (s <= prof.mean / k) ++down;
    }
    prof.rows.push_back({k, up / total, down / total});
  }
  return prof;
}

inline TailProfile tail_profile(std::int64_t n, std::uint64_t trials,
                                std::span<const double> kappas, RngConfig cfg,
                                unsigned jobs = 1) {
  if (trials < 1) throw InvalidInput("tail_profile: trials must be >= 1");
  const auto xs = sample_lerw_lengths(n, trials, cfg, jobs);
  return tail_profile_from_samples(xs, kappas);
}

/// Linear fit of log(upper-tail frequency) against kappa over the rows with a
/// nonzero frequency. A negative slope is the exponential-tail signature.
inline ExponentFit upper_tail_fit(const TailProfile& prof) {
  std::vector<double> k, lf;
  for (const auto& r : prof.rows)
    if (r.upper_freq > 0.0) {
      k.push_back(r.kappa);
      lf.push_back(std::log(r.upper_freq));
    }
  return linear_fit(k, lf);
}

}  // namespace ust3d
