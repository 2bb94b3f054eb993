// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "ust3d/geometry.hpp"

namespace ust3d {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance; 0 for fewer than two samples.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

/// Linear-interpolated quantile, p in [0, 1].
inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw InvalidInput("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

/// Result of a least-squares line fit y = intercept + slope * x, usually in
/// log-log coordinates. `xs` keeps the abscissae actually used (for exponent
/// fits: the radii or times, before taking logs).
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  std::vector<double> xs;
};

inline ExponentFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("linear_fit: size mismatch");
  if (x.size() < 2) throw InvalidInput("linear_fit: needs at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw InvalidInput("linear_fit: degenerate abscissae");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.xs.assign(x.begin(), x.end());
  return fit;
}

/// Fit of log y against log x; all values must be positive.
inline ExponentFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("loglog_fit: nonpositive value");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  ExponentFit fit = linear_fit(lx, ly);
  fit.xs.assign(x.begin(), x.end());
  return fit;
}

struct ChiSquareResult {
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against equal cell probabilities.
inline ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw InvalidInput("chi_square_uniform: needs at least two cells");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  ChiSquareResult r;
  for (auto c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.degrees_of_freedom = static_cast<double>(counts.size() - 1);
  r.p_value = boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(r.degrees_of_freedom), r.statistic));
  return r;
}

/// Two-sample homogeneity test on a contingency table of two count rows.
/// Cells empty in both samples are dropped.
inline ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                             std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw InvalidInput("chi_square_two_sample: size mismatch");
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  if (na <= 0.0 || nb <= 0.0) throw InvalidInput("chi_square_two_sample: empty sample");
  ChiSquareResult r;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    ++cells;
    const double ea = col * na / (na + nb);
    const double eb = col * nb / (na + nb);
    r.statistic += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  if (cells < 2) return r;
  r.degrees_of_freedom = static_cast<double>(cells - 1);
  r.p_value = boost::math::cdf(
      boost::math::complement(boost::math::chi_squared(r.degrees_of_freedom), r.statistic));
  return r;
}

}  // namespace ust3d
