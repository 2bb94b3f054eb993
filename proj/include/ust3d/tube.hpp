// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "ust3d/geometry.hpp"

namespace ust3d {

/// The straight tube of side-m boxes along one coordinate axis used by the
/// comb construction.
///
/// Box j is the cube of side m centred at x_j = j*m*e_axis, so its faces sit
/// at abscissae a_j = (j - 1/2) m and a_{j+1}. All slab positions are integer
/// abscissae: m must be even, and the fractional offsets a + q/2, a + q, a - q,
/// a - 2q are rounded to the nearest integer (ties away from zero). With
/// integer slabs a nearest-neighbour walk cannot cross a slab without
/// landing on it, so hitting times are exact integer times.
///
/// Sets, writing u for the axis coordinate and (v, w) for the transverse pair:
///   Q[a, b]     = {a <= u <= b, |v|, |w| <= m}
///   Q(a)        = {u == a, |v|, |w| <= m}
///   Q~(a)       = {u == a, |v|, |w| <= m/2}
///   R_j         = {u == j m, v^2 + w^2 < m^2/100 or v^2 + w^2 > m^2/64}
class TubeGeometry {
 public:
  TubeGeometry(std::int64_t m, double n_scale, int axis = 0)
      : m_(m), n_scale_(n_scale), q_(static_cast<double>(m) / (n_scale * n_scale)), axis_(axis) {
    if (m < 2 || m % 2 != 0) throw InvalidInput("TubeGeometry: m must be even and >= 2");
    if (!(n_scale > 0.0)) throw InvalidInput("TubeGeometry: N must be positive");
    if (q_ < 1.0) throw InvalidInput("TubeGeometry: backtrack scale q = m/N^2 must be >= 1");
    if (axis < 0 || axis > 2) throw InvalidInput("TubeGeometry: axis must be 0, 1 or 2");
  }

  std::int64_t m() const { return m_; }
  double n_scale() const { return n_scale_; }
  double q() const { return q_; }
  int axis() const { return axis_; }

  /// a_j = (j - 1/2) m.
  std::int64_t face(std::int64_t j) const { return j * m_ - m_ / 2; }

  /// Rounds a real abscissa a + offset to its integer slab.
  static std::int64_t slab(double abscissa) { return std::llround(abscissa); }
  std::int64_t slab(std::int64_t a, double offset) const {
    return slab(static_cast<double>(a) + offset);
  }

  Point box_center(std::int64_t j) const {
    Point c;
    c[axis_] = j * m_;
    return c;
  }

  std::int64_t along(const Point& p) const { return p[axis_]; }
  std::int64_t transverse1(const Point& p) const { return p[(axis_ + 1) % 3]; }
  std::int64_t transverse2(const Point& p) const { return p[(axis_ + 2) % 3]; }

  bool in_cross_section(const Point& p, std::int64_t half) const {
    return std::abs(transverse1(p)) <= half && std::abs(transverse2(p)) <= half;
  }

  bool in_tube(const Point& p, std::int64_t a, std::int64_t b) const {
    return along(p) >= a && along(p) <= b && in_cross_section(p, m_);
  }
  bool on_face(const Point& p, std::int64_t a) const {
    return along(p) == a && in_cross_section(p, m_);
  }
  /// 2*|v| <= m etc., exact for every even m.
  bool on_inner_face(const Point& p, std::int64_t a) const {
    return along(p) == a && 2 * std::abs(transverse1(p)) <= m_ &&
           2 * std::abs(transverse2(p)) <= m_;
  }
  bool in_forbidden(const Point& p, std::int64_t j) const {
    if (along(p) != j * m_) return false;
    const std::int64_t r2 = transverse1(p) * transverse1(p) + transverse2(p) * transverse2(p);
    return 100 * r2 < m_ * m_ || 64 * r2 > m_ * m_;
  }

  /// The first integer time a path visits Q(a), if any.
  template <typename PathLike>
  std::optional<std::size_t> hitting_time(const PathLike& path, std::int64_t a,
                                          std::size_t from = 0) const {
    for (std::size_t k = from; k < path.size(); ++k)
      if (on_face(path[k], a)) return k;
    return std::nullopt;
  }

 private:
  std::int64_t m_;
  double n_scale_;
  double q_;
  int axis_;
};

}  // namespace ust3d
