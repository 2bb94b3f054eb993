// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>
#include <absl/hash/hash.h>

namespace ust3d {

/// Rejected input: a precondition of a public operation does not hold.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not complete (step cap, clipped region, overflow).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw RuntimeFailure("lattice coordinate overflow");
  return out;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) throw RuntimeFailure("lattice coordinate overflow");
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw RuntimeFailure("lattice coordinate overflow");
  return out;
}

}  // namespace detail

/// A vertex of Z^3.
struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
  friend constexpr auto operator<=>(const Point&, const Point&) = default;

  friend Point operator+(const Point& a, const Point& b) {
    return {detail::checked_add(a.x, b.x), detail::checked_add(a.y, b.y),
            detail::checked_add(a.z, b.z)};
  }
  friend Point operator-(const Point& a, const Point& b) {
    return {detail::checked_sub(a.x, b.x), detail::checked_sub(a.y, b.y),
            detail::checked_sub(a.z, b.z)};
  }

  std::int64_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::int64_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  template <typename H>
  friend H AbslHashValue(H h, const Point& p) {
    return H::combine(std::move(h), p.x, p.y, p.z);
  }

  friend std::ostream& operator<<(std::ostream& os, const Point& p) {
    return os << p.x << ' ' << p.y << ' ' << p.z;
  }
};

inline constexpr Point kOrigin{0, 0, 0};

/// The six unit steps of Z^3, in the fixed order +x, -x, +y, -y, +z, -z.
inline constexpr std::array<Point, 6> kUnitSteps{{
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

inline Point unit_vector(int axis) {
  Point e;
  e[axis] = 1;
  return e;
}

inline Point neighbor(const Point& p, int direction) { return p + kUnitSteps[direction]; }

inline std::int64_t squared_distance(const Point& p, const Point& q) {
  const Point d = p - q;
  std::int64_t s = detail::checked_mul(d.x, d.x);
  s = detail::checked_add(s, detail::checked_mul(d.y, d.y));
  return detail::checked_add(s, detail::checked_mul(d.z, d.z));
}

inline double euclidean_distance(const Point& p, const Point& q) {
  return std::sqrt(static_cast<double>(squared_distance(p, q)));
}

inline std::int64_t linf_distance(const Point& p, const Point& q) {
  const Point d = p - q;
  return std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
}

/// True iff p and q are lattice neighbours (|p - q| = 1).
inline bool adjacent(const Point& p, const Point& q) {
  const Point d = p - q;
  return std::abs(d.x) + std::abs(d.y) + std::abs(d.z) == 1;
}

enum class Metric { euclidean, linf };

/// Closed ball B(center, radius) or cube B_inf(center, radius).
struct Box {
  Point center;
  std::int64_t radius = 0;
  Metric metric = Metric::linf;

  Box() = default;
  Box(Point c, std::int64_t r, Metric m) : center(c), radius(r), metric(m) {
    if (r < 0) throw InvalidInput("Box: radius must be nonnegative");
  }

  bool contains(const Point& p) const {
    if (metric == Metric::linf) return linf_distance(p, center) <= radius;
    return squared_distance(p, center) <= detail::checked_mul(radius, radius);
  }

  /// All lattice points of the box, in lexicographic (x, y, z) order.
  std::vector<Point> points() const {
    std::vector<Point> out;
    for (std::int64_t dx = -radius; dx <= radius; ++dx)
      for (std::int64_t dy = -radius; dy <= radius; ++dy)
        for (std::int64_t dz = -radius; dz <= radius; ++dz) {
          const Point p = center + Point{dx, dy, dz};
          if (contains(p)) out.push_back(p);
        }
    return out;
  }
};

using PointSet = absl::flat_hash_set<Point>;
template <typename V>
using PointMap = absl::flat_hash_map<Point, V>;

/// {x in A : some lattice neighbour of x lies outside A}.
inline PointSet inner_boundary(const PointSet& a) {
  PointSet out;
  for (const Point& p : a) {
    for (const Point& e : kUnitSteps) {
      if (!a.contains(p + e)) {
        out.insert(p);
        break;
      }
    }
  }
  return out;
}

/// {x not in A : some lattice neighbour of x lies in A}.
inline PointSet outer_boundary(const PointSet& a) {
  PointSet out;
  for (const Point& p : a)
    for (const Point& e : kUnitSteps)
      if (const Point q = p + e; !a.contains(q)) out.insert(q);
  return out;
}

/// A finite nearest-neighbour path. Consecutive vertices are lattice
/// neighbours; length() is the number of steps.
class Path {
 public:
  Path() = default;
  explicit Path(Point start) : vertices_{start} {}

  /// Validating constructor.
  static Path from_vertices(std::vector<Point> vertices) {
    if (vertices.empty()) throw InvalidInput("Path: needs at least one vertex");
    for (std::size_t i = 1; i < vertices.size(); ++i)
      if (!adjacent(vertices[i - 1], vertices[i]))
        throw InvalidInput("Path: vertices " + std::to_string(i - 1) + " and " +
                           std::to_string(i) + " are not lattice neighbours");
    Path p;
    p.vertices_ = std::move(vertices);
    return p;
  }

  /// Skips validation; callers guarantee the nearest-neighbour invariant.
  static Path trusted(std::vector<Point> vertices) {
    Path p;
    p.vertices_ = std::move(vertices);
    return p;
  }

  std::size_t length() const { return vertices_.empty() ? 0 : vertices_.size() - 1; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const Point& operator[](std::size_t i) const { return vertices_[i]; }
  const Point& front() const { return vertices_.front(); }
  const Point& back() const { return vertices_.back(); }
  const std::vector<Point>& vertices() const { return vertices_; }
  auto begin() const { return vertices_.begin(); }
  auto end() const { return vertices_.end(); }

  /// Sub-path gamma[first..last], inclusive.
  Path slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= vertices_.size()) throw InvalidInput("Path::slice: bad range");
    return trusted({vertices_.begin() + static_cast<std::ptrdiff_t>(first),
                    vertices_.begin() + static_cast<std::ptrdiff_t>(last) + 1});
  }

  void push_back(const Point& p) { vertices_.push_back(p); }

  friend bool operator==(const Path&, const Path&) = default;

 private:
  std::vector<Point> vertices_;
};

/// a then b, with the shared vertex appearing once.
inline Path concat(const Path& a, const Path& b) {
  if (a.empty() || b.empty() || a.back() != b.front())
    throw InvalidInput("concat: last vertex of the first path must equal the first of the second");
  std::vector<Point> v = a.vertices();
  v.insert(v.end(), b.begin() + 1, b.end());
  return Path::trusted(std::move(v));
}

/// One vertex per line, "x y z".
inline void write_path(std::ostream& os, const Path& path) {
  for (const Point& p : path) os << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

inline Path read_path(std::istream& is) {
  std::vector<Point> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Point p;
    std::string rest;
    if (!(ls >> p.x >> p.y >> p.z) || (ls >> rest))
      throw InvalidInput("read_path: malformed line " + std::to_string(line_no));
    v.push_back(p);
  }
  return Path::from_vertices(std::move(v));
}

}  // namespace ust3d
