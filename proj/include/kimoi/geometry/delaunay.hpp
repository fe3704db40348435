// Copyright 2026 The kimoi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/affine.hpp"
#include "kimoi/geometry/landmarks.hpp"

namespace kimoi {

using TriangleIndices = std::array<std::size_t, 3>;

struct TriangleMesh {
  std::vector<TriangleIndices> triangles;

  std::size_t size() const { return triangles.size(); }
  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

inline Triangle2 triangle_points(std::span<const Point2> points, const TriangleIndices& tri) {
  return {points[tri[0]], points[tri[1]], points[tri[2]]};
}

// Andrew's monotone chain; counter-clockwise (y-up) without collinear points.
inline std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Point2> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && signed_area(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && signed_area(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(std::span<const Point2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2 a = polygon[i];
    const Point2 b = polygon[(i + 1) % polygon.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(twice);
}

// > 0 when d lies strictly inside the circumcircle of the counter-clockwise
// triangle (a, b, c).
inline double in_circle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

namespace detail {

inline TriangleIndices ccw(std::span<const Point2> pts, TriangleIndices t) {
  if (signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) < 0) std::swap(t[1], t[2]);
  return t;
}

inline double incircle_tolerance(std::span<const Point2> pts) {
  double extent = 0.0;
  for (const Point2& p : pts) {
    for (const Point2& q : pts) extent = std::max(extent, l2_norm(p - q));
  }
  // The determinant scales with the fourth power of the extent.
  const double e2 = extent * extent;
  return 1e-12 * e2 * e2;
}

}  // namespace detail

// Delaunay triangulation of landmark points. Builds a sweep triangulation
// over lexicographically sorted points, then applies Lawson flips until
// every interior edge is locally Delaunay. Co-circular configurations are
// left unflipped, so ties resolve by insertion (lexicographic) order.
inline TriangleMesh delaunay(std::span<const Point2> points) {
  const std::size_t n = points.size();
  require(n >= 3, ErrorKind::kInvalidInput, "delaunay: need at least 3 points");
  for (const Point2& p : points) {
    require(std::isfinite(p.x) && std::isfinite(p.y), ErrorKind::kInvalidInput,
            "delaunay: non-finite point");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      require(l2_norm(points[i] - points[j]) > 1e-9, ErrorKind::kInvalidInput,
              "delaunay: coincident points");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point2 pa = points[a], pb = points[b];
    return pa.x < pb.x || (pa.x == pb.x && (pa.y < pb.y || (pa.y == pb.y && a < b)));
  });

  auto orient = [&](std::size_t a, std::size_t b, std::size_t c) {
    return signed_area(points[a], points[b], points[c]);
  };

  // Leading run of collinear points.
  std::size_t first_off = 2;
  while (first_off < n && orient(order[0], order[1], order[first_off]) == 0.0) ++first_off;
  require(first_off < n, ErrorKind::kInvalidInput, "delaunay: all points are collinear");

  std::vector<TriangleIndices> tris;
  // Hull kept as a counter-clockwise cycle of point indices.
  std::vector<std::size_t> hull;
  {
    const std::size_t apex = order[first_off];
    for (std::size_t i = 0; i + 1 < first_off; ++i) {
      tris.push_back(detail::ccw(points, {order[i], order[i + 1], apex}));
    }
    for (std::size_t i = 0; i < first_off; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
    if (orient(order[0], order[1], apex) < 0) std::reverse(hull.begin(), hull.end());
  }

  for (std::size_t s = first_off + 1; s < n; ++s) {
    const std::size_t p = order[s];
    const std::size_t h = hull.size();
    std::vector<bool> visible(h);
    bool any = false;
    for (std::size_t i = 0; i < h; ++i) {
      visible[i] = orient(hull[i], hull[(i + 1) % h], p) < 0;
      any = any || visible[i];
    }
    require(any, ErrorKind::kInvalidInput, "delaunay: degenerate point configuration");
    // Visible edges form one contiguous arc; find its start.
    std::size_t start = 0;
    while (!(visible[start] && !visible[(start + h - 1) % h])) start = (start + 1) % h;
    std::size_t count = 0;
    while (visible[(start + count) % h]) {
      const std::size_t a = hull[(start + count) % h];
      const std::size_t b = hull[(start + count + 1) % h];
      tris.push_back(detail::ccw(points, {a, b, p}));
      ++count;
    }
    // Replace the interior vertices of the arc with p.
    std::vector<std::size_t> next;
    next.reserve(h + 1);
    const std::size_t end = (start + count) % h;
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t idx = (end + i) % h;
      next.push_back(hull[idx]);
      if (idx == start) break;
    }
    next.push_back(p);
    hull = std::move(next);
  }

  const double tol = detail::incircle_tolerance(points);
  using Edge = std::pair<std::size_t, std::size_t>;
  bool flipped = true;
  while (flipped) {
    flipped = false;
    std::map<Edge, std::vector<std::size_t>> edges;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t a = tris[t][e], b = tris[t][(e + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}].push_back(t);
      }
    }
    for (const auto& [edge, owners] : edges) {
      if (owners.size() != 2) continue;
      const TriangleIndices& t0 = tris[owners[0]];
      const TriangleIndices& t1 = tris[owners[1]];
      auto opposite = [&](const TriangleIndices& t) {
        for (std::size_t v : t) {
          if (v != edge.first && v != edge.second) return v;
        }
        return t[0];
      };
      const std::size_t c = opposite(t0);
      const std::size_t d = opposite(t1);
      if (in_circle(points[t0[0]], points[t0[1]], points[t0[2]], points[d]) > tol) {
        const TriangleIndices n0 = detail::ccw(points, {c, d, edge.first});
        const TriangleIndices n1 = detail::ccw(points, {d, c, edge.second});
        tris[owners[0]] = n0;
        tris[owners[1]] = n1;
        flipped = true;
        break;
      }
    }
  }

  TriangleMesh mesh;
  for (TriangleIndices t : tris) {
    // Rotate so the smallest index leads; orientation is preserved.
    while (t[0] != std::min({t[0], t[1], t[2]})) std::rotate(t.begin(), t.begin() + 1, t.end());
    mesh.triangles.push_back(t);
  }
  std::sort(mesh.triangles.begin(), mesh.triangles.end());
  return mesh;
}

inline TriangleMesh delaunay(const std::vector<Point2>& points) {
  return delaunay(std::span<const Point2>(points));
}

// Mesh shared by every frame of a clip: triangulates the time-averaged
// landmarks.
inline TriangleMesh reference_mesh(const LandmarkSequence& seq) {
  return delaunay(seq.mean_frame());
}

}  // namespace kimoi
