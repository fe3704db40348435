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

#include <array>
#include <cmath>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"

namespace kimoi {

inline constexpr double kDegenerateArea = 1e-12;

using Triangle2 = std::array<Point2, 3>;

// Half the cross product; positive for counter-clockwise in a y-up frame.
inline double signed_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

inline double signed_area(const Triangle2& t) { return signed_area(t[0], t[1], t[2]); }

// Row-major 2x3 matrix acting on (x, y, 1).
struct AffineTransform2D {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineTransform2D identity() { return {}; }

  Point2 apply(Point2 p) const {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
  }

  double determinant() const { return m[0] * m[4] - m[1] * m[3]; }

  AffineTransform2D inverse() const {
    const double det = determinant();
    if (!(std::abs(det) > kDegenerateArea)) {
      throw Error(ErrorKind::kSingularGeometry, "affine transform is not invertible");
    }
    const double a = m[4] / det, b = -m[1] / det, d = -m[3] / det, e = m[0] / det;
    return {{a, b, -(a * m[2] + b * m[5]), d, e, -(d * m[2] + e * m[5])}};
  }

  friend bool operator==(const AffineTransform2D&, const AffineTransform2D&) = default;
};

// Exact solution of the 6-unknown system mapping src[i] -> dst[i]. Solved in
// coordinates relative to src[0] which keeps the system well conditioned for
// pixel-scale inputs.
inline AffineTransform2D solve_affine(const Triangle2& src, const Triangle2& dst) {
  const double ux = src[1].x - src[0].x, uy = src[1].y - src[0].y;
  const double vx = src[2].x - src[0].x, vy = src[2].y - src[0].y;
  const double det = ux * vy - uy * vx;
  if (!(std::abs(0.5 * det) > kDegenerateArea)) {
    throw Error(ErrorKind::kSingularGeometry, "solve_affine: degenerate source triangle");
  }
  const double px = dst[1].x - dst[0].x, py = dst[1].y - dst[0].y;
  const double qx = dst[2].x - dst[0].x, qy = dst[2].y - dst[0].y;
  // Linear part L satisfies L*u = p, L*v = q.
  const double a = (px * vy - qx * uy) / det;
  const double b = (qx * ux - px * vx) / det;
  const double d = (py * vy - qy * uy) / det;
  const double e = (qy * ux - py * vx) / det;
  AffineTransform2D t;
  t.m = {a, b, dst[0].x - (a * src[0].x + b * src[0].y),
         d, e, dst[0].y - (d * src[0].x + e * src[0].y)};
  return t;
}

}  // namespace kimoi
