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
#include <cmath>
#include <cstddef>
#include <vector>

#include "kimoi/geometry/affine.hpp"
#include "kimoi/morph/image.hpp"

namespace kimoi {

// Per-pixel coverage over a bounding box; zero outside it.
struct TriangleMask {
  PixelBox box;
  std::vector<float> coverage;  // box.width * box.height, row-major

  float at(int x, int y) const {
    if (!box.contains(x, y)) return 0.0f;
    return coverage[static_cast<std::size_t>(y - box.y0) * static_cast<std::size_t>(box.width) +
                    static_cast<std::size_t>(x - box.x0)];
  }

  double total() const {
    double s = 0.0;
    for (float c : coverage) s += c;
    return s;
  }

  bool empty() const { return box.empty(); }
};

namespace detail {

// Edge function of p against the directed edge a->b. Evaluated with the
// endpoints in a canonical order so the two triangles sharing an edge see
// exactly negated values.
inline double edge_value(Point2 a, Point2 b, Point2 p) {
  const bool swapped = b.x < a.x || (b.x == a.x && b.y < a.y);
  const Point2 u = swapped ? b : a;
  const Point2 v = swapped ? a : b;
  const double e = (v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x);
  return swapped ? -e : e;
}

// Fill rule: a point exactly on an edge belongs to the triangle it would
// enter under an infinitesimal (+d, +d^2) nudge. For a positively oriented
// triangle that is the case when the edge direction has dy < 0, or dy == 0
// and dx > 0. Opposite edges get opposite answers, so shared edges and
// shared vertices are covered exactly once.
inline bool owns_boundary(Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

struct EdgeSetup {
  Triangle2 v;
  bool owns[3];
};

inline EdgeSetup orient_positive(const Triangle2& tri) {
  EdgeSetup s{tri, {}};
  if (signed_area(tri) < 0) std::swap(s.v[1], s.v[2]);
  for (int e = 0; e < 3; ++e) s.owns[e] = owns_boundary(s.v[e], s.v[(e + 1) % 3]);
  return s;
}

inline bool covers(const EdgeSetup& s, Point2 p) {
  for (int e = 0; e < 3; ++e) {
    const double value = edge_value(s.v[e], s.v[(e + 1) % 3], p);
    if (value < 0.0 || (value == 0.0 && !s.owns[e])) return false;
  }
  return true;
}

}  // namespace detail

// Pixel centers sit at integer coordinates. Binary masks test the center;
// anti-aliased masks average a 4x4 grid of sub-samples under the same rule.
inline TriangleMask rasterize_mask(const Triangle2& tri, int height, int width,
                                   bool antialias = false) {
  TriangleMask mask;
  if (!(std::abs(signed_area(tri)) > kDegenerateArea) || width <= 0 || height <= 0) return mask;
  const detail::EdgeSetup setup = detail::orient_positive(tri);
  const double pad = antialias ? 0.5 : 0.0;
  double min_x = tri[0].x, max_x = tri[0].x, min_y = tri[0].y, max_y = tri[0].y;
  for (const Point2& p : tri) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - pad)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - pad)));
  const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x + pad)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y + pad)));
  if (x1 < x0 || y1 < y0) return mask;
  mask.box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  mask.coverage.assign(static_cast<std::size_t>(mask.box.width) * static_cast<std::size_t>(mask.box.height), 0.0f);
  constexpr int kSub = 4;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      float c = 0.0f;
      if (!antialias) {
        c = detail::covers(setup, {double(x), double(y)}) ? 1.0f : 0.0f;
      } else {
        int hits = 0;
        for (int sy = 0; sy < kSub; ++sy) {
          for (int sx = 0; sx < kSub; ++sx) {
            const Point2 p{x - 0.5 + (sx + 0.5) / kSub, y - 0.5 + (sy + 0.5) / kSub};
            hits += detail::covers(setup, p) ? 1 : 0;
          }
        }
        c = static_cast<float>(hits) / float(kSub * kSub);
      }
      mask.coverage[static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(mask.box.width) +
                    static_cast<std::size_t>(x - x0)] = c;
    }
  }
  return mask;
}

}  // namespace kimoi
