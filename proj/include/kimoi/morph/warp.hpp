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

// Float RGB samples over an output rectangle.
struct Patch {
  PixelBox box;
  std::vector<float> rgb;

  float at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y - box.y0) * static_cast<std::size_t>(box.width) +
                static_cast<std::size_t>(x - box.x0)) * 3 + static_cast<std::size_t>(c)];
  }
};

// Bilinear sample with clamp-to-edge addressing.
inline void sample_bilinear(const Image& image, double sx, double sy, float out[3]) {
  const double fx0 = std::floor(sx), fy0 = std::floor(sy);
  const float fx = static_cast<float>(sx - fx0);
  const float fy = static_cast<float>(sy - fy0);
  auto clamp_x = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, double(image.width - 1))); };
  auto clamp_y = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, double(image.height - 1))); };
  const int x0 = clamp_x(fx0), x1 = clamp_x(fx0 + 1.0);
  const int y0 = clamp_y(fy0), y1 = clamp_y(fy0 + 1.0);
  for (int c = 0; c < 3; ++c) {
    const float top = (1.0f - fx) * image.at(x0, y0, c) + fx * image.at(x1, y0, c);
    const float bottom = (1.0f - fx) * image.at(x0, y1, c) + fx * image.at(x1, y1, c);
    out[c] = (1.0f - fy) * top + fy * bottom;
  }
}

// Inverse-mapping warp: output pixel p takes the source sample at
// transform^-1(p). `transform` maps source coordinates to output coordinates.
inline Patch warp_affine(const Image& image, const AffineTransform2D& transform, const PixelBox& roi) {
  const AffineTransform2D inverse = transform.inverse();
  Patch patch{roi, {}};
  if (roi.empty()) return patch;
  patch.rgb.resize(static_cast<std::size_t>(roi.width) * static_cast<std::size_t>(roi.height) * 3);
  std::size_t n = 0;
  for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
    for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
      const Point2 s = inverse.apply({double(x), double(y)});
      sample_bilinear(image, s.x, s.y, &patch.rgb[n]);
      n += 3;
    }
  }
  return patch;
}

}  // namespace kimoi
