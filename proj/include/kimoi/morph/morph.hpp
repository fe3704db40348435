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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/affine.hpp"
#include "kimoi/geometry/delaunay.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/morph/image.hpp"
#include "kimoi/morph/raster.hpp"
#include "kimoi/morph/warp.hpp"
#include "kimoi/parallel.hpp"

namespace kimoi {

struct MorphOptions {
  bool antialias = false;
};

struct SkippedTriangle {
  std::size_t frame = 0;
  std::size_t triangle = 0;  // index into the mesh
};

struct MorphFrameResult {
  Image image;
  std::vector<SkippedTriangle> skipped;
};

// Round half to even, then clamp to the 8-bit range.
inline std::uint8_t store_channel(float v) {
  const float r = std::nearbyint(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0f, 255.0f));
}

// Copies the source, then for each mesh triangle in order warps the source
// triangle onto the target triangle and blends it in under the target mask.
// Triangles degenerate in either configuration are skipped and reported.
inline MorphFrameResult morph_frame(const Image& source, std::span<const Point2> source_points,
                                    std::span<const Point2> target_points, const TriangleMesh& mesh,
                                    const MorphOptions& opts = {}) {
  require(source_points.size() == target_points.size(), ErrorKind::kInvalidInput,
          "morph_frame: landmark count mismatch");
  MorphFrameResult result{source, {}};
  Image& out = result.image;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const TriangleIndices& tri = mesh.triangles[f];
    for (std::size_t v : tri) {
      require(v < source_points.size(), ErrorKind::kInvalidInput,
              "morph_frame: mesh references a missing landmark");
    }
    const Triangle2 xs = triangle_points(source_points, tri);
    const Triangle2 xt = triangle_points(target_points, tri);
    if (!(std::abs(signed_area(xs)) > kDegenerateArea) ||
        !(std::abs(signed_area(xt)) > kDegenerateArea)) {
      result.skipped.push_back({0, f});
      continue;
    }
    const AffineTransform2D transform = solve_affine(xs, xt);
    const TriangleMask mask = rasterize_mask(xt, out.height, out.width, opts.antialias);
    if (mask.empty()) continue;
    const Patch patch = warp_affine(source, transform, mask.box);
    for (int y = mask.box.y0; y < mask.box.y0 + mask.box.height; ++y) {
      for (int x = mask.box.x0; x < mask.box.x0 + mask.box.width; ++x) {
        const float m = mask.at(x, y);
        if (m <= 0.0f) continue;
        for (int c = 0; c < 3; ++c) {
          const float blended = static_cast<float>(out.at(x, y, c)) * (1.0f - m) + patch.at(x, y, c) * m;
          out.at(x, y, c) = store_channel(blended);
        }
      }
    }
  }
  return result;
}

struct MorphSequenceResult {
  FrameSequence frames;
  std::vector<SkippedTriangle> skipped;
};

// Frames are independent; `threads` only changes wall time, not output.
inline MorphSequenceResult morph_sequence(const FrameSequence& frames, const LandmarkSequence& source,
                                          const LandmarkSequence& target, const TriangleMesh& mesh,
                                          const MorphOptions& opts = {}, std::size_t threads = 1) {
  require(frames.size() == source.frames() && source.same_shape(target),
          ErrorKind::kSequenceMismatch, "morph_sequence: frame and landmark counts differ");
  for (const Image& f : frames) {
    require(f.same_size(frames.front()), ErrorKind::kSequenceMismatch,
            "morph_sequence: frames differ in size");
  }
  std::vector<MorphFrameResult> per_frame(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t i) {
    per_frame[i] = morph_frame(frames[i], source.frame(i), target.frame(i), mesh, opts);
    for (SkippedTriangle& s : per_frame[i].skipped) s.frame = i;
  });
  MorphSequenceResult out;
  for (MorphFrameResult& r : per_frame) {
    out.frames.push_back(std::move(r.image));
    out.skipped.insert(out.skipped.end(), r.skipped.begin(), r.skipped.end());
  }
  return out;
}

}  // namespace kimoi
