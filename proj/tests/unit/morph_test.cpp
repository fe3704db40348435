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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "kimoi/kimoi.hpp"
#include "support/fixtures.hpp"

namespace kimoi {
namespace {

// Brute-force oracle. A pixel center q is inside when for every edge of the
// positively oriented polygon, the edge function evaluated at q + (d, d^2)
// is positive for infinitesimal d > 0, i.e. the tuple (e(q), -dy, dx) is
// lexicographically positive. Coordinates in the fixtures are dyadic so the
// long double arithmetic is exact.
bool oracle_inside(const std::vector<Point2>& poly, long double qx, long double qy) {
  long double area2 = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    area2 += static_cast<long double>(a.x) * b.y - static_cast<long double>(b.x) * a.y;
  }
  if (area2 == 0) return false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Point2 a = poly[i], b = poly[(i + 1) % n];
    if (area2 < 0) {
      a = poly[(n - i) % n];
      b = poly[(n - i - 1) % n];
    }
    const long double dx = static_cast<long double>(b.x) - a.x;
    const long double dy = static_cast<long double>(b.y) - a.y;
    const long double e = dx * (qy - a.y) - dy * (qx - a.x);
    if (e > 0) continue;
    if (e < 0) return false;
    if (-dy > 0) continue;
    if (-dy < 0) return false;
    if (dx > 0) continue;
    return false;
  }
  return true;
}

int oracle_count(const std::vector<Point2>& poly, int height, int width) {
  int count = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) count += oracle_inside(poly, x, y) ? 1 : 0;
  }
  return count;
}

int mask_count(const TriangleMask& m) {
  int count = 0;
  for (float c : m.coverage) {
    EXPECT_TRUE(c == 0.0f || c == 1.0f);
    count += c > 0.5f ? 1 : 0;
  }
  return count;
}

std::vector<Point2> as_poly(const Triangle2& t) { return {t[0], t[1], t[2]}; }

TEST(Rasterize, RightTriangleMatchesOracle) {
  const Triangle2 tri{{{0, 0}, {4, 0}, {0, 4}}};
  const TriangleMask m = rasterize_mask(tri, 8, 8);
  EXPECT_EQ(mask_count(m), oracle_count(as_poly(tri), 8, 8));
}

TEST(Rasterize, DegenerateTriangleIsEmpty) {
  const Triangle2 tri{{{1, 1}, {3, 3}, {5, 5}}};
  const TriangleMask m = rasterize_mask(tri, 8, 8);
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(m.total(), 0.0);
}

TEST(Rasterize, OffImageTrianglesAreClipped) {
  const Triangle2 tri{{{-20, -20}, {30, -10}, {-5, 40}}};
  const TriangleMask m = rasterize_mask(tri, 16, 16);
  EXPECT_GE(m.box.x0, 0);
  EXPECT_GE(m.box.y0, 0);
  EXPECT_LE(m.box.x0 + m.box.width, 16);
  EXPECT_LE(m.box.y0 + m.box.height, 16);
  EXPECT_EQ(mask_count(m), oracle_count(as_poly(tri), 16, 16));
  EXPECT_TRUE(rasterize_mask({{{-20, -20}, {-10, -20}, {-15, -5}}}, 16, 16).empty());
}

TEST(Rasterize, RandomTrianglesMatchOracle) {
  Rng rng(21);
  // Dyadic coordinates, a quarter of them snapped to the pixel lattice to
  // exercise edge and vertex ties.
  std::uniform_int_distribution<int> u(-64, 48 * 16);
  for (int rep = 0; rep < 200; ++rep) {
    Triangle2 tri;
    const bool snap = rep % 4 == 0;
    for (auto& p : tri) {
      p = {u(rng) / 16.0, u(rng) / 16.0};
      if (snap) p = {std::round(p.x), std::round(p.y)};
    }
    const TriangleMask m = rasterize_mask(tri, 48, 48);
    ASSERT_EQ(mask_count(m), oracle_count(as_poly(tri), 48, 48)) << "triangle " << rep;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        ASSERT_EQ(m.at(x, y) > 0.5f, oracle_inside(as_poly(tri), x, y));
      }
    }
  }
}

TEST(Rasterize, SharedEdgeNeverDoubleCovers) {
  // Quads split along a diagonal that passes through pixel centers.
  const std::vector<std::array<Point2, 4>> quads{
      {{{1, 1}, {9, 1}, {9, 9}, {1, 9}}},
      {{{2, 0}, {12, 6}, {6, 14}, {0, 8}}},
      {{{0.5, 3}, {11, 2}, {8, 11.5}, {3, 10}}},
      {{{-3, -3}, {20, 0}, {14, 17}, {0, 20}}},
  };
  for (const auto& q : quads) {
    for (int diag = 0; diag < 2; ++diag) {
      const Triangle2 a{{q[diag], q[diag + 1], q[(diag + 2) % 4]}};
      const Triangle2 b{{q[(diag + 2) % 4], q[(diag + 3) % 4], q[diag]}};
      const TriangleMask ma = rasterize_mask(a, 16, 16);
      const TriangleMask mb = rasterize_mask(b, 16, 16);
      const std::vector<Point2> quad(q.begin(), q.end());
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          const float sum = ma.at(x, y) + mb.at(x, y);
          ASSERT_LE(sum, 1.0f) << x << "," << y;
          ASSERT_EQ(sum > 0.5f, oracle_inside(quad, x, y)) << x << "," << y;
        }
      }
    }
  }
}

TEST(Rasterize, MeshCoverageSumsToAtMostOne) {
  std::vector<Point2> pts;
  for (const Point2& p : synth::template_face()) pts.push_back(224.0 * p);
  // Lattice points force many exact edge and vertex ties.
  std::vector<Point2> lattice;
  for (int y = 0; y <= 6; ++y) {
    for (int x = 0; x <= 6; ++x) lattice.push_back({8.0 * x, 8.0 * y + (x % 2) * 4.0});
  }
  for (const auto& set : {pts, lattice}) {
    const TriangleMesh mesh = delaunay(set);
    std::vector<float> sum(224 * 224, 0.0f);
    for (const auto& t : mesh.triangles) {
      const TriangleMask m = rasterize_mask(triangle_points(set, t), 224, 224);
      for (int y = m.box.y0; y < m.box.y0 + m.box.height; ++y) {
        for (int x = m.box.x0; x < m.box.x0 + m.box.width; ++x) sum[y * 224 + x] += m.at(x, y);
      }
    }
    const std::vector<Point2> hull = convex_hull(set);
    for (int y = 0; y < 224; ++y) {
      for (int x = 0; x < 224; ++x) {
        ASSERT_LE(sum[y * 224 + x], 1.0f);
        ASSERT_EQ(sum[y * 224 + x] > 0.5f, oracle_inside(hull, x, y)) << x << "," << y;
      }
    }
  }
}

TEST(Rasterize, AntialiasedCoverageApproximatesArea) {
  Rng rng(22);
  std::uniform_real_distribution<double> u(0.0, 120.0);
  int checked = 0;
  while (checked < 100) {
    Triangle2 tri;
    for (auto& p : tri) p = {u(rng), u(rng)};
    const double area = std::abs(signed_area(tri));
    if (area < 100.0) continue;
    const TriangleMask m = rasterize_mask(tri, 128, 128, true);
    for (float c : m.coverage) {
      ASSERT_GE(c, 0.0f);
      ASSERT_LE(c, 1.0f);
    }
    EXPECT_NEAR(m.total(), area, 0.015 * area);
    ++checked;
  }
}

TEST(Rasterize, AntialiasedSharedEdgeSumsToOne) {
  const std::array<Point2, 4> q{{{2.3, 1.1}, {13.7, 2.9}, {12.2, 13.4}, {1.6, 12.8}}};
  const TriangleMask a = rasterize_mask({{q[0], q[1], q[2]}}, 16, 16, true);
  const TriangleMask b = rasterize_mask({{q[2], q[3], q[0]}}, 16, 16, true);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) EXPECT_LE(a.at(x, y) + b.at(x, y), 1.0f + 1e-6f);
  }
}

Image checker(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = ((x + y) % 2) ? 255 : 0;
    }
  }
  return img;
}

TEST(Warp, IdentityIsBitExact) {
  Rng rng(23);
  const Image img = testing::noise_image(20, 17, rng);
  const PixelBox roi{3, 2, 12, 10};
  const Patch p = warp_affine(img, AffineTransform2D::identity(), roi);
  for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
    for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_EQ(p.at(x, y, c), float(img.at(x, y, c)));
    }
  }
}

TEST(Warp, IntegerTranslationShiftsExactly) {
  Rng rng(24);
  const Image img = testing::noise_image(32, 32, rng);
  AffineTransform2D t;
  t.m = {1, 0, 3, 0, 1, 5};
  const PixelBox roi{3, 5, 29, 27};
  const Patch p = warp_affine(img, t, roi);
  for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
    for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_EQ(p.at(x, y, c), float(img.at(x - 3, y - 5, c)));
    }
  }
}

TEST(Warp, UpscaledCheckerboardMatchesClosedForm) {
  const Image img = checker(2, 2);
  AffineTransform2D t;
  t.m = {2, 0, 0, 0, 2, 0};
  const Patch p = warp_affine(img, t, {0, 0, 4, 4});
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double u = std::min(x / 2.0, 1.0), v = std::min(y / 2.0, 1.0);
      const double expect = 255.0 * (u * (1 - v) + (1 - u) * v);
      EXPECT_NEAR(p.at(x, y, 0), expect, 1e-4) << x << "," << y;
    }
  }
  EXPECT_FLOAT_EQ(p.at(1, 0, 0), 127.5f);
  EXPECT_FLOAT_EQ(p.at(1, 1, 0), 127.5f);
  EXPECT_FLOAT_EQ(p.at(2, 0, 0), 255.0f);
}

TEST(Warp, SingularTransformIsRejected) {
  const Image img = checker(4, 4);
  AffineTransform2D t;
  t.m = {1, 2, 0, 2, 4, 0};
  try {
    warp_affine(img, t, {0, 0, 2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularGeometry);
  }
}

TEST(Warp, StoreRoundsHalfToEven) {
  EXPECT_EQ(store_channel(127.5f), 128);
  EXPECT_EQ(store_channel(126.5f), 126);
  EXPECT_EQ(store_channel(-3.0f), 0);
  EXPECT_EQ(store_channel(300.0f), 255);
}

struct MorphFixture {
  FrameSequence frames;
  LandmarkSequence pixels;
  TriangleMesh mesh;
};

MorphFixture face_fixture(std::size_t frames, int size, std::uint64_t seed) {
  synth::CorpusOptions opts;
  opts.count = 1;
  opts.min_length = opts.max_length = frames;
  opts.image_size = size;
  opts.seed = seed;
  const synth::SyntheticSequence s = synth::synth_corpus(opts).front();
  return {synth::render_frames(s.pixels, size, size), s.pixels, reference_mesh(s.pixels)};
}

TEST(Morph, IdentityMorphIsBitExact) {
  const MorphFixture f = face_fixture(16, 224, 31);
  for (bool aa : {false, true}) {
    const MorphSequenceResult r = morph_sequence(f.frames, f.pixels, f.pixels, f.mesh, MorphOptions{aa});
    ASSERT_EQ(r.frames.size(), f.frames.size());
    for (std::size_t i = 0; i < f.frames.size(); ++i) EXPECT_TRUE(r.frames[i] == f.frames[i]) << "frame " << i;
    EXPECT_TRUE(r.skipped.empty());
  }
}

TEST(Morph, SingleTriangleIntegerTranslation) {
  Rng rng(32);
  const Image img = testing::noise_image(40, 40, rng);
  const std::vector<Point2> src{{5, 5}, {20, 6}, {8, 22}};
  const Point2 d{7, 4};
  const std::vector<Point2> dst{src[0] + d, src[1] + d, src[2] + d};
  TriangleMesh mesh;
  mesh.triangles.push_back({0, 1, 2});
  const MorphFrameResult r = morph_frame(img, src, dst, mesh);
  const TriangleMask m = rasterize_mask({{dst[0], dst[1], dst[2]}}, 40, 40);
  int inside = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      for (int c = 0; c < 3; ++c) {
        if (m.at(x, y) > 0.5f) {
          ASSERT_EQ(r.image.at(x, y, c), img.at(x - 7, y - 4, c));
        } else {
          ASSERT_EQ(r.image.at(x, y, c), img.at(x, y, c));
        }
      }
      inside += m.at(x, y) > 0.5f;
    }
  }
  EXPECT_GT(inside, 50);
}

bool inside_closed(const std::vector<Point2>& hull, double x, double y) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 a = hull[i], b = hull[(i + 1) % hull.size()];
    if ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x) < -1e-9) return false;
  }
  return true;
}

TEST(Morph, ExteriorPixelsUnchangedUnderRandomPerturbation) {
  const MorphFixture f = face_fixture(4, 224, 33);
  Rng rng(34);
  std::normal_distribution<double> n(0.0, 1.5);
  for (int rep = 0; rep < 5; ++rep) {
    LandmarkSequence target = f.pixels;
    for (Point2& p : target.data()) p += Point2{n(rng), n(rng)};
    const MorphSequenceResult r = morph_sequence(f.frames, f.pixels, target, f.mesh, {rep % 2 == 1});
    for (std::size_t t = 0; t < f.frames.size(); ++t) {
      const std::vector<Point2> tf(target.frame(t).begin(), target.frame(t).end());
      // Anti-aliased masks reach half a pixel beyond the triangles.
      std::vector<Point2> hull = convex_hull(tf);
      for (int y = 0; y < 224; ++y) {
        for (int x = 0; x < 224; ++x) {
          bool near = false;
          for (double dy : {-0.5, 0.0, 0.5}) {
            for (double dx : {-0.5, 0.0, 0.5}) near = near || inside_closed(hull, x + dx, y + dy);
          }
          if (near) continue;
          for (int c = 0; c < 3; ++c) ASSERT_EQ(r.frames[t].at(x, y, c), f.frames[t].at(x, y, c));
        }
      }
    }
  }
}

TEST(Morph, MouthPerturbationConfinedToMouthTriangles) {
  const MorphFixture f = face_fixture(6, 224, 35);
  Rng rng(36);
  std::normal_distribution<double> n(0.0, 2.0);
  LandmarkSequence target = f.pixels;
  for (std::size_t t = 0; t < target.frames(); ++t) {
    for (std::size_t j : region_indices(FaceRegion::kMouth)) target.at(t, j) += Point2{n(rng), n(rng)};
  }
  const MorphSequenceResult r = morph_sequence(f.frames, f.pixels, target, f.mesh);
  std::size_t changed = 0;
  for (std::size_t t = 0; t < f.frames.size(); ++t) {
    std::vector<std::vector<Point2>> mouth_tris;
    for (const TriangleIndices& tri : f.mesh.triangles) {
      const bool touches = std::any_of(tri.begin(), tri.end(), [](std::size_t v) {
        return region_of(v) == FaceRegion::kMouth;
      });
      if (!touches) continue;
      std::vector<Point2> poly;
      for (std::size_t v : tri) poly.push_back(target.at(t, v));
      if (signed_area(poly[0], poly[1], poly[2]) < 0) std::swap(poly[1], poly[2]);
      mouth_tris.push_back(poly);
    }
    for (int y = 0; y < 224; ++y) {
      for (int x = 0; x < 224; ++x) {
        bool diff = false;
        for (int c = 0; c < 3; ++c) diff = diff || r.frames[t].at(x, y, c) != f.frames[t].at(x, y, c);
        if (!diff) continue;
        ++changed;
        const bool contained = std::any_of(mouth_tris.begin(), mouth_tris.end(),
                                           [&](const auto& poly) { return inside_closed(poly, x, y); });
        ASSERT_TRUE(contained) << "frame " << t << " pixel " << x << "," << y;
      }
    }
  }
  EXPECT_GT(changed, 0u);
}

TEST(Morph, PerFrameIndependenceAndPermutation) {
  const MorphFixture f = face_fixture(5, 96, 37);
  Rng rng(38);
  std::normal_distribution<double> n(0.0, 1.0);
  LandmarkSequence target = f.pixels;
  for (Point2& p : target.data()) p += Point2{n(rng), n(rng)};
  const MorphSequenceResult all = morph_sequence(f.frames, f.pixels, target, f.mesh);
  for (std::size_t i = 0; i < f.frames.size(); ++i) {
    const MorphFrameResult one = morph_frame(f.frames[i], f.pixels.frame(i), target.frame(i), f.mesh);
    EXPECT_TRUE(one.image == all.frames[i]);
  }
  const std::vector<std::size_t> perm{3, 0, 4, 2, 1};
  FrameSequence pf;
  LandmarkSequence ps(5, 68), pt(5, 68);
  for (std::size_t i = 0; i < 5; ++i) {
    pf.push_back(f.frames[perm[i]]);
    for (std::size_t j = 0; j < 68; ++j) {
      ps.at(i, j) = f.pixels.at(perm[i], j);
      pt.at(i, j) = target.at(perm[i], j);
    }
  }
  const MorphSequenceResult permuted = morph_sequence(pf, ps, pt, f.mesh);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(permuted.frames[i] == all.frames[perm[i]]);
}

TEST(Morph, ThreadCountDoesNotChangeOutput) {
  const MorphFixture f = face_fixture(8, 96, 39);
  Rng rng(40);
  std::normal_distribution<double> n(0.0, 1.0);
  LandmarkSequence target = f.pixels;
  for (Point2& p : target.data()) p += Point2{n(rng), n(rng)};
  const MorphSequenceResult a = morph_sequence(f.frames, f.pixels, target, f.mesh, {}, 1);
  const MorphSequenceResult b = morph_sequence(f.frames, f.pixels, target, f.mesh, {}, 4);
  EXPECT_TRUE(a.frames == b.frames);
}

TEST(Morph, DegenerateTargetTrianglesAreSkipped) {
  Rng rng(41);
  const Image img = testing::noise_image(30, 30, rng);
  const std::vector<Point2> src{{2, 2}, {20, 3}, {5, 20}, {25, 25}};
  std::vector<Point2> dst = src;
  dst[2] = {11, 2.5};  // collinear with the first two
  const TriangleMesh mesh = delaunay(src);
  const MorphFrameResult r = morph_frame(img, src, dst, mesh);
  EXPECT_FALSE(r.skipped.empty());
}

TEST(Morph, ShapeMismatchIsReported) {
  const MorphFixture f = face_fixture(4, 64, 42);
  const LandmarkSequence shorter = f.pixels.slice(0, 3);
  try {
    morph_sequence(f.frames, shorter, shorter, f.mesh);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSequenceMismatch);
  }
}

TEST(Morph, ClipConstantTranslationHasNoLandmarkArtifact) {
  const MorphFixture f = face_fixture(8, 96, 43);
  LandmarkSequence target = f.pixels;
  for (Point2& p : target.data()) p += Point2{2.0, -1.0};
  EXPECT_LT(artifact_l1(temporal_artifacts(target, f.pixels)), 1e-9);
  const MorphSequenceResult r = morph_sequence(f.frames, f.pixels, target, f.mesh);
  EXPECT_EQ(r.frames.size(), 8u);
}

}  // namespace
}  // namespace kimoi
