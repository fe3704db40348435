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
#include <numbers>
#include <random>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/morph/image.hpp"
#include "kimoi/random.hpp"

namespace kimoi::synth {

// Shape parameters of a synthetic 68-point face, in crop-normalized units
// (y down).
struct FaceShape {
  double eye_open = 0.025;     // eyelid half-height
  double mouth_open = 0.006;   // inner-lip half gap
  double mouth_width = 0.12;
  double eye_spacing = 0.16;   // eye center offset from the midline
  double brow_height = 0.33;
  double jaw_width = 0.36;
};

namespace detail {

inline void put(std::vector<Point2>& pts, std::size_t i, double x, double y) { pts[i] = {x, y}; }

}  // namespace detail

// Mean-face style layout: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47,
// mouth 48-67. Nose tip (30) sits at (0.5, 0.55).
inline std::vector<Point2> face_points(const FaceShape& s, double left_eye_open = -1.0,
                                       double right_eye_open = -1.0) {
  using std::numbers::pi;
  if (left_eye_open < 0) left_eye_open = s.eye_open;
  if (right_eye_open < 0) right_eye_open = s.eye_open;
  std::vector<Point2> p(kMultiPie68Points);
  for (std::size_t i = 0; i <= 16; ++i) {
    const double th = pi * static_cast<double>(i) / 16.0;
    detail::put(p, i, 0.5 - s.jaw_width * std::cos(th), 0.42 + 0.38 * std::sin(th));
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double u = static_cast<double>(i) / 4.0;
    const double arch = 0.035 * std::sin(pi * u);
    detail::put(p, 17 + i, 0.5 - s.eye_spacing - 0.12 + 0.24 * u * 0.9, s.brow_height - arch);
    detail::put(p, 22 + i, 0.5 + s.eye_spacing - 0.096 + 0.24 * u * 0.9, s.brow_height - 0.035 * std::sin(pi * u));
  }
  for (std::size_t i = 0; i < 4; ++i) detail::put(p, 27 + i, 0.5, 0.40 + 0.05 * static_cast<double>(i));
  const double nose_x[5] = {-0.06, -0.03, 0.0, 0.03, 0.06};
  const double nose_y[5] = {0.60, 0.613, 0.62, 0.613, 0.60};
  for (std::size_t i = 0; i < 5; ++i) detail::put(p, 31 + i, 0.5 + nose_x[i], nose_y[i]);
  // Eyes: corner, two upper lid, corner, two lower lid.
  auto eye = [&](std::size_t base, double cx, double open, bool outer_first) {
    const double w = 0.06, cy = 0.41;
    const double sgn = outer_first ? 1.0 : 1.0;
    (void)sgn;
    detail::put(p, base + 0, cx - w, cy);
    detail::put(p, base + 1, cx - w / 3, cy - open);
    detail::put(p, base + 2, cx + w / 3, cy - open);
    detail::put(p, base + 3, cx + w, cy);
    detail::put(p, base + 4, cx + w / 3, cy + 0.6 * open);
    detail::put(p, base + 5, cx - w / 3, cy + 0.6 * open);
  };
  eye(36, 0.5 - s.eye_spacing, right_eye_open, true);
  eye(42, 0.5 + s.eye_spacing, left_eye_open, false);
  const double mcx = 0.5, mcy = 0.70;
  for (std::size_t i = 0; i < 12; ++i) {
    const double phi = pi + pi * static_cast<double>(i) / 6.0;
    const double sn = std::sin(phi);
    const double b = sn < 0 ? 0.030 + 0.5 * s.mouth_open : 0.040 + s.mouth_open;
    detail::put(p, 48 + i, mcx + s.mouth_width * std::cos(phi), mcy + b * sn);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    const double phi = pi + pi * static_cast<double>(i) / 4.0;
    const double sn = std::sin(phi);
    detail::put(p, 60 + i, mcx + 0.66 * s.mouth_width * std::cos(phi), mcy + (0.002 + s.mouth_open) * sn);
  }
  return p;
}

inline std::vector<Point2> template_face() { return face_points(FaceShape{}); }

struct CorpusOptions {
  std::size_t count = 200;
  std::size_t min_length = 48;
  std::size_t max_length = 96;
  double amplitude = 1.0;         // scales every temporal motion term
  std::vector<std::size_t> blink_schedule;  // transitions with a blink; empty = random
  double blink_rate = 0.02;       // per-frame blink probability when random
  double identity_variation = 1.0;
  double image_size = 224.0;      // crop size in pixels
  std::uint64_t seed = 0;
};

struct SyntheticSequence {
  LandmarkSequence pixels;        // pixel coordinates
  std::vector<CropBox> crops;
  std::vector<std::size_t> blinks;  // transition index of each blink onset
  double fps = 25.0;
};

// Eye openness multiplier for a blink whose closing transition is `onset`:
// open up to onset, shut at onset + 1, reopening linearly over 4 frames.
inline double blink_profile(std::size_t t, std::size_t onset) {
  if (t <= onset) return 1.0;
  const double since = static_cast<double>(t - onset - 1);
  if (since >= 4.0) return 1.0;
  return 0.1 + 0.9 * since / 4.0;
}

inline SyntheticSequence synth_sequence(const CorpusOptions& opts, std::size_t length, Rng& rng) {
  require(length >= 2, ErrorKind::kInvalidInput, "synth: sequence length must be >= 2");
  using std::numbers::pi;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double idv = opts.identity_variation;
  const double amp = opts.amplitude;

  FaceShape base;
  base.eye_spacing *= 1.0 + 0.05 * idv * normal(rng);
  base.mouth_width *= 1.0 + 0.08 * idv * normal(rng);
  base.brow_height += 0.01 * idv * normal(rng);
  base.jaw_width *= 1.0 + 0.04 * idv * normal(rng);
  base.eye_open *= 1.0 + 0.15 * idv * normal(rng);

  SyntheticSequence out{LandmarkSequence(length, kMultiPie68Points), {}, {}, 25.0};
  if (!opts.blink_schedule.empty()) {
    for (std::size_t b : opts.blink_schedule) {
      if (b + 1 < length) out.blinks.push_back(b);
    }
  } else {
    for (std::size_t t = 2; t + 6 < length; ++t) {
      if (unit(rng) < opts.blink_rate) {
        out.blinks.push_back(t);
        t += 8;
      }
    }
  }

  const double rot_amp = amp * 0.03 * (0.5 + unit(rng));
  const double rot_period = 80.0 + 60.0 * unit(rng);
  const double rot_phase = 2 * pi * unit(rng);
  const double scale_amp = amp * 0.02 * unit(rng);
  const double scale_phase = 2 * pi * unit(rng);
  const double shift_amp = amp * 0.01;
  const double shift_phase = 2 * pi * unit(rng);
  const double talk_amp = amp * 0.012 * unit(rng);
  const double talk_period = 18.0 + 20.0 * unit(rng);
  const double talk_phase = 2 * pi * unit(rng);
  const double smile_amp = amp * 0.05 * unit(rng);

  for (std::size_t t = 0; t < length; ++t) {
    const double tt = static_cast<double>(t);
    FaceShape s = base;
    s.mouth_open = base.mouth_open + talk_amp * (1.0 + std::sin(2 * pi * tt / talk_period + talk_phase));
    s.mouth_width = base.mouth_width * (1.0 + smile_amp * std::sin(2 * pi * tt / (2.3 * talk_period)));
    double openness = 1.0;
    for (std::size_t b : out.blinks) openness = std::min(openness, blink_profile(t, b));
    const double eye_open = base.eye_open * (1.0 - amp * (1.0 - openness));
    const std::vector<Point2> face = face_points(s, eye_open, eye_open);

    const double angle = rot_amp * std::sin(2 * pi * tt / rot_period + rot_phase);
    const double scale = 1.0 + scale_amp * std::sin(2 * pi * tt / (1.7 * rot_period) + scale_phase);
    const Point2 shift{shift_amp * std::sin(2 * pi * tt / 97.0 + shift_phase),
                       shift_amp * std::cos(2 * pi * tt / 113.0 + shift_phase)};
    const double c = std::cos(angle) * scale, sn = std::sin(angle) * scale;
    const Point2 pivot{0.5, 0.55};
    for (std::size_t j = 0; j < kMultiPie68Points; ++j) {
      const Point2 d = face[j] - pivot;
      const Point2 q = pivot + Point2{c * d.x - sn * d.y, sn * d.x + c * d.y} + shift;
      out.pixels.at(t, j) = opts.image_size * q;
    }
    out.crops.push_back({0.0, 0.0, opts.image_size, opts.image_size});
  }
  return out;
}

inline std::vector<SyntheticSequence> synth_corpus(const CorpusOptions& opts) {
  require(opts.min_length >= 2 && opts.max_length >= opts.min_length, ErrorKind::kInvalidInput,
          "synth: invalid length range");
  std::vector<SyntheticSequence> corpus;
  for (std::size_t i = 0; i < opts.count; ++i) {
    Rng rng(derive_seed(opts.seed, streams::kCorpus, i));
    std::uniform_int_distribution<std::size_t> len(opts.min_length, opts.max_length);
    corpus.push_back(synth_sequence(opts, len(rng), rng));
  }
  return corpus;
}

inline LandmarkSequence normalized(const SyntheticSequence& s) {
  return align_sequence(s.pixels, s.crops).normalized;
}

inline std::vector<LandmarkSequence> normalized_corpus(const std::vector<SyntheticSequence>& corpus) {
  std::vector<LandmarkSequence> out;
  for (const SyntheticSequence& s : corpus) out.push_back(normalized(s));
  return out;
}

// Procedural texture that follows the nose tip, so frames move with the
// head and morphing produces visible, smooth changes.
inline Image render_frame(std::span<const Point2> pixel_landmarks, int width, int height) {
  Image img(width, height);
  const Point2 anchor = pixel_landmarks.size() > kNoseTipIndex ? pixel_landmarks[kNoseTipIndex]
                                                               : Point2{width / 2.0, height / 2.0};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = x - anchor.x, v = y - anchor.y;
      const double r = 128.0 + 90.0 * std::sin(u / 7.0) * std::cos(v / 11.0);
      const double g = 128.0 + 90.0 * std::sin((u + v) / 9.0);
      const double b = 128.0 + 90.0 * std::cos(u / 13.0 - v / 5.0);
      img.at(x, y, 0) = static_cast<std::uint8_t>(std::lround(std::clamp(r, 0.0, 255.0)));
      img.at(x, y, 1) = static_cast<std::uint8_t>(std::lround(std::clamp(g, 0.0, 255.0)));
      img.at(x, y, 2) = static_cast<std::uint8_t>(std::lround(std::clamp(b, 0.0, 255.0)));
    }
  }
  return img;
}

inline FrameSequence render_frames(const LandmarkSequence& pixels, int width, int height) {
  FrameSequence frames;
  for (std::size_t t = 0; t < pixels.frames(); ++t) frames.push_back(render_frame(pixels.frame(t), width, height));
  return frames;
}

}  // namespace kimoi::synth
