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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kimoi/error.hpp"

namespace kimoi {

inline constexpr std::size_t kMultiPie68Points = 68;
inline constexpr std::size_t kNoseTipIndex = 30;
inline constexpr const char* kMultiPie68Scheme = "multipie68";

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
  constexpr Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

inline double l1_norm(Point2 p) { return std::abs(p.x) + std::abs(p.y); }
inline double l2_norm(Point2 p) { return std::hypot(p.x, p.y); }

// T frames of N landmarks, stored frame-major.
class LandmarkSequence {
 public:
  LandmarkSequence() = default;

  LandmarkSequence(std::size_t frames, std::size_t points,
                   std::string scheme = kMultiPie68Scheme)
      : frames_(frames), points_(points), scheme_(std::move(scheme)),
        data_(frames * points) {
    require(frames >= 1 && points >= 1, ErrorKind::kInvalidInput,
            "landmark sequence needs at least one frame and one point");
  }

  LandmarkSequence(std::size_t frames, std::size_t points, std::vector<Point2> data,
                   std::string scheme = kMultiPie68Scheme)
      : frames_(frames), points_(points), scheme_(std::move(scheme)),
        data_(std::move(data)) {
    require(frames >= 1 && points >= 1, ErrorKind::kInvalidInput,
            "landmark sequence needs at least one frame and one point");
    require(data_.size() == frames * points, ErrorKind::kInvalidInput,
            "landmark data size does not match frames x points");
    for (const Point2& p : data_) {
      require(std::isfinite(p.x) && std::isfinite(p.y), ErrorKind::kInvalidInput,
              "landmark coordinates must be finite");
    }
  }

  std::size_t frames() const { return frames_; }
  std::size_t points() const { return points_; }
  const std::string& scheme() const { return scheme_; }

  Point2& at(std::size_t t, std::size_t j) { return data_[t * points_ + j]; }
  const Point2& at(std::size_t t, std::size_t j) const { return data_[t * points_ + j]; }

  std::span<Point2> frame(std::size_t t) { return {data_.data() + t * points_, points_}; }
  std::span<const Point2> frame(std::size_t t) const {
    return {data_.data() + t * points_, points_};
  }

  const std::vector<Point2>& data() const { return data_; }
  std::vector<Point2>& data() { return data_; }

  bool same_shape(const LandmarkSequence& o) const {
    return frames_ == o.frames_ && points_ == o.points_;
  }

  LandmarkSequence slice(std::size_t start, std::size_t count) const {
    require(count >= 1 && start + count <= frames_, ErrorKind::kInvalidInput,
            "slice out of range");
    std::vector<Point2> out(data_.begin() + static_cast<std::ptrdiff_t>(start * points_),
                            data_.begin() + static_cast<std::ptrdiff_t>((start + count) * points_));
    return LandmarkSequence(count, points_, std::move(out), scheme_);
  }

  // Per-landmark mean over time.
  std::vector<Point2> mean_frame() const {
    std::vector<Point2> mean(points_);
    for (std::size_t t = 0; t < frames_; ++t) {
      for (std::size_t j = 0; j < points_; ++j) mean[j] += at(t, j);
    }
    for (Point2& p : mean) p = (1.0 / static_cast<double>(frames_)) * p;
    return mean;
  }

  friend bool operator==(const LandmarkSequence&, const LandmarkSequence&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t points_ = 0;
  std::string scheme_ = kMultiPie68Scheme;
  std::vector<Point2> data_;
};

// (T-1) x N per-transition displacements. Tag distinguishes facial motion
// from the temporal artifact derived from two motion fields.
template <class Tag>
class StepField {
 public:
  StepField() = default;
  StepField(std::size_t steps, std::size_t points)
      : steps_(steps), points_(points), data_(steps * points) {}

  std::size_t steps() const { return steps_; }
  std::size_t points() const { return points_; }

  Point2& at(std::size_t i, std::size_t j) { return data_[i * points_ + j]; }
  const Point2& at(std::size_t i, std::size_t j) const { return data_[i * points_ + j]; }

  const std::vector<Point2>& data() const { return data_; }
  std::vector<Point2>& data() { return data_; }

  friend bool operator==(const StepField&, const StepField&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t points_ = 0;
  std::vector<Point2> data_;
};

struct MotionTag {};
struct ArtifactTag {};
using MotionField = StepField<MotionTag>;
using TemporalArtifact = StepField<ArtifactTag>;

// Facial movement: steps[i] = frame[i+1] - frame[i].
inline MotionField motion(const LandmarkSequence& seq) {
  require(seq.frames() >= 2, ErrorKind::kInvalidInput,
          "motion needs a sequence of at least 2 frames");
  MotionField field(seq.frames() - 1, seq.points());
  for (std::size_t i = 0; i + 1 < seq.frames(); ++i) {
    for (std::size_t j = 0; j < seq.points(); ++j) {
      field.at(i, j) = seq.at(i + 1, j) - seq.at(i, j);
    }
  }
  return field;
}

// Inverse of motion(): frame0 followed by the running sum of the steps.
inline LandmarkSequence integrate_motion(std::span<const Point2> frame0,
                                         const MotionField& field) {
  require(frame0.size() == field.points(), ErrorKind::kInvalidInput,
          "frame0 does not match motion field width");
  LandmarkSequence seq(field.steps() + 1, field.points());
  for (std::size_t j = 0; j < field.points(); ++j) seq.at(0, j) = frame0[j];
  for (std::size_t i = 0; i < field.steps(); ++i) {
    for (std::size_t j = 0; j < field.points(); ++j) {
      seq.at(i + 1, j) = seq.at(i, j) + field.at(i, j);
    }
  }
  return seq;
}

inline TemporalArtifact temporal_artifacts(const LandmarkSequence& fake,
                                           const LandmarkSequence& real) {
  require(fake.same_shape(real), ErrorKind::kInvalidInput,
          "temporal_artifacts: sequences differ in shape");
  const MotionField fake_motion = motion(fake);
  const MotionField real_motion = motion(real);
  TemporalArtifact artifact(fake_motion.steps(), fake_motion.points());
  for (std::size_t n = 0; n < artifact.data().size(); ++n) {
    artifact.data()[n] = fake_motion.data()[n] - real_motion.data()[n];
  }
  return artifact;
}

inline double artifact_l1(const TemporalArtifact& artifact) {
  double sum = 0.0;
  for (const Point2& p : artifact.data()) sum += l1_norm(p);
  return sum;
}

// Axis-aligned crop rectangle in pixel coordinates.
struct CropBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  Point2 center() const { return {x + 0.5 * width, y + 0.5 * height}; }
  friend bool operator==(const CropBox&, const CropBox&) = default;
};

struct OutOfRangeLandmark {
  std::size_t frame;
  std::size_t landmark;
  Point2 value;
};

// Per-frame parameters needed to map normalized coordinates back to pixels.
struct Alignment {
  std::vector<Point2> anchors;  // nose tip position, pixels
  std::vector<CropBox> crops;
};

struct AlignedSequence {
  LandmarkSequence normalized;
  Alignment alignment;
  std::vector<OutOfRangeLandmark> out_of_range;
};

// Moves the nose tip of every frame to the crop center and scales by the
// crop size, so the nose tip lands on (0.5, 0.5). Coordinates outside [0,1]
// are kept as-is and reported.
inline AlignedSequence align_sequence(const LandmarkSequence& seq,
                                      std::span<const CropBox> crops,
                                      std::size_t nose_tip = kNoseTipIndex) {
  require(crops.size() == seq.frames(), ErrorKind::kInvalidInput,
          "align_sequence: need one crop box per frame");
  require(nose_tip < seq.points(), ErrorKind::kInvalidInput,
          "align_sequence: nose tip index out of range");
  AlignedSequence out{LandmarkSequence(seq.frames(), seq.points(), seq.scheme()), {}, {}};
  out.alignment.crops.assign(crops.begin(), crops.end());
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    const CropBox& box = crops[t];
    require(box.width > 0.0 && box.height > 0.0 && std::isfinite(box.width) &&
                std::isfinite(box.height),
            ErrorKind::kInvalidInput, "align_sequence: zero-area crop box");
    const Point2 nose = seq.at(t, nose_tip);
    out.alignment.anchors.push_back(nose);
    for (std::size_t j = 0; j < seq.points(); ++j) {
      const Point2 rel = seq.at(t, j) - nose;
      const Point2 n{rel.x / box.width + 0.5, rel.y / box.height + 0.5};
      out.normalized.at(t, j) = n;
      if (n.x < 0.0 || n.x > 1.0 || n.y < 0.0 || n.y > 1.0) {
        out.out_of_range.push_back({t, j, n});
      }
    }
  }
  return out;
}

inline LandmarkSequence denormalize(const LandmarkSequence& normalized,
                                    const Alignment& alignment) {
  require(alignment.anchors.size() == normalized.frames() &&
              alignment.crops.size() == normalized.frames(),
          ErrorKind::kInvalidInput, "denormalize: alignment does not match sequence");
  LandmarkSequence out(normalized.frames(), normalized.points(), normalized.scheme());
  for (std::size_t t = 0; t < normalized.frames(); ++t) {
    const CropBox& box = alignment.crops[t];
    const Point2 anchor = alignment.anchors[t];
    for (std::size_t j = 0; j < normalized.points(); ++j) {
      const Point2 n = normalized.at(t, j);
      out.at(t, j) = {(n.x - 0.5) * box.width + anchor.x, (n.y - 0.5) * box.height + anchor.y};
    }
  }
  return out;
}

}  // namespace kimoi
