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
#include <cstddef>
#include <string_view>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"

namespace kimoi {

// Regions of the 68-point Multi-PIE layout. Left/right are from the
// subject's point of view.
enum class FaceRegion {
  kLeftEyebrow,
  kRightEyebrow,
  kLeftEye,
  kRightEye,
  kNose,
  kMouth,
  kJawline,
};

inline constexpr std::array<FaceRegion, 7> kAllRegions = {
    FaceRegion::kLeftEyebrow, FaceRegion::kRightEyebrow, FaceRegion::kLeftEye,
    FaceRegion::kRightEye,    FaceRegion::kNose,         FaceRegion::kMouth,
    FaceRegion::kJawline};

inline constexpr std::array<FaceRegion, 6> kInnerRegions = {
    FaceRegion::kLeftEyebrow, FaceRegion::kRightEyebrow, FaceRegion::kLeftEye,
    FaceRegion::kRightEye,    FaceRegion::kNose,         FaceRegion::kMouth};

struct IndexRange {
  std::size_t first;
  std::size_t last;  // inclusive
};

constexpr IndexRange region_range(FaceRegion region) {
  switch (region) {
    case FaceRegion::kJawline: return {0, 16};
    case FaceRegion::kRightEyebrow: return {17, 21};
    case FaceRegion::kLeftEyebrow: return {22, 26};
    case FaceRegion::kNose: return {27, 35};
    case FaceRegion::kRightEye: return {36, 41};
    case FaceRegion::kLeftEye: return {42, 47};
    case FaceRegion::kMouth: return {48, 67};
  }
  return {0, 0};
}

inline std::vector<std::size_t> region_indices(FaceRegion region) {
  const IndexRange r = region_range(region);
  std::vector<std::size_t> out;
  for (std::size_t i = r.first; i <= r.last; ++i) out.push_back(i);
  return out;
}

constexpr std::string_view region_name(FaceRegion region) {
  switch (region) {
    case FaceRegion::kLeftEyebrow: return "left_eyebrow";
    case FaceRegion::kRightEyebrow: return "right_eyebrow";
    case FaceRegion::kLeftEye: return "left_eye";
    case FaceRegion::kRightEye: return "right_eye";
    case FaceRegion::kNose: return "nose";
    case FaceRegion::kMouth: return "mouth";
    case FaceRegion::kJawline: return "jawline";
  }
  return "";
}

inline FaceRegion region_from_name(std::string_view name) {
  for (FaceRegion r : kAllRegions) {
    if (region_name(r) == name) return r;
  }
  throw Error(ErrorKind::kInvalidInput, "unknown face region: " + std::string(name));
}

inline FaceRegion region_of(std::size_t landmark) {
  for (FaceRegion r : kAllRegions) {
    const IndexRange range = region_range(r);
    if (landmark >= range.first && landmark <= range.last) return r;
  }
  throw Error(ErrorKind::kInvalidInput, "landmark index outside the 68-point layout");
}

// Perturbation draws regions in four groups: both eyebrows, both eyes, the
// nose and the mouth.
enum class RegionGroup { kEyebrows, kEyes, kNose, kMouth };

inline constexpr std::array<RegionGroup, 4> kRegionGroups = {
    RegionGroup::kEyebrows, RegionGroup::kEyes, RegionGroup::kNose, RegionGroup::kMouth};

inline std::vector<FaceRegion> group_regions(RegionGroup group) {
  switch (group) {
    case RegionGroup::kEyebrows: return {FaceRegion::kLeftEyebrow, FaceRegion::kRightEyebrow};
    case RegionGroup::kEyes: return {FaceRegion::kLeftEye, FaceRegion::kRightEye};
    case RegionGroup::kNose: return {FaceRegion::kNose};
    case RegionGroup::kMouth: return {FaceRegion::kMouth};
  }
  return {};
}

constexpr std::string_view group_name(RegionGroup group) {
  switch (group) {
    case RegionGroup::kEyebrows: return "eyebrows";
    case RegionGroup::kEyes: return "eyes";
    case RegionGroup::kNose: return "nose";
    case RegionGroup::kMouth: return "mouth";
  }
  return "";
}

inline RegionGroup group_from_name(std::string_view name) {
  for (RegionGroup g : kRegionGroups) {
    if (group_name(g) == name) return g;
  }
  throw Error(ErrorKind::kInvalidInput, "unknown region group: " + std::string(name));
}

// Per-landmark boolean mask of the union of the given regions.
inline std::vector<bool> region_mask(const std::vector<FaceRegion>& regions,
                                     std::size_t points = kMultiPie68Points) {
  std::vector<bool> mask(points, false);
  for (FaceRegion r : regions) {
    for (std::size_t i : region_indices(r)) {
      if (i < points) mask[i] = true;
    }
  }
  return mask;
}

// Loss weights: non-rigid landmarks (eyes, mouth) get `nonrigid_weight`.
inline std::vector<double> default_landmark_weights(double nonrigid_weight = 5.0,
                                                    std::size_t points = kMultiPie68Points) {
  std::vector<double> weights(points, 1.0);
  const std::vector<bool> nonrigid =
      region_mask({FaceRegion::kLeftEye, FaceRegion::kRightEye, FaceRegion::kMouth}, points);
  for (std::size_t i = 0; i < points; ++i) {
    if (nonrigid[i]) weights[i] = nonrigid_weight;
  }
  return weights;
}

inline std::vector<std::size_t> eye_mouth_indices() {
  std::vector<std::size_t> out;
  for (FaceRegion r : {FaceRegion::kRightEye, FaceRegion::kLeftEye, FaceRegion::kMouth}) {
    for (std::size_t i : region_indices(r)) out.push_back(i);
  }
  return out;
}

}  // namespace kimoi
