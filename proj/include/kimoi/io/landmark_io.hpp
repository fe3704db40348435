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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/io/binary.hpp"

namespace kimoi::io {

enum class FileFormat { kJson, kBinary };

inline FileFormat format_from_name(std::string_view name) {
  if (name == "json") return FileFormat::kJson;
  if (name == "bin") return FileFormat::kBinary;
  throw Error(ErrorKind::kUsage, "unknown format: " + std::string(name) + " (expected json or bin)");
}

inline constexpr std::string_view kLandmarkMagic = "KIMO";
inline constexpr std::uint32_t kLandmarkVersion = 1;

// A landmark track in pixel coordinates with its per-frame crop boxes.
struct LandmarkFile {
  double fps = 25.0;
  LandmarkSequence pixels;
  std::vector<CropBox> crops;
  nlohmann::json provenance;  // null when absent

  AlignedSequence aligned() const { return align_sequence(pixels, crops); }
};

inline void validate_landmark_file(const LandmarkFile& f) {
  require(f.crops.size() == f.pixels.frames(), ErrorKind::kInvalidInput,
          "landmark file: need one crop per frame");
  require(std::isfinite(f.fps) && f.fps > 0.0, ErrorKind::kInvalidInput, "landmark file: fps must be positive");
  if (f.pixels.scheme() == kMultiPie68Scheme) {
    require(f.pixels.points() == kMultiPie68Points, ErrorKind::kInvalidInput,
            "landmark file: multipie68 scheme needs 68 points per frame");
  }
}

inline std::string landmarks_to_json(const LandmarkFile& f) {
  validate_landmark_file(f);
  nlohmann::json j;
  j["fps"] = f.fps;
  j["scheme"] = f.pixels.scheme();
  nlohmann::json crops = nlohmann::json::array();
  for (const CropBox& c : f.crops) crops.push_back({c.x, c.y, c.width, c.height});
  j["crops"] = std::move(crops);
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t t = 0; t < f.pixels.frames(); ++t) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Point2& p : f.pixels.frame(t)) pts.push_back({p.x, p.y});
    frames.push_back(std::move(pts));
  }
  j["frames"] = std::move(frames);
  if (!f.provenance.is_null()) j["provenance"] = f.provenance;
  return j.dump() + "\n";
}

inline LandmarkFile landmarks_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("landmark file: ") + e.what());
  }
  try {
    LandmarkFile f;
    f.fps = j.value("fps", 25.0);
    const std::string scheme = j.value("scheme", std::string(kMultiPie68Scheme));
    const auto& frames = j.at("frames");
    require(frames.is_array() && !frames.empty(), ErrorKind::kInvalidInput, "landmark file: no frames");
    const std::size_t n = frames.front().size();
    std::vector<Point2> data;
    for (const auto& frame : frames) {
      require(frame.size() == n, ErrorKind::kInvalidInput, "landmark file: frames differ in point count");
      for (const auto& p : frame) {
        require(p.size() == 2, ErrorKind::kInvalidInput, "landmark file: points must be [x, y]");
        data.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    }
    f.pixels = LandmarkSequence(frames.size(), n, std::move(data), scheme);
    for (const auto& c : j.at("crops")) {
      require(c.size() == 4, ErrorKind::kInvalidInput, "landmark file: crops must be [x, y, w, h]");
      f.crops.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>()});
    }
    if (j.contains("provenance")) f.provenance = j["provenance"];
    validate_landmark_file(f);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("landmark file: ") + e.what());
  }
}

// "KIMO", u32 version, u32 T, u32 N, f32 fps, T crops (4 x f32), T*N points
// (2 x f32), u32 length + scheme, u32 length + provenance JSON (0 = none).
inline std::string landmarks_to_binary(const LandmarkFile& f) {
  validate_landmark_file(f);
  ByteWriter w;
  w.raw(kLandmarkMagic);
  w.u32(kLandmarkVersion);
  w.u32(static_cast<std::uint32_t>(f.pixels.frames()));
  w.u32(static_cast<std::uint32_t>(f.pixels.points()));
  w.f32(static_cast<float>(f.fps));
  for (const CropBox& c : f.crops) {
    w.f32(static_cast<float>(c.x));
    w.f32(static_cast<float>(c.y));
    w.f32(static_cast<float>(c.width));
    w.f32(static_cast<float>(c.height));
  }
  for (const Point2& p : f.pixels.data()) {
    w.f32(static_cast<float>(p.x));
    w.f32(static_cast<float>(p.y));
  }
  w.str(f.pixels.scheme());
  w.str(f.provenance.is_null() ? std::string() : f.provenance.dump());
  return w.bytes();
}

inline LandmarkFile landmarks_from_binary(std::string_view bytes) {
  ByteReader r(bytes, ErrorKind::kInvalidInput);
  require(r.raw(4) == kLandmarkMagic, ErrorKind::kInvalidInput, "landmark file: bad magic");
  const std::uint32_t version = r.u32();
  require(version == kLandmarkVersion, ErrorKind::kInvalidInput,
          "landmark file: unsupported version " + std::to_string(version));
  const std::size_t frames = r.u32();
  const std::size_t points = r.u32();
  require(frames >= 1 && points >= 1, ErrorKind::kInvalidInput, "landmark file: empty sequence");
  require(r.remaining() >= 4 + frames * 16 + frames * points * 8, ErrorKind::kInvalidInput,
          "landmark file: truncated");
  LandmarkFile f;
  f.fps = r.f32();
  for (std::size_t t = 0; t < frames; ++t) {
    CropBox c;
    c.x = r.f32();
    c.y = r.f32();
    c.width = r.f32();
    c.height = r.f32();
    f.crops.push_back(c);
  }
  std::vector<Point2> data(frames * points);
  for (Point2& p : data) {
    p.x = r.f32();
    p.y = r.f32();
  }
  const std::string scheme = r.str();
  const std::string provenance = r.str();
  require(r.done(), ErrorKind::kInvalidInput, "landmark file: trailing bytes");
  f.pixels = LandmarkSequence(frames, points, std::move(data), scheme);
  if (!provenance.empty()) f.provenance = nlohmann::json::parse(provenance);
  validate_landmark_file(f);
  return f;
}

inline std::string serialize_landmarks(const LandmarkFile& f, FileFormat format) {
  return format == FileFormat::kJson ? landmarks_to_json(f) : landmarks_to_binary(f);
}

inline LandmarkFile parse_landmarks(std::string_view bytes) {
  if (bytes.substr(0, 4) == kLandmarkMagic) return landmarks_from_binary(bytes);
  return landmarks_from_json(bytes);
}

inline LandmarkFile load_landmarks(const std::filesystem::path& path) { return parse_landmarks(read_file(path)); }

inline void save_landmarks(const std::filesystem::path& path, const LandmarkFile& f,
                           FileFormat format = FileFormat::kJson) {
  write_atomic(path, serialize_landmarks(f, format));
}

// Temporal artifact file: per-step displacement differences in normalized
// units plus an L1 summary per region.
inline nlohmann::json artifact_summary(const TemporalArtifact& a) {
  nlohmann::json regions = nlohmann::json::object();
  if (a.points() == kMultiPie68Points) {
    for (FaceRegion r : kAllRegions) {
      double sum = 0.0;
      for (std::size_t i = 0; i < a.steps(); ++i) {
        for (std::size_t j : region_indices(r)) sum += l1_norm(a.at(i, j));
      }
      regions[std::string(region_name(r))] = sum;
    }
  }
  return {{"artifact_l1", artifact_l1(a)}, {"regions_l1", regions}};
}

inline std::string artifact_to_json(const TemporalArtifact& a, const nlohmann::json& provenance = {}) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < a.steps(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < a.points(); ++j) row.push_back({a.at(i, j).x, a.at(i, j).y});
    steps.push_back(std::move(row));
  }
  nlohmann::json j{{"steps", a.steps()}, {"points", a.points()}, {"artifact", std::move(steps)},
                   {"summary", artifact_summary(a)}};
  if (!provenance.is_null()) j["provenance"] = provenance;
  return j.dump() + "\n";
}

inline TemporalArtifact artifact_from_json(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    const std::size_t steps = j.at("steps").get<std::size_t>();
    const std::size_t points = j.at("points").get<std::size_t>();
    const auto& rows = j.at("artifact");
    require(rows.size() == steps, ErrorKind::kInvalidInput, "artifact file: step count mismatch");
    TemporalArtifact a(steps, points);
    for (std::size_t i = 0; i < steps; ++i) {
      require(rows[i].size() == points, ErrorKind::kInvalidInput, "artifact file: point count mismatch");
      for (std::size_t k = 0; k < points; ++k) {
        a.at(i, k) = {rows[i][k].at(0).get<double>(), rows[i][k].at(1).get<double>()};
      }
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("artifact file: ") + e.what());
  }
}

inline TemporalArtifact load_artifact(const std::filesystem::path& path) { return artifact_from_json(read_file(path)); }

}  // namespace kimoi::io
