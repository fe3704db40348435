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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kimoi/error.hpp"
#include "kimoi/geometry/regions.hpp"

namespace kimoi::lpn {

struct LpnConfig {
  std::size_t bases = 64;          // k
  std::size_t width = 128;         // d, latent and token width
  std::size_t frames = 16;         // T
  std::size_t points = kMultiPie68Points;
  std::size_t encoder_layers = 4;
  std::size_t decoder_layers = 4;
  std::size_t heads = 4;
  std::size_t ff_width = 256;
  double lambda_reg = 0.01;
  // Empty means default_landmark_weights(nonrigid_weight).
  std::vector<double> landmark_weights;
  double nonrigid_weight = 5.0;

  std::size_t coords() const { return 2 * points; }

  std::vector<double> weights() const {
    if (!landmark_weights.empty()) return landmark_weights;
    return default_landmark_weights(nonrigid_weight, points);
  }

  void validate() const {
    require(bases >= 1, ErrorKind::kConfig, "lpn config: k must be >= 1");
    require(width >= 2 && width % 2 == 0, ErrorKind::kConfig, "lpn config: d must be even");
    require(heads >= 1 && width % heads == 0, ErrorKind::kConfig,
            "lpn config: d must be divisible by heads");
    require(frames >= 2, ErrorKind::kConfig, "lpn config: T must be >= 2");
    require(points >= 1 && ff_width >= 1, ErrorKind::kConfig, "lpn config: bad sizes");
    require(lambda_reg >= 0.0, ErrorKind::kConfig, "lpn config: lambda_reg must be >= 0");
    require(landmark_weights.empty() || landmark_weights.size() == points, ErrorKind::kConfig,
            "lpn config: landmark_weights must have one entry per landmark");
    for (double w : weights()) {
      require(w > 0.0, ErrorKind::kConfig, "lpn config: landmark weights must be positive");
    }
  }

  friend bool operator==(const LpnConfig&, const LpnConfig&) = default;
};

inline void to_json(nlohmann::json& j, const LpnConfig& c) {
  j = nlohmann::json{{"k", c.bases},
                     {"d", c.width},
                     {"T", c.frames},
                     {"N_lnd", c.points},
                     {"encoder_layers", c.encoder_layers},
                     {"decoder_layers", c.decoder_layers},
                     {"heads", c.heads},
                     {"ff_width", c.ff_width},
                     {"lambda_reg", c.lambda_reg},
                     {"nonrigid_weight", c.nonrigid_weight},
                     {"landmark_weights", c.landmark_weights}};
}

// Unsigned config value; negative numbers are rejected instead of wrapping.
template <class U>
U unsigned_value(const nlohmann::json& j, const char* key, U fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& v = j.at(key);
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), ErrorKind::kConfig,
          std::string("config: ") + key + " must be a non-negative integer");
  return v.get<U>();
}

inline void from_json(const nlohmann::json& j, LpnConfig& c) {
  LpnConfig d;
  c.bases = unsigned_value(j, "k", d.bases);
  c.width = unsigned_value(j, "d", d.width);
  c.frames = unsigned_value(j, "T", d.frames);
  c.points = unsigned_value(j, "N_lnd", d.points);
  c.encoder_layers = unsigned_value(j, "encoder_layers", d.encoder_layers);
  c.decoder_layers = unsigned_value(j, "decoder_layers", d.decoder_layers);
  c.heads = unsigned_value(j, "heads", d.heads);
  c.ff_width = unsigned_value(j, "ff_width", d.ff_width);
  c.lambda_reg = j.value("lambda_reg", d.lambda_reg);
  c.nonrigid_weight = j.value("nonrigid_weight", d.nonrigid_weight);
  c.landmark_weights = j.value("landmark_weights", d.landmark_weights);
}

}  // namespace kimoi::lpn
