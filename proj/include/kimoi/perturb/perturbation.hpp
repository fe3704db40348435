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
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"
#include "kimoi/lpn/model.hpp"
#include "kimoi/random.hpp"

namespace kimoi {

struct PerturbationSpec {
  double sigma = 0.007;
  // Number of distinct columns of W to perturb; 1 unless explicitly extended.
  std::size_t columns = 1;
  // Region groups eligible for selection; a non-empty subset of these is
  // drawn uniformly.
  std::vector<RegionGroup> groups{kRegionGroups.begin(), kRegionGroups.end()};
  std::uint64_t seed = 0;

  void validate() const {
    require(sigma >= 0.0, ErrorKind::kInvalidInput, "perturbation: sigma must be >= 0");
    require(columns >= 1, ErrorKind::kInvalidInput, "perturbation: columns must be >= 1");
    require(!groups.empty(), ErrorKind::kInvalidInput, "perturbation: need at least one region group");
  }

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

inline void to_json(nlohmann::json& j, const PerturbationSpec& s) {
  std::vector<std::string> groups;
  for (RegionGroup g : s.groups) groups.emplace_back(group_name(g));
  j = nlohmann::json{{"sigma", s.sigma}, {"columns", s.columns}, {"regions", groups}, {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, PerturbationSpec& s) {
  PerturbationSpec d;
  s.sigma = j.value("sigma", d.sigma);
  s.columns = lpn::unsigned_value(j, "columns", d.columns);
  s.seed = j.value("seed", d.seed);
  s.groups = d.groups;
  if (j.contains("regions")) {
    s.groups.clear();
    for (const auto& name : j.at("regions")) s.groups.push_back(group_from_name(name.get<std::string>()));
  }
}

struct PerturbedWeights {
  lpn::WeightMatrix weights;
  std::vector<std::size_t> columns;
};

// Adds i.i.d. N(0, sigma^2) noise over time to `spec.columns` uniformly
// chosen columns of W. Every other entry is left untouched.
inline PerturbedWeights perturb_weights(const lpn::WeightMatrix& w, const PerturbationSpec& spec,
                                        Rng& rng) {
  spec.validate();
  const std::size_t k = w.bases();
  require(k >= 1 && spec.columns <= k, ErrorKind::kInvalidInput,
          "perturb_weights: more columns requested than bases");
  PerturbedWeights out{w, {}};
  std::vector<std::size_t> pool(k);
  for (std::size_t i = 0; i < k; ++i) pool[i] = i;
  for (std::size_t c = 0; c < spec.columns; ++c) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t slot = pick(rng);
    const std::size_t column = pool[slot];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(slot));
    out.columns.push_back(column);
    for (std::size_t t = 0; t < w.steps(); ++t) {
      const double noise = spec.sigma * standard_normal(rng);
      if (spec.sigma > 0.0) out.weights.values(t, column) += noise;
    }
  }
  return out;
}

// Uniformly drawn non-empty subset of the eligible region groups, expanded
// to face regions in enum order.
inline std::vector<FaceRegion> sample_regions(const PerturbationSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t g = spec.groups.size();
  std::uniform_int_distribution<std::uint32_t> pick(1, (1u << g) - 1);
  const std::uint32_t mask = pick(rng);
  std::vector<FaceRegion> regions;
  for (std::size_t i = 0; i < g; ++i) {
    if (mask & (1u << i)) {
      for (FaceRegion r : group_regions(spec.groups[i])) regions.push_back(r);
    }
  }
  std::sort(regions.begin(), regions.end());
  regions.erase(std::unique(regions.begin(), regions.end()), regions.end());
  return regions;
}

// Takes landmarks of the selected regions from `perturbed`, everything else
// from `original`.
inline LandmarkSequence compose_landmarks(const LandmarkSequence& original,
                                          const LandmarkSequence& perturbed,
                                          const std::vector<FaceRegion>& regions) {
  require(original.same_shape(perturbed), ErrorKind::kInvalidInput,
          "compose_landmarks: shape mismatch");
  const std::vector<bool> selected = region_mask(regions, original.points());
  LandmarkSequence out = original;
  for (std::size_t t = 0; t < original.frames(); ++t) {
    for (std::size_t j = 0; j < original.points(); ++j) {
      if (selected[j]) out.at(t, j) = perturbed.at(t, j);
    }
  }
  return out;
}

struct PerturbationMetadata {
  std::vector<std::size_t> columns;
  std::vector<FaceRegion> regions;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct PseudoFakeLandmarks {
  LandmarkSequence target;
  TemporalArtifact artifact;
  PerturbationMetadata metadata;
  LandmarkSequence reconstruction;  // decoded from the perturbed weights
};

// encode -> perturb one column of W -> decode -> keep only the sampled
// regions of the decoded sequence.
template <class S>
PseudoFakeLandmarks generate_pseudofake_landmarks(const lpn::LpnModel<S>& model,
                                                  const LandmarkSequence& seq,
                                                  const PerturbationSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, streams::kPerturb));
  const lpn::WeightMatrix weights = lpn::encode(model, seq);
  PerturbedWeights perturbed = perturb_weights(weights, spec, rng);
  LandmarkSequence decoded = lpn::decode(model, perturbed.weights);
  std::vector<FaceRegion> regions = sample_regions(spec, rng);
  LandmarkSequence target = compose_landmarks(seq, decoded, regions);
  TemporalArtifact artifact = temporal_artifacts(target, seq);
  return {std::move(target), std::move(artifact),
          {std::move(perturbed.columns), std::move(regions), spec.sigma, spec.seed},
          std::move(decoded)};
}

inline void to_json(nlohmann::json& j, const PerturbationMetadata& m) {
  std::vector<std::string> regions;
  for (FaceRegion r : m.regions) regions.emplace_back(region_name(r));
  j = nlohmann::json{{"columns", m.columns}, {"regions", regions}, {"sigma", m.sigma}, {"seed", m.seed}};
}

}  // namespace kimoi
