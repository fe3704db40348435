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
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"
#include "kimoi/random.hpp"

namespace kimoi {

// Transition index t maximizing sum over eye and mouth landmarks of the L1
// norm of frame[t+1] - frame[t]. Ties go to the smallest t.
inline std::size_t max_nonrigid_timestep(const LandmarkSequence& seq) {
  require(seq.frames() >= 2, ErrorKind::kInvalidInput,
          "max_nonrigid_timestep: need at least 2 frames");
  require(seq.points() == kMultiPie68Points, ErrorKind::kInvalidInput,
          "max_nonrigid_timestep: needs the 68-point layout");
  const std::vector<std::size_t> nonrigid = eye_mouth_indices();
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t t = 0; t + 1 < seq.frames(); ++t) {
    double score = 0.0;
    for (std::size_t j : nonrigid) score += l1_norm(seq.at(t + 1, j) - seq.at(t, j));
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  return best;
}

enum class SamplingMode { kUniform, kGuided };

inline std::string_view sampling_mode_name(SamplingMode mode) {
  return mode == SamplingMode::kGuided ? "guided" : "uniform";
}

inline SamplingMode sampling_mode_from_name(std::string_view name) {
  if (name == "guided") return SamplingMode::kGuided;
  if (name == "uniform") return SamplingMode::kUniform;
  throw Error(ErrorKind::kConfig, "unknown sampling mode: " + std::string(name));
}

struct ClipSampler {
  std::size_t clip_length = 16;
  SamplingMode mode = SamplingMode::kGuided;
  double guided_std = 0.0;  // <= 0 means clip_length / 2

  double effective_std() const {
    return guided_std > 0.0 ? guided_std : 0.5 * static_cast<double>(clip_length);
  }
};

// Probability of each valid clip start. Guided mode is a Gaussian over
// start positions with mean t* - T/2, rounded to the nearest integer and
// restricted (renormalized) to the valid range.
inline std::vector<double> clip_start_distribution(const ClipSampler& sampler,
                                                   const LandmarkSequence& seq) {
  require(sampler.clip_length >= 1, ErrorKind::kInvalidInput, "sample_clip: clip length must be >= 1");
  require(seq.frames() >= sampler.clip_length, ErrorKind::kInvalidInput,
          "sample_clip: parent sequence is shorter than the clip length");
  const std::size_t starts = seq.frames() - sampler.clip_length + 1;
  std::vector<double> probs(starts, 1.0 / static_cast<double>(starts));
  if (sampler.mode == SamplingMode::kUniform || starts == 1) return probs;

  const double peak = static_cast<double>(max_nonrigid_timestep(seq));
  const double mean = peak - 0.5 * static_cast<double>(sampler.clip_length);
  const double sd = sampler.effective_std();
  auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); };
  double total = 0.0;
  for (std::size_t s = 0; s < starts; ++s) {
    const double x = static_cast<double>(s);
    probs[s] = cdf(x + 0.5) - cdf(x - 0.5);
    total += probs[s];
  }
  if (!(total > 0.0)) {
    // All mass outside the valid range: use the nearest valid start.
    std::fill(probs.begin(), probs.end(), 0.0);
    const double clamped = std::clamp(std::round(mean), 0.0, static_cast<double>(starts - 1));
    probs[static_cast<std::size_t>(clamped)] = 1.0;
    return probs;
  }
  for (double& p : probs) p /= total;
  return probs;
}

inline std::size_t sample_clip_start(const ClipSampler& sampler, const LandmarkSequence& seq,
                                     Rng& rng) {
  const std::vector<double> probs = clip_start_distribution(sampler, seq);
  if (probs.size() == 1) return 0;
  if (sampler.mode == SamplingMode::kUniform) {
    std::uniform_int_distribution<std::size_t> dist(0, probs.size() - 1);
    return dist(rng);
  }
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  return dist(rng);
}

inline LandmarkSequence sample_clip(const ClipSampler& sampler, const LandmarkSequence& seq,
                                    Rng& rng) {
  return seq.slice(sample_clip_start(sampler, seq, rng), sampler.clip_length);
}

}  // namespace kimoi
