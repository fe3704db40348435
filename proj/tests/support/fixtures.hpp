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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "kimoi/kimoi.hpp"

namespace kimoi::testing {

inline LandmarkSequence random_sequence(std::size_t frames, std::size_t points, Rng& rng,
                                        double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  LandmarkSequence seq(frames, points);
  for (Point2& p : seq.data()) p = {u(rng), u(rng)};
  return seq;
}

// Template face with small random per-frame jitter, in normalized units.
inline LandmarkSequence jittered_face(std::size_t frames, Rng& rng, double jitter = 0.002) {
  const std::vector<Point2> face = synth::template_face();
  LandmarkSequence seq(frames, face.size());
  std::normal_distribution<double> n(0.0, jitter);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < face.size(); ++j) seq.at(t, j) = face[j] + Point2{n(rng), n(rng)};
  }
  return seq;
}

inline lpn::LpnConfig tiny_config(std::size_t frames = 6) {
  lpn::LpnConfig c;
  c.bases = 5;
  c.width = 8;
  c.frames = frames;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.heads = 2;
  c.ff_width = 12;
  return c;
}

inline std::vector<LandmarkSequence> synthetic_clips(std::size_t count, std::size_t length,
                                                     std::uint64_t seed) {
  synth::CorpusOptions opts;
  opts.count = count;
  opts.min_length = length;
  opts.max_length = length;
  opts.seed = seed;
  return synth::normalized_corpus(synth::synth_corpus(opts));
}

inline Image noise_image(int width, int height, Rng& rng) {
  Image img(width, height);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& v : img.pixels) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("kimoi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace kimoi::testing
