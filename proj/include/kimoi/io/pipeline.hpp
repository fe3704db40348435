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
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kimoi/analysis/correlation.hpp"
#include "kimoi/error.hpp"
#include "kimoi/geometry/delaunay.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/io/config.hpp"
#include "kimoi/io/hash.hpp"
#include "kimoi/io/landmark_io.hpp"
#include "kimoi/io/png_io.hpp"
#include "kimoi/io/synth.hpp"
#include "kimoi/lpn/checkpoint.hpp"
#include "kimoi/lpn/train.hpp"
#include "kimoi/morph/morph.hpp"
#include "kimoi/perturb/perturbation.hpp"
#include "kimoi/perturb/sampler.hpp"
#include "kimoi/random.hpp"

namespace kimoi::io {

namespace fs = std::filesystem;

struct NamedSequence {
  std::string name;
  LandmarkFile file;
};

inline bool is_landmark_file(const fs::path& p) {
  return p.extension() == ".json" || p.extension() == ".kimo";
}

// A single landmark file, or every *.json / *.kimo file of a directory in
// name order.
inline std::vector<NamedSequence> load_corpus(const fs::path& path) {
  require(fs::exists(path), ErrorKind::kCorpusNotFound, "landmark corpus not found: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && is_landmark_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  require(!files.empty(), ErrorKind::kCorpusNotFound, "no landmark files in " + path.string());
  std::vector<NamedSequence> out;
  for (const fs::path& f : files) out.push_back({f.stem().string(), load_landmarks(f)});
  return out;
}

inline std::vector<NamedSequence> synthetic_corpus(const SyntheticConfig& s, std::uint64_t seed,
                                                   double image_size = 224.0) {
  synth::CorpusOptions opts;
  opts.image_size = image_size;
  opts.count = s.count;
  opts.min_length = s.min_length;
  opts.max_length = s.max_length;
  opts.amplitude = s.amplitude;
  opts.blink_rate = s.blink_rate;
  opts.seed = seed;
  std::vector<NamedSequence> out;
  std::size_t i = 0;
  for (synth::SyntheticSequence& seq : synth::synth_corpus(opts)) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%05zu", i++);
    out.push_back({name, LandmarkFile{seq.fps, std::move(seq.pixels), std::move(seq.crops), {}}});
  }
  return out;
}

inline std::vector<LandmarkSequence> normalized_sequences(const std::vector<NamedSequence>& corpus) {
  std::vector<LandmarkSequence> out;
  for (const NamedSequence& s : corpus) out.push_back(s.file.aligned().normalized);
  return out;
}

inline lpn::TrainOptions train_options(const ProjectConfig& c, std::size_t threads) {
  lpn::TrainOptions t;
  t.steps = c.train.steps;
  t.batch_size = c.train.batch_size;
  t.adam = c.train.adam;
  t.sampling = c.sampler.mode;
  t.guided_std = c.sampler.guided_std;
  t.threads = threads;
  t.seed = c.seed;
  return t;
}

inline std::string loss_csv(const std::vector<lpn::LossRecord>& history) {
  std::ostringstream os;
  os.precision(9);
  os << "step,loss_rec,loss_reg,total\n";
  for (const lpn::LossRecord& r : history) os << r.step << ',' << r.rec << ',' << r.reg << ',' << r.total << '\n';
  return os.str();
}

// Paths in the manifest are relative to the output root; no timestamps or
// host details, so equal runs give byte-identical manifests.
class Manifest {
 public:
  explicit Manifest(fs::path root) : root_(std::move(root)) {}

  void write(const fs::path& relative, std::string_view bytes) {
    write_atomic(root_ / relative, bytes);
    entries_.push_back({relative.generic_string(), sha256_hex(bytes)});
  }

  std::string serialize(const nlohmann::json& header) const {
    std::vector<std::pair<std::string, std::string>> sorted = entries_;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [path, hash] : sorted) files.push_back({{"path", path}, {"sha256", hash}});
    nlohmann::json j = header;
    j["artifacts"] = std::move(files);
    return j.dump(2) + "\n";
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct PipelineResult {
  fs::path manifest_path;
  std::string manifest_sha256;
  std::size_t clips = 0;
  std::size_t skipped_triangles = 0;
};

inline std::string clip_dir_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%04zu", i);
  return buf;
}

// sample -> perturb -> morph -> analyze. Without a landmark path a
// synthetic corpus is generated; without an existing checkpoint a model is
// trained first and stored with the outputs.
inline PipelineResult run_pipeline(const ProjectConfig& config, const fs::path& base, std::size_t threads = 1,
                                   const lpn::ProgressFn& progress = {}) {
  config.validate();
  validate_paths(config, base);
  const fs::path out_root = resolve_path(base, config.paths.outputs);
  Manifest manifest(out_root);

  const std::vector<NamedSequence> corpus =
      config.paths.landmarks.empty()
          ? synthetic_corpus(config.synthetic, derive_seed(config.seed, streams::kCorpus),
                             static_cast<double>(config.pipeline.image_size))
          : load_corpus(resolve_path(base, config.paths.landmarks));
  for (const NamedSequence& s : corpus) {
    require(s.file.pixels.points() == config.lpn.points, ErrorKind::kShapeMismatch,
            "corpus sequence " + s.name + " does not have N_lnd points");
  }

  if (!config.paths.frames.empty()) {
    for (std::size_t i = 0; i < std::min(config.pipeline.clips, corpus.size()); ++i) {
      const fs::path dir = resolve_path(base, config.paths.frames) / corpus[i].name;
      require(fs::is_directory(dir), ErrorKind::kCorpusNotFound, "frames directory not found: " + dir.string());
      for (std::size_t t = 0; t < corpus[i].file.pixels.frames(); ++t) {
        require(fs::is_regular_file(dir / frame_filename(t)), ErrorKind::kSequenceMismatch,
                "missing frame file: " + (dir / frame_filename(t)).string());
      }
    }
  }

  const fs::path ckpt = resolve_path(base, config.paths.checkpoint);
  std::string model_hash;
  lpn::LpnModel<float> model(config.lpn);
  if (!ckpt.empty() && fs::is_regular_file(ckpt)) {
    model = lpn::load_checkpoint<float>(ckpt);
    require(model.config().frames == config.lpn.frames && model.config().points == config.lpn.points,
            ErrorKind::kShapeMismatch, "checkpoint T / N_lnd differ from the config");
    model_hash = sha256_file(ckpt);
  } else {
    const auto trained = lpn::train(lpn::LpnModel<float>::initialize(config.lpn, config.seed),
                                    normalized_sequences(corpus), train_options(config, threads), progress);
    model = trained.model;
    const std::string bytes = lpn::serialize_checkpoint(model);
    manifest.write("model/lpn.ckpt", bytes);
    manifest.write("model/lpn.ckpt.json", lpn::serialize_sidecar(model.config()));
    manifest.write("model/loss.csv", loss_csv(trained.history));
    model_hash = sha256_hex(bytes);
  }

  const std::size_t T = config.lpn.frames;
  const ClipSampler sampler{T, config.sampler.mode, config.sampler.guided_std};
  PipelineResult result;
  std::vector<TemporalArtifact> artifacts;
  for (std::size_t i = 0; i < config.pipeline.clips; ++i) {
    const NamedSequence& parent = corpus[i % corpus.size()];
    const AlignedSequence aligned = parent.file.aligned();
    require(aligned.normalized.frames() >= T, ErrorKind::kShapeMismatch,
            "sequence " + parent.name + " is shorter than T");
    Rng clip_rng(derive_seed(config.seed, streams::kClip, i));
    const std::size_t start = sample_clip_start(sampler, aligned.normalized, clip_rng);
    const LandmarkSequence clip = aligned.normalized.slice(start, T);
    Alignment clip_alignment;
    clip_alignment.anchors.assign(aligned.alignment.anchors.begin() + static_cast<std::ptrdiff_t>(start),
                                  aligned.alignment.anchors.begin() + static_cast<std::ptrdiff_t>(start + T));
    clip_alignment.crops.assign(aligned.alignment.crops.begin() + static_cast<std::ptrdiff_t>(start),
                                aligned.alignment.crops.begin() + static_cast<std::ptrdiff_t>(start + T));

    PerturbationSpec spec = config.perturbation;
    spec.seed = derive_seed(config.seed, streams::kPerturb, i);
    const PseudoFakeLandmarks fake = generate_pseudofake_landmarks(model, clip, spec);

    const LandmarkSequence source_px = parent.file.pixels.slice(start, T);
    const LandmarkSequence target_px = denormalize(fake.target, clip_alignment);

    FrameSequence frames;
    if (!config.paths.frames.empty()) {
      const fs::path dir = resolve_path(base, config.paths.frames) / parent.name;
      const FrameSequence all = read_frame_directory(dir, start + T);
      frames.assign(all.begin() + static_cast<std::ptrdiff_t>(start), all.end());
    } else {
      frames = synth::render_frames(source_px, config.pipeline.image_size, config.pipeline.image_size);
    }
    const TriangleMesh mesh = reference_mesh(source_px);
    const MorphSequenceResult morphed =
        morph_sequence(frames, source_px, target_px, mesh, MorphOptions{config.morph.antialias}, threads);
    result.skipped_triangles += morphed.skipped.size();

    nlohmann::json provenance = fake.metadata;
    provenance["checkpoint_sha256"] = model_hash;
    provenance["source"] = parent.name;
    provenance["start"] = start;

    const fs::path dir = clip_dir_name(i);
    manifest.write(dir / "source_landmarks.json",
                   landmarks_to_json(LandmarkFile{parent.file.fps, source_px, clip_alignment.crops, {}}));
    manifest.write(dir / "target_landmarks.json",
                   landmarks_to_json(LandmarkFile{parent.file.fps, target_px, clip_alignment.crops, provenance}));
    manifest.write(dir / "artifact.json", artifact_to_json(fake.artifact, provenance));
    for (std::size_t t = 0; t < morphed.frames.size(); ++t) {
      manifest.write(dir / "frames" / frame_filename(t), encode_png(morphed.frames[t]));
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (const SkippedTriangle& s : morphed.skipped) skipped.push_back({s.frame, s.triangle});
    const nlohmann::json morph_info{{"antialias", config.morph.antialias},
                                    {"triangles", mesh.triangles.size()},
                                    {"skipped", skipped},
                                    {"provenance", provenance}};
    manifest.write(dir / "morph.json", morph_info.dump(2) + "\n");
    artifacts.push_back(fake.artifact);
  }
  result.clips = config.pipeline.clips;

  const analysis::CorrelationMatrix corr = analysis::correlation_matrix(analysis::artifact_series(artifacts));
  manifest.write("analysis/correlation.csv", analysis::to_csv(corr));
  manifest.write("analysis/correlation.png", encode_png(heatmap(corr.values)));

  nlohmann::json recorded = config_to_json(config);
  recorded["paths"].erase("outputs");
  nlohmann::json header{{"format", "kimoi-manifest"}, {"version", 1}, {"seed", config.seed},
                        {"config", std::move(recorded)}, {"checkpoint_sha256", model_hash}};
  const std::string bytes = manifest.serialize(header);
  result.manifest_path = out_root / "manifest.json";
  write_atomic(result.manifest_path, bytes);
  result.manifest_sha256 = sha256_hex(bytes);
  return result;
}

}  // namespace kimoi::io
