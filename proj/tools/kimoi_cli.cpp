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

// kimoi command-line tool: LPN training and perturbation, face morphing,
// artifact analysis and the end-to-end pipeline.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kimoi/kimoi.hpp"

namespace fs = std::filesystem;
using namespace kimoi;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitCorpusNotFound = 2;
constexpr int kExitUsage = 64;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string format = "json";
};

void add_common(CLI::App* app, CommonFlags& flags) {
  app->add_option("--seed", flags.seed, "Master seed (overrides the config)");
  app->add_option("--threads", flags.threads, "Worker threads; never changes outputs")
      ->check(CLI::PositiveNumber);
  app->add_option("--format", flags.format, "Landmark output format")->check(CLI::IsMember({"json", "bin"}));
}

int report(ErrorKind kind, const std::string& message) {
  const nlohmann::json j{{"error", {{"kind", kind_name(kind)}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
  if (kind == ErrorKind::kCorpusNotFound) return kExitCorpusNotFound;
  if (kind == ErrorKind::kUsage) return kExitUsage;
  return kExitFailure;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("kimoi");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("KIMOI_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

fs::path config_base(const fs::path& config_path) {
  return config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
}

lpn::ProgressFn progress_logger(std::size_t total) {
  const std::size_t every = std::max<std::size_t>(1, total / 20);
  return [every, total](const lpn::LossRecord& r) {
    if (r.step % every == 0 || r.step + 1 == total) {
      spdlog::info("step {}/{} loss_rec={:.6g} loss_reg={:.6g} total={:.6g}", r.step + 1, total, r.rec, r.reg,
                   r.total);
    }
  };
}

// lpn train <config>
int cmd_train(const fs::path& config_path, std::optional<std::size_t> synthetic, std::optional<std::size_t> steps,
              const CommonFlags& flags, const std::string& out, const std::string& loss_out) {
  io::ProjectConfig config = io::load_config(config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (steps) config.train.steps = *steps;
  const fs::path base = config_base(config_path);

  std::vector<io::NamedSequence> corpus;
  if (synthetic) {
    io::SyntheticConfig s = config.synthetic;
    s.count = *synthetic;
    corpus = io::synthetic_corpus(s, derive_seed(config.seed, streams::kCorpus));
  } else {
    require(!config.paths.landmarks.empty(), ErrorKind::kCorpusNotFound,
            "no landmark corpus configured (set paths.landmarks or pass --synthetic N)");
    corpus = io::load_corpus(io::resolve_path(base, config.paths.landmarks));
  }
  config.validate();
  spdlog::info("training on {} sequences for {} steps", corpus.size(), config.train.steps);

  const auto trained =
      lpn::train(lpn::LpnModel<float>::initialize(config.lpn, config.seed), io::normalized_sequences(corpus),
                 io::train_options(config, flags.threads), progress_logger(config.train.steps));
  const fs::path ckpt = out.empty() ? io::resolve_path(base, config.paths.checkpoint) : fs::path(out);
  fs::path csv = loss_out.empty() ? ckpt : fs::path(loss_out);
  if (loss_out.empty()) csv += ".loss.csv";
  lpn::save_checkpoint(trained.model, ckpt);
  io::write_atomic(csv, io::loss_csv(trained.history));
  const lpn::LossRecord& last = trained.history.back();
  const nlohmann::json summary{{"checkpoint", ckpt.string()},
                               {"checkpoint_sha256", io::sha256_file(ckpt)},
                               {"loss_csv", csv.string()},
                               {"initial_loss_rec", trained.history.front().rec},
                               {"final_loss_rec", last.rec},
                               {"final_loss_reg", last.reg}};
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// lpn perturb <checkpoint> <landmarks>
int cmd_perturb(const fs::path& ckpt, const fs::path& landmarks, double sigma, const CommonFlags& flags,
                const std::string& out, const std::string& artifact_out, const std::string& source_out,
                std::optional<std::size_t> start_opt) {
  const lpn::LpnModel<float> model = lpn::load_checkpoint<float>(ckpt);
  const io::LandmarkFile input = io::load_landmarks(landmarks);
  const lpn::LpnConfig& mc = model.config();
  require(input.pixels.points() == mc.points, ErrorKind::kShapeMismatch,
          "landmark file has " + std::to_string(input.pixels.points()) + " points, checkpoint expects " +
              std::to_string(mc.points));
  require(input.pixels.frames() >= mc.frames, ErrorKind::kShapeMismatch,
          "landmark file has fewer frames than the checkpoint's T = " + std::to_string(mc.frames));

  const std::uint64_t seed = flags.seed.value_or(0);
  const AlignedSequence aligned = input.aligned();
  std::size_t start = 0;
  if (start_opt) {
    start = *start_opt;
    require(start + mc.frames <= input.pixels.frames(), ErrorKind::kUsage, "--start leaves fewer than T frames");
  } else if (input.pixels.frames() > mc.frames) {
    Rng rng(derive_seed(seed, streams::kClip));
    start = sample_clip_start(ClipSampler{mc.frames, SamplingMode::kGuided, 0.0}, aligned.normalized, rng);
  }
  const LandmarkSequence clip = aligned.normalized.slice(start, mc.frames);
  Alignment clip_alignment;
  for (std::size_t t = start; t < start + mc.frames; ++t) {
    clip_alignment.anchors.push_back(aligned.alignment.anchors[t]);
    clip_alignment.crops.push_back(aligned.alignment.crops[t]);
  }

  PerturbationSpec spec;
  spec.sigma = sigma;
  spec.seed = seed;
  const PseudoFakeLandmarks fake = generate_pseudofake_landmarks(model, clip, spec);

  nlohmann::json provenance = fake.metadata;
  provenance["checkpoint_sha256"] = io::sha256_file(ckpt);
  provenance["source_sha256"] = io::sha256_file(landmarks);
  provenance["start"] = start;

  const io::LandmarkFile target{input.fps, denormalize(fake.target, clip_alignment), clip_alignment.crops,
                                provenance};
  const fs::path out_path = out.empty() ? fs::path(landmarks).replace_extension(".target" +
                                              std::string(flags.format == "bin" ? ".kimo" : ".json"))
                                        : fs::path(out);
  fs::path artifact_path = artifact_out.empty() ? out_path : fs::path(artifact_out);
  if (artifact_out.empty()) artifact_path.replace_extension(".artifact.json");
  io::save_landmarks(out_path, target, io::format_from_name(flags.format));
  io::write_atomic(artifact_path, io::artifact_to_json(fake.artifact, provenance));
  if (!source_out.empty()) {
    const io::LandmarkFile source{input.fps, input.pixels.slice(start, mc.frames), clip_alignment.crops, provenance};
    io::save_landmarks(source_out, source, io::format_from_name(flags.format));
  }

  nlohmann::json summary = io::artifact_summary(fake.artifact);
  summary["target"] = out_path.string();
  summary["artifact"] = artifact_path.string();
  summary["provenance"] = provenance;
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// morph <frames-dir> <src> <dst> <out-dir>
int cmd_morph(const fs::path& frames_dir, const fs::path& src_path, const fs::path& dst_path, const fs::path& out_dir,
              bool antialias, std::size_t first_frame, const CommonFlags& flags) {
  const io::LandmarkFile src = io::load_landmarks(src_path);
  const io::LandmarkFile dst = io::load_landmarks(dst_path);
  require(src.pixels.same_shape(dst.pixels), ErrorKind::kSequenceMismatch,
          "source and target landmark files differ in frame or point count");
  const std::size_t available = io::count_frame_files(frames_dir);
  require(available >= first_frame + src.pixels.frames(), ErrorKind::kSequenceMismatch,
          "frames directory holds " + std::to_string(available) + " frames, landmarks need " +
              std::to_string(first_frame + src.pixels.frames()));
  const FrameSequence frames = io::read_frame_directory(frames_dir, src.pixels.frames(), first_frame);
  const TriangleMesh mesh = reference_mesh(src.pixels);
  const MorphSequenceResult result =
      morph_sequence(frames, src.pixels, dst.pixels, mesh, MorphOptions{antialias}, flags.threads);

  nlohmann::json outputs = nlohmann::json::array();
  for (std::size_t t = 0; t < result.frames.size(); ++t) {
    const std::string name = io::frame_filename(t);
    const std::string bytes = io::encode_png(result.frames[t]);
    io::write_atomic(out_dir / name, bytes);
    outputs.push_back({{"path", name}, {"sha256", io::sha256_hex(bytes)}});
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (const SkippedTriangle& s : result.skipped) skipped.push_back({s.frame, s.triangle});
  const nlohmann::json provenance{{"source_sha256", io::sha256_file(src_path)},
                                  {"target_sha256", io::sha256_file(dst_path)},
                                  {"antialias", antialias},
                                  {"triangles", mesh.triangles.size()},
                                  {"skipped", skipped},
                                  {"frames", outputs}};
  io::write_atomic(out_dir / "morph.json", provenance.dump(2) + "\n");
  if (!result.skipped.empty()) spdlog::warn("{} degenerate triangles skipped", result.skipped.size());
  std::cout << nlohmann::json{{"frames", result.frames.size()}, {"skipped", result.skipped.size()}}.dump()
            << std::endl;
  return 0;
}

// analyze corr <artifact-files...> --out matrix.csv
int cmd_corr(const std::vector<std::string>& files, const std::string& out, const std::string& heatmap_out,
             const std::string& mode) {
  require(!files.empty(), ErrorKind::kUsage, "analyze corr: no artifact files given");
  require(!out.empty(), ErrorKind::kUsage, "analyze corr: --out is required");
  std::vector<TemporalArtifact> artifacts;
  for (const std::string& f : files) {
    require(fs::is_regular_file(f), ErrorKind::kIo, "artifact file not found: " + f);
    artifacts.push_back(io::load_artifact(f));
  }
  const analysis::CorrelationMatrix corr =
      analysis::correlation_matrix(analysis::artifact_series(artifacts, analysis::series_mode_from_name(mode)));
  fs::path png = heatmap_out.empty() ? fs::path(out) : fs::path(heatmap_out);
  if (heatmap_out.empty()) png.replace_extension(".png");
  io::write_atomic(out, analysis::to_csv(corr));
  io::write_png(png, io::heatmap(corr.values));
  std::size_t zero_var = 0;
  for (bool z : corr.zero_variance) zero_var += z ? 1 : 0;
  nlohmann::json summary{{"csv", out},
                         {"heatmap", png.string()},
                         {"samples", corr.sample_count},
                         {"zero_variance_landmarks", zero_var},
                         {"max_abs_off_diagonal", corr.max_abs_off_diagonal()}};
  if (corr.size() == kMultiPie68Points) {
    summary["block_structure_score"] =
        analysis::block_structure_score(corr, analysis::region_blocks({kInnerRegions.begin(), kInnerRegions.end()}));
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// pipeline run <config>
int cmd_pipeline(const fs::path& config_path, const CommonFlags& flags) {
  io::ProjectConfig config = io::load_config(config_path);
  if (flags.seed) config.seed = *flags.seed;
  const io::PipelineResult r =
      io::run_pipeline(config, config_base(config_path), flags.threads, progress_logger(config.train.steps));
  std::cout << nlohmann::json{{"manifest", r.manifest_path.string()},
                              {"manifest_sha256", r.manifest_sha256},
                              {"clips", r.clips},
                              {"skipped_triangles", r.skipped_triangles}}
                   .dump(2)
            << std::endl;
  return 0;
}

// synth <out-dir>: synthetic landmark files, optionally with rendered frames.
int cmd_synth(const fs::path& out_dir, std::size_t count, std::size_t length, double amplitude,
              const std::vector<std::size_t>& blinks, bool frames, int image_size, const CommonFlags& flags) {
  synth::CorpusOptions opts;
  opts.count = count;
  opts.min_length = opts.max_length = length;
  opts.amplitude = amplitude;
  opts.blink_schedule = blinks;
  opts.image_size = image_size;
  opts.seed = flags.seed.value_or(0);
  const io::FileFormat format = io::format_from_name(flags.format);
  std::size_t i = 0;
  for (const synth::SyntheticSequence& s : synth::synth_corpus(opts)) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%05zu", i++);
    nlohmann::json provenance{{"generator", "synthetic"}, {"seed", opts.seed}, {"blinks", s.blinks}};
    const io::LandmarkFile file{s.fps, s.pixels, s.crops, provenance};
    io::save_landmarks(out_dir / (std::string(name) + (format == io::FileFormat::kJson ? ".json" : ".kimo")), file,
                       format);
    if (frames) {
      const FrameSequence rendered = synth::render_frames(s.pixels, image_size, image_size);
      for (std::size_t t = 0; t < rendered.size(); ++t) {
        io::write_png(out_dir / "frames" / name / io::frame_filename(t), rendered[t]);
      }
    }
  }
  std::cout << nlohmann::json{{"sequences", count}, {"out", out_dir.string()}}.dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"kimoi: pseudo-fake face landmark perturbation and morphing"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* lpn = app.add_subcommand("lpn", "Landmark perturbation network");
  lpn->require_subcommand(1);

  auto* train = lpn->add_subcommand("train", "Train the network, write a checkpoint and loss CSV");
  std::string train_config, train_out, train_loss;
  std::optional<std::size_t> synthetic, steps;
  train->add_option("config", train_config, "Project config (TOML or JSON)")->required();
  train->add_option("--synthetic", synthetic, "Train on N generated sequences instead of paths.landmarks");
  train->add_option("--steps", steps, "Override train.steps");
  train->add_option("--out", train_out, "Checkpoint path (default: paths.checkpoint)");
  train->add_option("--loss-csv", train_loss, "Loss history path (default: <checkpoint>.loss.csv)");
  add_common(train, flags);

  auto* perturb = lpn->add_subcommand("perturb", "Perturb a landmark track into a pseudo-fake target");
  std::string perturb_ckpt, perturb_landmarks, perturb_out, perturb_artifact;
  double sigma = PerturbationSpec{}.sigma;
  std::optional<std::size_t> perturb_start;
  std::string perturb_source;
  perturb->add_option("checkpoint", perturb_ckpt)->required();
  perturb->add_option("landmarks", perturb_landmarks)->required();
  perturb->add_option("--sigma", sigma, "Noise std on the chosen weight column")->check(CLI::NonNegativeNumber);
  perturb->add_option("--out", perturb_out, "Target landmark file");
  perturb->add_option("--artifact", perturb_artifact, "Temporal artifact file");
  perturb->add_option("--start", perturb_start, "Clip start frame (default: guided sample)");
  perturb->add_option("--source-out", perturb_source, "Also write the source clip landmarks");
  add_common(perturb, flags);

  auto* morph = app.add_subcommand("morph", "Warp frames from source to target landmarks");
  std::string morph_frames, morph_src, morph_dst, morph_out;
  bool antialias = false;
  std::size_t first_frame = 0;
  morph->add_option("frames-dir", morph_frames)->required();
  morph->add_option("src-landmarks", morph_src)->required();
  morph->add_option("dst-landmarks", morph_dst)->required();
  morph->add_option("out-dir", morph_out)->required();
  morph->add_flag("--antialias", antialias, "Supersampled triangle edges");
  morph->add_option("--first-frame", first_frame, "Index of the frame matching the first landmark frame");
  add_common(morph, flags);

  auto* analyze = app.add_subcommand("analyze", "Artifact analysis");
  analyze->require_subcommand(1);
  auto* corr = analyze->add_subcommand("corr", "Landmark correlation matrix of temporal artifacts");
  std::vector<std::string> corr_files;
  std::string corr_out, corr_png, corr_mode = "magnitude";
  corr->add_option("files", corr_files, "Artifact JSON files");
  corr->add_option("--out", corr_out, "Matrix CSV path");
  corr->add_option("--heatmap", corr_png, "Heatmap PNG path (default: <out>.png)");
  corr->add_option("--mode", corr_mode, "Per-landmark series")->check(CLI::IsMember({"magnitude", "x", "y"}));
  add_common(corr, flags);

  auto* pipeline = app.add_subcommand("pipeline", "End-to-end pipeline");
  pipeline->require_subcommand(1);
  auto* run = pipeline->add_subcommand("run", "sample -> perturb -> morph -> analyze with a manifest");
  std::string pipeline_config;
  run->add_option("config", pipeline_config)->required();
  add_common(run, flags);

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic landmark corpus");
  std::string synth_out;
  std::size_t synth_count = 4, synth_length = 64;
  double synth_amplitude = 1.0;
  std::vector<std::size_t> synth_blinks;
  bool synth_frames = false;
  int synth_size = 224;
  synth_cmd->add_option("out-dir", synth_out)->required();
  synth_cmd->add_option("--count", synth_count)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--length", synth_length)->check(CLI::Range(2, 100000));
  synth_cmd->add_option("--amplitude", synth_amplitude)->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--blink", synth_blinks, "Blink onset transitions");
  synth_cmd->add_flag("--frames", synth_frames, "Also render PNG frames");
  synth_cmd->add_option("--size", synth_size, "Frame and crop size in pixels")->check(CLI::Range(8, 4096));
  add_common(synth_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << std::endl;
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All) << std::endl;
    return 0;
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::kUsage, e.what());
  }

  try {
    if (train->parsed()) return cmd_train(train_config, synthetic, steps, flags, train_out, train_loss);
    if (perturb->parsed()) {
      return cmd_perturb(perturb_ckpt, perturb_landmarks, sigma, flags, perturb_out, perturb_artifact, perturb_source,
                         perturb_start);
    }
    if (morph->parsed()) return cmd_morph(morph_frames, morph_src, morph_dst, morph_out, antialias, first_frame, flags);
    if (corr->parsed()) return cmd_corr(corr_files, corr_out, corr_png, corr_mode);
    if (run->parsed()) return cmd_pipeline(pipeline_config, flags);
    if (synth_cmd->parsed()) {
      return cmd_synth(synth_out, synth_count, synth_length, synth_amplitude, synth_blinks, synth_frames, synth_size,
                       flags);
    }
    return report(ErrorKind::kUsage, "no command given");
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report(ErrorKind::kIo, e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::kInvalidInput, e.what());
  }
}
