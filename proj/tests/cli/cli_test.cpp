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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kimoi/kimoi.hpp"
#include "support/fixtures.hpp"

namespace kimoi {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const testing::TempDir& dir, const std::string& args) {
  const fs::path out = dir / ".stdout", err = dir / ".stderr";
  const std::string cmd = std::string("cd '") + dir.path().string() + "' && '" KIMOI_CLI_PATH "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  return r;
}

nlohmann::json error_json(const RunResult& r) {
  const std::size_t line = r.err.find("{\"error\"");
  if (line == std::string::npos) return {};
  return nlohmann::json::parse(r.err.substr(line, r.err.find('\n', line) - line));
}

const char* kSmallConfig = R"(seed = 7
[paths]
outputs = "out"
checkpoint = "model.ckpt"
[lpn]
k = 8
d = 16
T = 8
encoder_layers = 1
decoder_layers = 1
heads = 2
ff_width = 32
[train]
steps = 12
batch_size = 4
[synthetic]
count = 6
min_length = 24
max_length = 32
[pipeline]
clips = 2
image_size = 64
)";

void write_text(const fs::path& p, const std::string& text) { io::write_atomic(p, text); }

TEST(Cli, TrainIsDeterministic) {
  testing::TempDir dir("cli_train");
  write_text(dir / "c.toml", kSmallConfig);
  const RunResult a = run(dir, "lpn train c.toml --synthetic 6 --out a.ckpt");
  ASSERT_EQ(a.exit_code, 0) << a.err;
  const RunResult b = run(dir, "lpn train c.toml --synthetic 6 --out b.ckpt --threads 2");
  ASSERT_EQ(b.exit_code, 0) << b.err;
  EXPECT_EQ(io::read_file(dir / "a.ckpt"), io::read_file(dir / "b.ckpt"));
  EXPECT_EQ(io::read_file(dir / "a.ckpt.json"), io::read_file(dir / "b.ckpt.json"));
  EXPECT_TRUE(fs::is_regular_file(dir / "a.ckpt.loss.csv"));
  const auto summary = nlohmann::json::parse(a.out);
  EXPECT_EQ(summary["checkpoint_sha256"], io::sha256_file(dir / "a.ckpt"));
  const RunResult c = run(dir, "lpn train c.toml --synthetic 6 --out c.ckpt --seed 8");
  ASSERT_EQ(c.exit_code, 0) << c.err;
  EXPECT_NE(io::read_file(dir / "a.ckpt"), io::read_file(dir / "c.ckpt"));
}

TEST(Cli, MissingCorpusExitsWithTwo) {
  testing::TempDir dir("cli_corpus");
  std::string text = kSmallConfig;
  text.replace(text.find("[paths]\n"), 8, "[paths]\nlandmarks = \"missing_dir\"\n");
  write_text(dir / "c.toml", text);
  const RunResult r = run(dir, "lpn train c.toml");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(error_json(r)["error"]["kind"], "corpus-not-found");
  EXPECT_FALSE(fs::exists(dir / "model.ckpt"));
  const RunResult p = run(dir, "pipeline run c.toml");
  EXPECT_EQ(p.exit_code, 2);
}

TEST(Cli, InvalidConfigIsReported) {
  testing::TempDir dir("cli_config");
  write_text(dir / "c.toml", "[lpn]\nk = -3\n");
  const RunResult r = run(dir, "lpn train c.toml --synthetic 2");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_json(r)["error"]["kind"], "config-invalid");
  EXPECT_EQ(run(dir, "lpn train").exit_code, 64);
  EXPECT_EQ(run(dir, "frobnicate").exit_code, 64);
}

class CliPerturb : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli_perturb");
    write_text(*dir_ / "c.toml", kSmallConfig);
    ASSERT_EQ(run(*dir_, "lpn train c.toml --synthetic 6").exit_code, 0);
    ASSERT_EQ(run(*dir_, "synth data --count 1 --length 20 --frames --size 64 --seed 3").exit_code, 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static testing::TempDir* dir_;
};

testing::TempDir* CliPerturb::dir_ = nullptr;

TEST_F(CliPerturb, DefaultSigmaIsRecorded) {
  const RunResult r = run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out t.json --seed 5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const io::LandmarkFile target = io::load_landmarks(*dir_ / "t.json");
  EXPECT_EQ(target.provenance["sigma"], 0.007);
  EXPECT_EQ(target.pixels.frames(), 8u);
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_GT(summary["artifact_l1"].get<double>(), 0.0);
  EXPECT_TRUE(summary["regions_l1"].contains("mouth"));
  EXPECT_TRUE(fs::is_regular_file(*dir_ / "t.artifact.json"));
}

TEST_F(CliPerturb, SameSeedSameHash) {
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out s1.json --seed 9").exit_code, 0);
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out s2.json --seed 9").exit_code, 0);
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out s3.json --seed 10").exit_code, 0);
  EXPECT_EQ(io::sha256_file(*dir_ / "s1.json"), io::sha256_file(*dir_ / "s2.json"));
  EXPECT_EQ(io::sha256_file(*dir_ / "s1.artifact.json"), io::sha256_file(*dir_ / "s2.artifact.json"));
  EXPECT_NE(io::sha256_file(*dir_ / "s1.json"), io::sha256_file(*dir_ / "s3.json"));
}

TEST_F(CliPerturb, BinaryFormatRoundTrips) {
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out b.kimo --format bin --seed 9").exit_code, 0);
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out j.json --seed 9").exit_code, 0);
  const io::LandmarkFile b = io::load_landmarks(*dir_ / "b.kimo");
  const io::LandmarkFile j = io::load_landmarks(*dir_ / "j.json");
  for (std::size_t n = 0; n < b.pixels.data().size(); ++n) {
    EXPECT_EQ(b.pixels.data()[n].x, static_cast<double>(static_cast<float>(j.pixels.data()[n].x)));
  }
}

TEST_F(CliPerturb, CorruptCheckpointIsReported) {
  std::string bytes = io::read_file(*dir_ / "model.ckpt");
  bytes.resize(bytes.size() - 5);
  io::write_atomic(*dir_ / "broken.ckpt", bytes);
  fs::copy_file(*dir_ / "model.ckpt.json", *dir_ / "broken.ckpt.json", fs::copy_options::overwrite_existing);
  const RunResult r = run(*dir_, "lpn perturb broken.ckpt data/synth_00000.json --out x.json");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_json(r)["error"]["kind"], "corrupt-checkpoint");
  EXPECT_FALSE(fs::exists(*dir_ / "x.json"));
}

TEST_F(CliPerturb, IdentityMorphReproducesFrames) {
  const RunResult r = run(*dir_, "morph data/frames/synth_00000 data/synth_00000.json data/synth_00000.json same");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (std::size_t t = 0; t < 20; ++t) {
    const Image in = io::read_png(*dir_ / "data" / "frames" / "synth_00000" / io::frame_filename(t));
    const Image out = io::read_png(*dir_ / "same" / io::frame_filename(t));
    EXPECT_EQ(in.pixels, out.pixels) << t;
  }
  EXPECT_TRUE(fs::is_regular_file(*dir_ / "same" / "morph.json"));
}

TEST_F(CliPerturb, MorphOfPerturbedTargetIsDeterministic) {
  ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out m.json --start 0 --seed 2").exit_code, 0);
  // Source clip covering the same frames as the target.
  io::LandmarkFile src = io::load_landmarks(*dir_ / "data" / "synth_00000.json");
  src.pixels = src.pixels.slice(0, 8);
  src.crops.resize(8);
  io::save_landmarks(*dir_ / "m_src.json", src, io::FileFormat::kJson);
  ASSERT_EQ(run(*dir_, "morph data/frames/synth_00000 m_src.json m.json m1").exit_code, 0);
  ASSERT_EQ(run(*dir_, "morph data/frames/synth_00000 m_src.json m.json m2 --threads 3").exit_code, 0);
  EXPECT_EQ(io::read_file(*dir_ / "m1" / "morph.json"), io::read_file(*dir_ / "m2" / "morph.json"));
}

TEST_F(CliPerturb, SourceClipAndFirstFrameLineUp) {
  const RunResult r = run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out o.json --start 5 "
                                 "--source-out o_src.json --seed 2");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const io::LandmarkFile full = io::load_landmarks(*dir_ / "data" / "synth_00000.json");
  const io::LandmarkFile src = io::load_landmarks(*dir_ / "o_src.json");
  ASSERT_EQ(src.pixels.frames(), 8u);
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t j = 0; j < 68; ++j) {
      EXPECT_EQ(src.pixels.at(t, j).x, full.pixels.at(t + 5, j).x);
      EXPECT_EQ(src.pixels.at(t, j).y, full.pixels.at(t + 5, j).y);
    }
  }
  EXPECT_EQ(src.provenance["start"], 5);

  ASSERT_EQ(run(*dir_, "morph data/frames/synth_00000 o_src.json o_src.json o_same --first-frame 5").exit_code, 0);
  for (std::size_t t = 0; t < 8; ++t) {
    const Image in = io::read_png(*dir_ / "data" / "frames" / "synth_00000" / io::frame_filename(t + 5));
    const Image out = io::read_png(*dir_ / "o_same" / io::frame_filename(t));
    EXPECT_EQ(in.pixels, out.pixels) << t;
  }
  EXPECT_EQ(run(*dir_, "morph data/frames/synth_00000 o_src.json o.json o_warp --first-frame 5").exit_code, 0);

  const RunResult late = run(*dir_, "morph data/frames/synth_00000 o_src.json o.json o_late --first-frame 13");
  EXPECT_EQ(late.exit_code, 1);
  EXPECT_EQ(error_json(late)["error"]["kind"], "sequence-mismatch");
  EXPECT_FALSE(fs::exists(*dir_ / "o_late"));
}

TEST_F(CliPerturb, MissingFrameFailsBeforeWriting) {
  fs::copy(*dir_ / "data" / "frames" / "synth_00000", *dir_ / "gappy");
  fs::remove(*dir_ / "gappy" / io::frame_filename(13));
  const RunResult r = run(*dir_, "morph gappy data/synth_00000.json data/synth_00000.json gap_out");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_json(r)["error"]["kind"], "sequence-mismatch");
  EXPECT_FALSE(fs::exists(*dir_ / "gap_out"));
}

TEST_F(CliPerturb, AnalyzeCorrelation) {
  EXPECT_EQ(run(*dir_, "analyze corr --out none.csv").exit_code, 64);
  for (int s = 0; s < 3; ++s) {
    ASSERT_EQ(run(*dir_, "lpn perturb model.ckpt data/synth_00000.json --out a" + std::to_string(s) +
                             ".json --seed " + std::to_string(s))
                  .exit_code,
              0);
  }
  const RunResult r = run(*dir_, "analyze corr a0.artifact.json a1.artifact.json a2.artifact.json --out corr.csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::is_regular_file(*dir_ / "corr.png"));
  const std::string csv = io::read_file(*dir_ / "corr.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 68);
  EXPECT_EQ(nlohmann::json::parse(r.out)["samples"], 21);
  const RunResult missing = run(*dir_, "analyze corr nope.json --out c2.csv");
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_EQ(error_json(missing)["error"]["kind"], "io");
}

TEST(Cli, ZeroSigmaOnMemorizedClip) {
  testing::TempDir dir("cli_memorize");
  ASSERT_EQ(run(dir, "synth clip --count 1 --length 8 --seed 4").exit_code, 0);
  write_text(dir / "c.toml", R"(seed = 3
[paths]
landmarks = "clip"
checkpoint = "mem.ckpt"
[lpn]
k = 16
d = 32
T = 8
encoder_layers = 1
decoder_layers = 1
heads = 4
ff_width = 64
[train]
steps = 400
batch_size = 1
learning_rate = 0.003
min_learning_rate = 0.0001
[synthetic]
min_length = 8
max_length = 8
)");
  const RunResult t = run(dir, "lpn train c.toml");
  ASSERT_EQ(t.exit_code, 0) << t.err;
  const double rec = nlohmann::json::parse(t.out)["final_loss_rec"].get<double>();
  EXPECT_LT(rec, 1e-4);
  const RunResult p = run(dir, "lpn perturb mem.ckpt clip/synth_00000.json --sigma 0 --out z.json");
  ASSERT_EQ(p.exit_code, 0) << p.err;
  // With sigma = 0 the artifact is the motion error of the reconstruction:
  // |Δ| <= |e_{t+1}| + |e_t| per step, and the mean landmark L1 error is at
  // most sqrt(2 * rec) because every landmark weight is >= 1.
  const double per_entry = nlohmann::json::parse(p.out)["artifact_l1"].get<double>() / (7.0 * 68.0);
  EXPECT_LE(per_entry, 2.0 * (8.0 / 7.0) * std::sqrt(2.0 * rec));
  EXPECT_EQ(io::load_landmarks(dir / "z.json").provenance["sigma"], 0.0);
}

TEST(Cli, PipelineManifestIsStable) {
  testing::TempDir a("cli_pipe_a"), b("cli_pipe_b");
  write_text(a / "c.toml", kSmallConfig);
  write_text(b / "c.toml", kSmallConfig);
  const RunResult ra = run(a, "pipeline run c.toml");
  ASSERT_EQ(ra.exit_code, 0) << ra.err;
  const RunResult rb = run(b, "pipeline run c.toml --threads 4");
  ASSERT_EQ(rb.exit_code, 0) << rb.err;
  EXPECT_EQ(io::read_file(a / "out" / "manifest.json"), io::read_file(b / "out" / "manifest.json"));
  const auto manifest = nlohmann::json::parse(io::read_file(a / "out" / "manifest.json"));
  for (const auto& entry : manifest["artifacts"]) {
    EXPECT_EQ(io::sha256_file(a / "out" / entry["path"].get<std::string>()), entry["sha256"]);
  }
}

}  // namespace
}  // namespace kimoi
