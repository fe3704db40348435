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
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>
#include <toml.hpp>

#include "kimoi/error.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/lpn/config.hpp"
#include "kimoi/lpn/optimizer.hpp"
#include "kimoi/perturb/perturbation.hpp"
#include "kimoi/perturb/sampler.hpp"

namespace kimoi::io {

struct PathsConfig {
  std::string landmarks;   // file or directory of landmark files; empty = synthetic corpus
  std::string frames;      // directory of per-sequence frame directories; empty = rendered
  std::string outputs = "out";
  std::string checkpoint = "lpn.ckpt";
  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 16;
  lpn::AdamOptions adam{.learning_rate = 1e-3, .warmup_steps = 100};
  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.steps == b.steps && a.batch_size == b.batch_size &&
           a.adam.learning_rate == b.adam.learning_rate &&
           a.adam.min_learning_rate == b.adam.min_learning_rate && a.adam.beta1 == b.adam.beta1 &&
           a.adam.beta2 == b.adam.beta2 && a.adam.epsilon == b.adam.epsilon &&
           a.adam.warmup_steps == b.adam.warmup_steps && a.adam.clip_norm == b.adam.clip_norm;
  }
};

struct SamplerConfig {
  SamplingMode mode = SamplingMode::kGuided;
  double guided_std = 0.0;
  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

struct MorphConfig {
  bool antialias = false;
  friend bool operator==(const MorphConfig&, const MorphConfig&) = default;
};

// Synthetic corpus used when no landmark path is configured.
struct SyntheticConfig {
  std::size_t count = 200;
  std::size_t min_length = 48;
  std::size_t max_length = 96;
  double amplitude = 1.0;
  double blink_rate = 0.02;
  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

struct PipelineConfig {
  std::size_t clips = 4;       // pseudo-fake clips produced per run
  int image_size = 224;        // rendered frame size when no frames are given
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct ProjectConfig {
  PathsConfig paths;
  lpn::LpnConfig lpn;
  TrainConfig train;
  PerturbationSpec perturbation;
  SamplerConfig sampler;
  MorphConfig morph;
  SyntheticConfig synthetic;
  PipelineConfig pipeline;
  std::uint64_t seed = 0;

  void validate() const {
    lpn.validate();
    require(train.steps >= 1 && train.batch_size >= 1, ErrorKind::kConfig, "config: train steps and batch_size must be >= 1");
    require(train.adam.learning_rate > 0.0, ErrorKind::kConfig, "config: learning_rate must be > 0");
    try {
      perturbation.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfig, e.what());
    }
    require(synthetic.min_length >= lpn.frames && synthetic.max_length >= synthetic.min_length,
            ErrorKind::kConfig, "config: synthetic lengths must be >= T and ordered");
    require(pipeline.clips >= 1 && pipeline.image_size >= 8, ErrorKind::kConfig,
            "config: pipeline needs clips >= 1 and image_size >= 8");
  }

  friend bool operator==(const ProjectConfig&, const ProjectConfig&) = default;
};

inline nlohmann::json config_to_json(const ProjectConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["paths"] = {{"landmarks", c.paths.landmarks},
                {"frames", c.paths.frames},
                {"outputs", c.paths.outputs},
                {"checkpoint", c.paths.checkpoint}};
  j["lpn"] = c.lpn;
  j["train"] = {{"steps", c.train.steps},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.adam.learning_rate},
                {"min_learning_rate", c.train.adam.min_learning_rate},
                {"beta1", c.train.adam.beta1},
                {"beta2", c.train.adam.beta2},
                {"epsilon", c.train.adam.epsilon},
                {"warmup_steps", c.train.adam.warmup_steps},
                {"clip_norm", c.train.adam.clip_norm}};
  j["perturbation"] = c.perturbation;
  j["sampler"] = {{"mode", sampling_mode_name(c.sampler.mode)}, {"guided_std", c.sampler.guided_std}};
  j["morph"] = {{"antialias", c.morph.antialias}};
  j["synthetic"] = {{"count", c.synthetic.count},
                    {"min_length", c.synthetic.min_length},
                    {"max_length", c.synthetic.max_length},
                    {"amplitude", c.synthetic.amplitude},
                    {"blink_rate", c.synthetic.blink_rate}};
  j["pipeline"] = {{"clips", c.pipeline.clips}, {"image_size", c.pipeline.image_size}};
  return j;
}

inline ProjectConfig config_from_json(const nlohmann::json& j) {
  try {
    ProjectConfig c;
    const ProjectConfig d;
    c.seed = lpn::unsigned_value(j, "seed", d.seed);
    const nlohmann::json empty = nlohmann::json::object();
    const auto& p = j.contains("paths") ? j["paths"] : empty;
    c.paths.landmarks = p.value("landmarks", d.paths.landmarks);
    c.paths.frames = p.value("frames", d.paths.frames);
    c.paths.outputs = p.value("outputs", d.paths.outputs);
    c.paths.checkpoint = p.value("checkpoint", d.paths.checkpoint);
    if (j.contains("lpn")) c.lpn = j["lpn"].get<lpn::LpnConfig>();
    const auto& t = j.contains("train") ? j["train"] : empty;
    c.train.steps = lpn::unsigned_value(t, "steps", d.train.steps);
    c.train.batch_size = lpn::unsigned_value(t, "batch_size", d.train.batch_size);
    c.train.adam.learning_rate = t.value("learning_rate", d.train.adam.learning_rate);
    c.train.adam.min_learning_rate = t.value("min_learning_rate", d.train.adam.min_learning_rate);
    c.train.adam.beta1 = t.value("beta1", d.train.adam.beta1);
    c.train.adam.beta2 = t.value("beta2", d.train.adam.beta2);
    c.train.adam.epsilon = t.value("epsilon", d.train.adam.epsilon);
    c.train.adam.warmup_steps = lpn::unsigned_value(t, "warmup_steps", d.train.adam.warmup_steps);
    c.train.adam.clip_norm = t.value("clip_norm", d.train.adam.clip_norm);
    if (j.contains("perturbation")) c.perturbation = j["perturbation"].get<PerturbationSpec>();
    const auto& s = j.contains("sampler") ? j["sampler"] : empty;
    c.sampler.mode = sampling_mode_from_name(s.value("mode", std::string(sampling_mode_name(d.sampler.mode))));
    c.sampler.guided_std = s.value("guided_std", d.sampler.guided_std);
    const auto& m = j.contains("morph") ? j["morph"] : empty;
    c.morph.antialias = m.value("antialias", d.morph.antialias);
    const auto& y = j.contains("synthetic") ? j["synthetic"] : empty;
    c.synthetic.count = lpn::unsigned_value(y, "count", d.synthetic.count);
    c.synthetic.min_length = lpn::unsigned_value(y, "min_length", d.synthetic.min_length);
    c.synthetic.max_length = lpn::unsigned_value(y, "max_length", d.synthetic.max_length);
    c.synthetic.amplitude = y.value("amplitude", d.synthetic.amplitude);
    c.synthetic.blink_rate = y.value("blink_rate", d.synthetic.blink_rate);
    const auto& pl = j.contains("pipeline") ? j["pipeline"] : empty;
    c.pipeline.clips = lpn::unsigned_value(pl, "clips", d.pipeline.clips);
    c.pipeline.image_size = pl.value("image_size", d.pipeline.image_size);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    throw Error(ErrorKind::kConfig, e.what());
  }
}

namespace detail {

inline nlohmann::json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw Error(ErrorKind::kConfig, "config: unsupported TOML value type");
}

inline void json_to_toml(const nlohmann::json& j, toml::table& out);

inline void json_value_to_toml_array(const nlohmann::json& j, toml::array& out) {
  for (const auto& v : j) {
    if (v.is_boolean()) out.push_back(v.get<bool>());
    else if (v.is_number_integer()) out.push_back(v.get<std::int64_t>());
    else if (v.is_number_float()) out.push_back(v.get<double>());
    else if (v.is_string()) out.push_back(v.get<std::string>());
    else throw Error(ErrorKind::kConfig, "config: unsupported array element");
  }
}

inline void json_to_toml(const nlohmann::json& j, toml::table& out) {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      toml::table sub;
      json_to_toml(v, sub);
      out.insert(k, std::move(sub));
    } else if (v.is_array()) {
      toml::array arr;
      json_value_to_toml_array(v, arr);
      out.insert(k, std::move(arr));
    } else if (v.is_boolean()) {
      out.insert(k, v.get<bool>());
    } else if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      require(u <= static_cast<std::uint64_t>(INT64_MAX), ErrorKind::kConfig,
              "config: integer too large for TOML: " + k);
      out.insert(k, static_cast<std::int64_t>(u));
    } else if (v.is_number_integer()) {
      out.insert(k, v.get<std::int64_t>());
    } else if (v.is_number_float()) {
      out.insert(k, v.get<double>());
    } else if (v.is_string()) {
      out.insert(k, v.get<std::string>());
    }
  }
}

}  // namespace detail

enum class ConfigSyntax { kToml, kJson };

inline ConfigSyntax syntax_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? ConfigSyntax::kJson : ConfigSyntax::kToml;
}

inline ProjectConfig parse_config(std::string_view text, ConfigSyntax syntax) {
  if (syntax == ConfigSyntax::kJson) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
    }
    return config_from_json(j);
  }
  try {
    const toml::table table = toml::parse(text);
    return config_from_json(detail::toml_to_json(table));
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + std::string(e.description()));
  }
}

inline std::string serialize_config(const ProjectConfig& c, ConfigSyntax syntax) {
  const nlohmann::json j = config_to_json(c);
  if (syntax == ConfigSyntax::kJson) return j.dump(2) + "\n";
  toml::table table;
  detail::json_to_toml(j, table);
  std::ostringstream os;
  os << table << "\n";
  return os.str();
}

inline ProjectConfig load_config(const std::filesystem::path& path) {
  require(std::filesystem::is_regular_file(path), ErrorKind::kConfig, "config file not found: " + path.string());
  return parse_config(read_file(path), syntax_for(path));
}

inline void save_config(const std::filesystem::path& path, const ProjectConfig& c) {
  write_atomic(path, serialize_config(c, syntax_for(path)));
}

// Relative paths are taken relative to `base` (normally the config file's
// directory).
inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Input paths must exist before any stage runs.
inline void validate_paths(const ProjectConfig& c, const std::filesystem::path& base) {
  if (!c.paths.landmarks.empty()) {
    const auto p = resolve_path(base, c.paths.landmarks);
    require(std::filesystem::exists(p), ErrorKind::kCorpusNotFound, "landmark corpus not found: " + p.string());
  }
  if (!c.paths.frames.empty()) {
    const auto p = resolve_path(base, c.paths.frames);
    require(std::filesystem::is_directory(p), ErrorKind::kCorpusNotFound, "frames directory not found: " + p.string());
  }
  require(!c.paths.outputs.empty(), ErrorKind::kConfig, "config: paths.outputs must be set");
}

}  // namespace kimoi::io
