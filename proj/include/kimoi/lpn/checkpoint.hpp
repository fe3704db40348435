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
#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "kimoi/error.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/io/binary.hpp"
#include "kimoi/lpn/model.hpp"

namespace kimoi::lpn {

// Binary checkpoint layout (little-endian):
//   "KIMOCKPT" | u32 version | u32 tensor count
//   per tensor: u32 name length | name | u8 dtype (0 = f32, 1 = f64)
//               | u32 ndim | u64 dims[ndim] | row-major data
// Trainable tensors come first, then the fixed input normalizer.
// The model config lives in a JSON sidecar next to the checkpoint.
inline constexpr std::string_view kCheckpointMagic = "KIMOCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p += ".json";
  return p;
}

template <class S>
std::string serialize_checkpoint(const LpnModel<S>& model) {
  static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>);
  io::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  std::uint32_t count = 2;
  model.params().visit([&](const std::string&, const Matrix<S>&) { ++count; });
  w.u32(count);
  auto put = [&](const std::string& name, const Matrix<S>& m) {
    w.str(name);
    w.u8(std::is_same_v<S, float> ? 0 : 1);
    w.u32(2);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if constexpr (std::is_same_v<S, float>) {
        w.f32(m.data()[i]);
      } else {
        w.f64(m.data()[i]);
      }
    }
  };
  model.params().visit(put);
  put("normalizer.mean", model.input_mean());
  put("normalizer.scale", model.input_scale());
  return w.bytes();
}

inline std::string serialize_sidecar(const LpnConfig& config) {
  nlohmann::json j{{"format", "kimoi-checkpoint"}, {"version", kCheckpointVersion},
                   {"config", config}};
  return j.dump(2) + "\n";
}

template <class S>
void save_checkpoint(const LpnModel<S>& model, const std::filesystem::path& path) {
  io::write_atomic(sidecar_path(path), serialize_sidecar(model.config()));
  io::write_atomic(path, serialize_checkpoint(model));
}

template <class S>
LpnModel<S> deserialize_checkpoint(const LpnConfig& config, std::string_view bytes) {
  const auto corrupt = ErrorKind::kCorruptCheckpoint;
  io::ByteReader r(bytes, corrupt);
  require(r.raw(kCheckpointMagic.size()) == kCheckpointMagic, corrupt, "checkpoint: bad magic");
  require(r.u32() == kCheckpointVersion, corrupt, "checkpoint: unsupported version");
  LpnModel<S> model(config);
  std::vector<std::string> names;
  model.params().visit([&](const std::string& name, Matrix<S>&) { names.push_back(name); });
  std::vector<Matrix<S>*> tensors = model.params().tensors();
  Matrix<S> mean = model.input_mean(), scale = model.input_scale();
  names.push_back("normalizer.mean");
  names.push_back("normalizer.scale");
  tensors.push_back(&mean);
  tensors.push_back(&scale);
  require(r.u32() == tensors.size(), corrupt, "checkpoint: tensor count does not match config");
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    require(r.str() == names[t], corrupt, "checkpoint: unexpected tensor " + names[t]);
    const std::uint8_t dtype = r.u8();
    require(dtype <= 1, corrupt, "checkpoint: unknown dtype");
    require(r.u32() == 2, corrupt, "checkpoint: tensors must be 2-D");
    const std::uint64_t rows = r.u64(), cols = r.u64();
    Matrix<S>& m = *tensors[t];
    require(rows == static_cast<std::uint64_t>(m.rows()) && cols == static_cast<std::uint64_t>(m.cols()),
            corrupt, "checkpoint: shape mismatch for " + names[t]);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = dtype == 0 ? S(r.f32()) : S(r.f64());
      require(std::isfinite(static_cast<double>(m.data()[i])), corrupt,
              "checkpoint: non-finite value in " + names[t]);
    }
  }
  require(r.done(), corrupt, "checkpoint: trailing bytes");
  try {
    model.set_normalizer(std::move(mean), std::move(scale));
  } catch (const Error& e) {
    throw Error(corrupt, std::string("checkpoint: ") + e.what());
  }
  return model;
}

inline LpnConfig load_checkpoint_config(const std::filesystem::path& path) {
  const auto sidecar = sidecar_path(path);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kIo, "checkpoint not found: " + path.string());
  }
  if (!std::filesystem::exists(sidecar)) {
    throw Error(ErrorKind::kCorruptCheckpoint, "checkpoint sidecar missing: " + sidecar.string());
  }
  try {
    const nlohmann::json j = nlohmann::json::parse(io::read_file(sidecar));
    LpnConfig config = j.at("config").get<LpnConfig>();
    config.validate();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorruptCheckpoint, std::string("checkpoint sidecar: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kCorruptCheckpoint, e.what());
  }
}

template <class S>
LpnModel<S> load_checkpoint(const std::filesystem::path& path) {
  const LpnConfig config = load_checkpoint_config(path);
  return deserialize_checkpoint<S>(config, io::read_file(path));
}

}  // namespace kimoi::lpn
