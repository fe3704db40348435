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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kimoi/error.hpp"
#include "kimoi/io/atomic_file.hpp"
#include "kimoi/morph/image.hpp"

namespace kimoi::io {

// Any PNG is decoded to 8-bit RGB (alpha composited away, gray expanded).
inline Image decode_png(std::string_view bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::kIo, std::string("png: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw Error(ErrorKind::kIo, "png: empty image");
  }
  Image image(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, image.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorKind::kIo, "png: " + msg);
  }
  return image;
}

// The simplified writer uses fixed settings and emits no time chunk, so equal
// images give equal bytes.
inline std::string encode_png(const Image& image) {
  require(image.width > 0 && image.height > 0, ErrorKind::kInvalidInput, "png: empty image");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, std::string("png: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, std::string("png: ") + img.message);
  }
  out.resize(size);
  return out;
}

inline Image read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

inline void write_png(const std::filesystem::path& path, const Image& image) {
  write_atomic(path, encode_png(image));
}

// Diverging blue-white-red map over [-1, 1], one cell of `cell` pixels per
// matrix entry.
inline Image heatmap(const Eigen::MatrixXd& values, int cell = 4) {
  require(values.rows() > 0 && values.cols() > 0 && cell > 0, ErrorKind::kInvalidInput,
          "heatmap: empty matrix");
  Image img(static_cast<int>(values.cols()) * cell, static_cast<int>(values.rows()) * cell);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double v = std::clamp(std::isfinite(values(i, j)) ? values(i, j) : 0.0, -1.0, 1.0);
      const double a = std::abs(v);
      const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - a)));
      const std::uint8_t rgb[3] = {v >= 0 ? std::uint8_t{255} : fade, fade, v <= 0 ? std::uint8_t{255} : fade};
      for (int dy = 0; dy < cell; ++dy) {
        for (int dx = 0; dx < cell; ++dx) {
          for (int c = 0; c < 3; ++c) {
            img.at(static_cast<int>(j) * cell + dx, static_cast<int>(i) * cell + dy, c) = rgb[c];
          }
        }
      }
    }
  }
  return img;
}

inline std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.png", index + 1);
  return buf;
}

// Frames are frame_000001.png ... in order; every file is checked to exist
// before any is decoded. Reads `expected` frames starting at index `first`.
inline FrameSequence read_frame_directory(const std::filesystem::path& dir, std::size_t expected,
                                          std::size_t first = 0) {
  require(std::filesystem::is_directory(dir), ErrorKind::kIo, "frames directory not found: " + dir.string());
  for (std::size_t i = first; i < first + expected; ++i) {
    const auto p = dir / frame_filename(i);
    require(std::filesystem::is_regular_file(p), ErrorKind::kSequenceMismatch,
            "missing frame file: " + p.string());
  }
  FrameSequence frames;
  for (std::size_t i = first; i < first + expected; ++i) frames.push_back(read_png(dir / frame_filename(i)));
  return frames;
}

inline std::size_t count_frame_files(const std::filesystem::path& dir) {
  std::size_t n = 0;
  while (std::filesystem::is_regular_file(dir / frame_filename(n))) ++n;
  return n;
}

}  // namespace kimoi::io
