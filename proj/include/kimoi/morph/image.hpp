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
#include <vector>

#include "kimoi/error.hpp"

namespace kimoi {

// 8-bit RGB image, row-major, interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {
    require(w > 0 && h > 0, ErrorKind::kInvalidInput, "image dimensions must be positive");
  }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  std::uint8_t& at(int x, int y, int c) { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }

  bool same_size(const Image& o) const { return width == o.width && height == o.height; }
  friend bool operator==(const Image&, const Image&) = default;
};

// Pixel rectangle [x0, x0 + width) x [y0, y0 + height).
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height;
  }
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

using FrameSequence = std::vector<Image>;

}  // namespace kimoi
