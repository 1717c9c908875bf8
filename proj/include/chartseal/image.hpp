// Copyright (c) the chartseal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chartseal/region.hpp"

namespace chartseal {

using Rgb = std::array<double, 3>;

// H x W x C raster, interleaved row-major, values nominally in [0, 1].
// Intermediate results may leave that range; clamp01() restores it.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool valid() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

enum class ImageFormat { kPng, kJpeg };

struct OverlayStyle {
  Rgb contour_color{0.0, 1.0, 0.0};
  int line_width = 2;
  double fill_alpha = 0.0;
};

// 8-bit value v maps to v / 255.
ImageTensor load_image(const std::filesystem::path& path);
void save_image(const ImageTensor& img, const std::filesystem::path& path,
                ImageFormat format = ImageFormat::kPng, int jpeg_quality = 95);

// In-memory codecs. decode_image sniffs PNG/JPEG signatures.
std::vector<std::uint8_t> encode_png(const ImageTensor& img);
std::vector<std::uint8_t> encode_jpeg(const ImageTensor& img, int quality);
ImageTensor decode_image(std::span<const std::uint8_t> bytes);

// Rounds every value to the nearest multiple of 1/255 after clamping.
ImageTensor quantize8(const ImageTensor& img);
ImageTensor clamp01(ImageTensor img);
ImageTensor to_rgb(const ImageTensor& img);

// Right/bottom edge replication up to even height and width.
ImageTensor pad_to_even(const ImageTensor& img);
ImageTensor crop(const ImageTensor& img, int height, int width);

// Draws each region's contour (thickened to line_width, growing outward from
// the traced boundary into the bbox) and optionally alpha-blends its pixels.
ImageTensor render_overlay(const ImageTensor& base, std::span<const TamperRegion> regions,
                           const OverlayStyle& style = {});

}  // namespace chartseal
