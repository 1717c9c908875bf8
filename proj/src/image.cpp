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

#include "chartseal/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "chartseal/errors.hpp"

namespace chartseal {

ImageTensor::ImageTensor(int h, int w, int c, double fill)
    : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {
  if (h < 0 || w < 0 || (c != 1 && c != 3)) {
    throw ArgumentError("image shape must have non-negative size and 1 or 3 channels");
  }
}

bool ImageTensor::valid() const {
  if (channels != 1 && channels != 3) return false;
  if (data.size() != static_cast<std::size_t>(height) * width * channels) return false;
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> to_bytes(const ImageTensor& img) {
  std::vector<std::uint8_t> out(img.size());
  std::transform(img.data.begin(), img.data.end(), out.begin(), to_byte);
  return out;
}

ImageTensor from_bytes(const std::uint8_t* px, int h, int w, int c) {
  ImageTensor img(h, w, c);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = px[i] / 255.0;
  return img;
}

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return b.size() >= 8 && std::equal(b.begin(), b.begin() + 8, kSig);
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageTensor decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("png decode failed: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int c = color ? 3 : 1;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("png decode failed: " + msg);
  }
  return from_bytes(px.data(), static_cast<int>(image.height), static_cast<int>(image.width), c);
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

ImageTensor decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> px;
  int h = 0, w = 0, c = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError(std::string("jpeg decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  h = static_cast<int>(cinfo.output_height);
  w = static_cast<int>(cinfo.output_width);
  c = cinfo.output_components;
  px.resize(static_cast<std::size_t>(h) * w * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = px.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * c;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_bytes(px.data(), h, w, c);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3) throw ArgumentError("png needs 1 or 3 channels");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto px = to_bytes(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw FormatError(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw FormatError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_jpeg(const ImageTensor& img, int quality) {
  if (quality < 1 || quality > 100) throw ArgumentError("jpeg quality must be in 1..100");
  if (img.channels != 1 && img.channels != 3) throw ArgumentError("jpeg needs 1 or 3 channels");
  const auto px = to_bytes(img);
  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw FormatError(std::string("jpeg encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(px.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * img.width * img.channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

ImageTensor decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw FormatError("unsupported image format (expected PNG or JPEG)");
}

ImageTensor load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read image: " + path.string());
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_image(const ImageTensor& img, const std::filesystem::path& path, ImageFormat format,
                int jpeg_quality) {
  const auto bytes = format == ImageFormat::kPng ? encode_png(img) : encode_jpeg(img, jpeg_quality);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write image: " + path.string());
}

ImageTensor quantize8(const ImageTensor& img) {
  ImageTensor out = img;
  for (double& v : out.data) v = to_byte(v) / 255.0;
  return out;
}

ImageTensor clamp01(ImageTensor img) {
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

ImageTensor to_rgb(const ImageTensor& img) {
  if (img.channels == 3) return img;
  ImageTensor out(img.height, img.width, 3);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = img.data[i];
  }
  return out;
}

ImageTensor pad_to_even(const ImageTensor& img) {
  const int h = img.height + (img.height % 2);
  const int w = img.width + (img.width % 2);
  if (h == img.height && w == img.width) return img;
  ImageTensor out(h, w, img.channels);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, img.height - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(x, img.width - 1);
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

ImageTensor crop(const ImageTensor& img, int height, int width) {
  if (height > img.height || width > img.width || height < 0 || width < 0) {
    throw ShapeError("crop size exceeds image");
  }
  ImageTensor out(height, width, img.channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, x, c);
    }
  }
  return out;
}

ImageTensor render_overlay(const ImageTensor& base, std::span<const TamperRegion> regions,
                           const OverlayStyle& style) {
  if (style.line_width < 1) throw ArgumentError("overlay line_width must be >= 1");
  if (!(style.fill_alpha >= 0.0 && style.fill_alpha <= 1.0)) {
    throw ArgumentError("overlay fill_alpha must be in [0, 1]");
  }
  for (const auto& r : regions) {
    if (r.bbox.x0 < 0 || r.bbox.y0 < 0 || r.bbox.x1 > base.width || r.bbox.y1 > base.height ||
        r.bbox.x0 >= r.bbox.x1 || r.bbox.y0 >= r.bbox.y1) {
      throw GeometryError("region " + std::to_string(r.id) + " lies outside the image");
    }
  }
  if (regions.empty()) return base;

  ImageTensor out = to_rgb(base);
  const auto& col = style.contour_color;
  if (style.fill_alpha > 0.0) {
    const double a = style.fill_alpha;
    auto blend = [&](int y, int x) {
      for (int c = 0; c < 3; ++c) {
        double& v = out.at(y, x, c);
        v = a == 1.0 ? col[c] : (1.0 - a) * v + a * col[c];
      }
    };
    for (const auto& r : regions) {
      if (r.pixels.empty()) {
        for (int y = r.bbox.y0; y < r.bbox.y1; ++y)
          for (int x = r.bbox.x0; x < r.bbox.x1; ++x) blend(y, x);
      }
      for (const auto& p : r.pixels) blend(p.y, p.x);
    }
  }
  const int reach = style.line_width - 1;
  for (const auto& r : regions) {
    std::vector<Point> outline = r.contour;
    if (outline.empty()) {
      // No traced contour: fall back to the bbox border.
      for (int x = r.bbox.x0; x < r.bbox.x1; ++x) {
        outline.push_back({x, r.bbox.y0});
        outline.push_back({x, r.bbox.y1 - 1});
      }
      for (int y = r.bbox.y0; y < r.bbox.y1; ++y) {
        outline.push_back({r.bbox.x0, y});
        outline.push_back({r.bbox.x1 - 1, y});
      }
    }
    for (const auto& p : outline) {
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int y = p.y + dy, x = p.x + dx;
          if (y < 0 || x < 0 || y >= out.height || x >= out.width) continue;
          for (int c = 0; c < 3; ++c) out.at(y, x, c) = col[c];
        }
      }
    }
  }
  return out;
}

}  // namespace chartseal
