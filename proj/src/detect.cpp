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

#include "chartseal/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "chartseal/errors.hpp"

namespace chartseal {

std::size_t TamperMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

void DetectionConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("tau must lie in (0, 1)");
  if (min_area < 0) throw ArgumentError("min_area must be non-negative");
  if (connectivity != 4 && connectivity != 8) throw ArgumentError("connectivity must be 4 or 8");
  if (morphology == Morphology::kOpenClose && morph_radius < 1) {
    throw ArgumentError("morphology radius must be at least 1");
  }
}

TamperMask residual_mask(const LocationMap& original, const ImageTensor& revealed, const DetectionConfig& cfg) {
  return residual_mask(original.realized, revealed, cfg);
}

TamperMask residual_mask(const ImageTensor& original, const ImageTensor& revealed, const DetectionConfig& cfg) {
  cfg.validate();
  if (!original.same_shape(revealed)) throw ShapeError("residual_mask: map and revealed map differ in shape");
  TamperMask m(original.height, original.width);
  for (int y = 0; y < original.height; ++y) {
    for (int x = 0; x < original.width; ++x) {
      double d = 0.0;
      for (int c = 0; c < original.channels; ++c) d = std::max(d, std::abs(original.at(y, x, c) - revealed.at(y, x, c)));
      m.at(y, x) = d >= cfg.tau ? 1 : 0;
    }
  }
  if (cfg.morphology == Morphology::kOpenClose) m = open_close(m, cfg.morph_radius);
  return m;
}

namespace {

// Square window min (erode) or max (dilate); outside pixels count as 0.
TamperMask morph(const TamperMask& in, int r, bool dilate) {
  TamperMask out(in.height, in.width);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      bool any = false, all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          const bool v = yy >= 0 && xx >= 0 && yy < in.height && xx < in.width && in.at(yy, xx);
          any = any || v;
          all = all && v;
        }
      }
      out.at(y, x) = (dilate ? any : all) ? 1 : 0;
    }
  }
  return out;
}

constexpr std::array<Point, 8> kMoore = {{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

// Moore neighbour tracing (clockwise in image coordinates) with Jacob's stopping criterion.
std::vector<Point> trace_contour(const std::vector<int>& labels, int h, int w, int label, Point start) {
  auto inside = [&](Point p) {
    return p.x >= 0 && p.y >= 0 && p.x < w && p.y < h && labels[static_cast<std::size_t>(p.y) * w + p.x] == label;
  };
  std::vector<Point> contour{start};
  // The start pixel is topmost-then-leftmost, so its west neighbour is background.
  int back = 0;  // direction index of the backtrack pixel relative to the current pixel
  Point cur = start;
  const int start_back = back;
  for (std::size_t guard = 0; guard < static_cast<std::size_t>(4) * h * w + 8; ++guard) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const Point n{cur.x + kMoore[static_cast<std::size_t>(d)].x, cur.y + kMoore[static_cast<std::size_t>(d)].y};
      if (inside(n)) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const Point prev_dir = kMoore[static_cast<std::size_t>((found + 7) % 8)];
    const Point backtrack{cur.x + prev_dir.x, cur.y + prev_dir.y};
    cur = {cur.x + kMoore[static_cast<std::size_t>(found)].x, cur.y + kMoore[static_cast<std::size_t>(found)].y};
    // New backtrack direction, expressed relative to the new current pixel.
    const Point rel{backtrack.x - cur.x, backtrack.y - cur.y};
    for (int d = 0; d < 8; ++d) {
      if (kMoore[static_cast<std::size_t>(d)] == rel) back = d;
    }
    if (cur == start && back == start_back) break;
    contour.push_back(cur);
  }
  contour.push_back(start);
  return contour;
}

}  // namespace

TamperMask open_close(const TamperMask& mask, int radius) {
  if (radius < 1) throw ArgumentError("morphology radius must be at least 1");
  TamperMask opened = morph(morph(mask, radius, false), radius, true);
  return morph(morph(opened, radius, true), radius, false);
}

std::vector<TamperRegion> extract_regions(const TamperMask& mask, const DetectionConfig& cfg) {
  cfg.validate();
  if (mask.bits.size() != static_cast<std::size_t>(mask.height) * mask.width) {
    throw ShapeError("extract_regions: mask size does not match its dimensions");
  }
  const int h = mask.height, w = mask.width;
  std::vector<int> labels(mask.bits.size(), -1);
  std::vector<TamperRegion> regions;
  std::vector<Point> stack;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!mask.bits[idx] || labels[idx] >= 0) continue;
      TamperRegion reg;
      reg.id = next;
      reg.bbox = {x, y, x + 1, y + 1};
      labels[idx] = next;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        reg.pixels.push_back(p);
        reg.bbox = {std::min(reg.bbox.x0, p.x), std::min(reg.bbox.y0, p.y), std::max(reg.bbox.x1, p.x + 1),
                    std::max(reg.bbox.y1, p.y + 1)};
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (cfg.connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int xx = p.x + dx, yy = p.y + dy;
            if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
            const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
            if (mask.bits[j] && labels[j] < 0) {
              labels[j] = next;
              stack.push_back({xx, yy});
            }
          }
        }
      }
      reg.area = static_cast<int>(reg.pixels.size());
      std::sort(reg.pixels.begin(), reg.pixels.end(),
                [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      ++next;
      if (reg.area < cfg.min_area) continue;
      // Raster order makes (x, y) the topmost-then-leftmost pixel of the component.
      reg.contour = trace_contour(labels, h, w, reg.id, {x, y});
      regions.push_back(std::move(reg));
    }
  }
  std::stable_sort(regions.begin(), regions.end(),
                   [](const TamperRegion& a, const TamperRegion& b) { return a.area > b.area; });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].id = static_cast<int>(i);
  return regions;
}

Detection detect_pipeline(const InnModel& model, const LocationMap& map, const ImageTensor& suspect,
                          const DetectionConfig& cfg) {
  cfg.validate();
  if (suspect.height % 2 != 0 || suspect.width % 2 != 0) {
    throw ShapeError("detect: image dimensions must be even");
  }
  if (suspect.height != map.realized.height || suspect.width != map.realized.width) {
    throw ShapeError("detect: image and location map differ in size");
  }
  Detection out;
  out.revealed_map = reveal(model, suspect).map;
  out.mask = residual_mask(map, out.revealed_map, cfg);
  out.regions = extract_regions(out.mask, cfg);
  out.overlay = render_overlay(suspect, out.regions);
  return out;
}

ImageTensor mask_to_image(const TamperMask& mask) {
  ImageTensor img(mask.height, mask.width, 1);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 1.0 : 0.0;
  return img;
}

TamperMask image_to_mask(const ImageTensor& img) {
  TamperMask m(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m.at(y, x) = img.at(y, x, 0) >= 0.5 ? 1 : 0;
  return m;
}

void save_mask(const TamperMask& mask, const std::filesystem::path& path) { save_image(mask_to_image(mask), path); }

nlohmann::json regions_to_json(const std::vector<TamperRegion>& regions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regions) {
    nlohmann::json contour = nlohmann::json::array();
    for (const auto& p : r.contour) contour.push_back({p.x, p.y});
    nlohmann::json j{{"id", r.id},
                     {"bbox", {r.bbox.x0, r.bbox.y0, r.bbox.x1, r.bbox.y1}},
                     {"area", r.area},
                     {"contour", contour}};
    if (r.component_label) j["component"] = component_name(*r.component_label);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace chartseal
