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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartseal/image.hpp"
#include "chartseal/region.hpp"
#include "chartseal/taxonomy.hpp"

namespace chartseal {

enum class ChartKind { kBar, kLine, kScatter };

struct Series {
  std::string label;
  std::vector<double> values;
};

struct ChartSpec {
  ChartKind kind = ChartKind::kBar;
  std::vector<Series> series;
  std::vector<Rgb> palette;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
  // Print each bar's value above it (bar charts only).
  bool data_labels = false;

  void validate() const;
};

// Pixel geometry of everything drawn, so tampering can target components.
struct ChartLayout {
  BBox plot;
  BBox legend;                            // empty when there is no legend
  std::vector<BBox> legend_swatches;      // one per series
  std::vector<BBox> y_tick_labels;
  std::vector<BBox> x_tick_labels;
  std::vector<std::vector<BBox>> marks;   // [series][category]: bars or point markers
  std::vector<BBox> data_labels;          // bar value labels, row-major [series][category]
  std::vector<Rgb> series_colors;
};

struct RenderedChart {
  ImageTensor image;
  ChartLayout layout;
};

// Deterministic rasterization on a white background.
ImageTensor render_chart(const ChartSpec& spec);
RenderedChart render_chart_with_layout(const ChartSpec& spec);

// A random but valid spec: 1-3 series, 3-6 categories.
ChartSpec random_chart_spec(std::uint64_t seed, int height = 64, int width = 64);

enum class TamperKind {
  kPaintCircle,
  kPaintRect,
  kPaintLine,
  kCopyRegion,
  kDeleteRegion,
  kRecolorRegion,
};

std::string_view tamper_kind_name(TamperKind k);
std::optional<TamperKind> parse_tamper_kind(std::string_view s);

struct TamperOp {
  TamperKind kind = TamperKind::kPaintRect;
  // paint_rect / copy_region (destination) / delete_region / recolor_region.
  BBox rect;
  // paint_line endpoints; paint_circle uses `from` as the center.
  Point from;
  Point to;
  int radius = 0;      // paint_circle
  int thickness = 1;   // paint_line
  // copy_region reads from rect shifted by this offset.
  Point source_offset;
  Rgb color{0.0, 0.0, 0.0};
  TamperMethod method = TamperMethod::kOthers;
  ComponentLabel component = ComponentLabel::kRegion;
  std::string intent;
};

struct TamperResult {
  ImageTensor tampered;
  TamperMask truth_mask;
};

// Applies ops in order. The mask is the exact set of pixels that changed.
TamperResult apply_tamper(const ImageTensor& img, const std::vector<TamperOp>& ops);
TamperMask pixel_difference(const ImageTensor& a, const ImageTensor& b);

struct CorpusItem {
  int index = 0;
  ChartSpec spec;
  ImageTensor clean;
  ImageTensor tampered;
  TamperMask truth_mask;
  std::vector<TamperOp> ops;
};

struct CorpusOptions {
  int count = 0;
  std::set<TamperKind> kinds = {TamperKind::kPaintCircle,  TamperKind::kPaintRect,
                                TamperKind::kPaintLine,    TamperKind::kCopyRegion,
                                TamperKind::kDeleteRegion, TamperKind::kRecolorRegion};
  int ops_per_item = 1;
  std::uint64_t seed = 0;
  int height = 64;
  int width = 64;
};

std::vector<CorpusItem> gen_corpus(const CorpusOptions& opts);

// Builds one op of the given method against a rendered chart; nullopt when the
// chart has nothing suitable (e.g. data labels on a line chart).
std::optional<TamperOp> make_tamper_op(const RenderedChart& chart, TamperMethod method,
                                       std::mt19937_64& rng);
// Kind a method's op uses for a given chart.
std::set<TamperKind> kinds_for_method(TamperMethod method);

nlohmann::json to_json(const TamperOp& op);
TamperOp tamper_op_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChartSpec& spec);
ChartSpec chart_spec_from_json(const nlohmann::json& j);

// <root>/{clean,tampered,mask}/NNNN.png plus manifest.json.
nlohmann::json corpus_manifest(const std::vector<CorpusItem>& items);
void write_corpus(const std::filesystem::path& root, const std::vector<CorpusItem>& items);
nlohmann::json read_manifest(const std::filesystem::path& root);

std::string item_stem(int index);

}  // namespace chartseal
