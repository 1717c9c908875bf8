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

#include "chartseal/chartgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "chartseal/errors.hpp"

namespace chartseal {

namespace {

constexpr Rgb kWhite{1.0, 1.0, 1.0};
constexpr Rgb kAxis{0.0, 0.0, 0.0};
constexpr Rgb kText{0.2, 0.2, 0.2};
constexpr Rgb kGrid{0.88, 0.88, 0.88};
constexpr Rgb kLegendBorder{0.6, 0.6, 0.6};
constexpr Rgb kAnnotation{0.9, 0.1, 0.1};
constexpr Rgb kLogo{0.1, 0.2, 0.55};

const std::array<Rgb, 6> kPalette = {{
    {0.12, 0.47, 0.71},
    {1.00, 0.50, 0.05},
    {0.17, 0.63, 0.17},
    {0.84, 0.15, 0.16},
    {0.58, 0.40, 0.74},
    {0.55, 0.34, 0.29},
}};

// 3x5 digit glyphs, one row per 3-bit mask (MSB = left column).
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 2, 2, 2}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Canvas {
 public:
  explicit Canvas(ImageTensor& img) : img_(img) {}

  void set(int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
    for (int k = 0; k < 3; ++k) img_.at(y, x, k) = c[static_cast<std::size_t>(k)];
  }
  Rgb get(int x, int y) const {
    return {img_.at(y, x, 0), img_.at(y, x, 1), img_.at(y, x, 2)};
  }
  void fill(const BBox& r, const Rgb& c) {
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) set(x, y, c);
  }
  void frame(const BBox& r, const Rgb& c) {
    for (int x = r.x0; x < r.x1; ++x) {
      set(x, r.y0, c);
      set(x, r.y1 - 1, c);
    }
    for (int y = r.y0; y < r.y1; ++y) {
      set(r.x0, y, c);
      set(r.x1 - 1, y, c);
    }
  }
  // Bresenham with a square brush.
  void line(Point a, Point b, const Rgb& c, int thickness = 1) {
    const int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    const int lo = -(thickness - 1) / 2, hi = thickness / 2;
    for (;;) {
      for (int oy = lo; oy <= hi; ++oy)
        for (int ox = lo; ox <= hi; ++ox) set(a.x + ox, a.y + oy, c);
      if (a.x == b.x && a.y == b.y) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        a.x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        a.y += sy;
      }
    }
  }
  void disc(Point c, int r, const Rgb& col) {
    for (int y = c.y - r; y <= c.y + r; ++y)
      for (int x = c.x - r; x <= c.x + r; ++x)
        if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= r * r) set(x, y, col);
  }
  // Draws a non-negative integer with its top-left corner at (x, y).
  BBox number(int value, int x, int y, const Rgb& c) {
    const std::string s = std::to_string(value);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& g = kDigits[static_cast<std::size_t>(s[i] - '0')];
      const int gx = x + static_cast<int>(i) * 4;
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if ((g[static_cast<std::size_t>(row)] >> (2 - col)) & 1) set(gx + col, y + row, c);
    }
    return {x, y, x + number_width(value), y + 5};
  }
  static int number_width(int value) {
    return static_cast<int>(std::to_string(value).size()) * 4 - 1;
  }

 private:
  ImageTensor& img_;
};

bool same_color(const Rgb& a, const Rgb& b, double tol = 0.02) {
  return std::abs(a[0] - b[0]) <= tol && std::abs(a[1] - b[1]) <= tol && std::abs(a[2] - b[2]) <= tol;
}

void require_inside(const BBox& r, const ImageTensor& img, const char* what) {
  if (r.x0 < 0 || r.y0 < 0 || r.x1 > img.width || r.y1 > img.height || r.x0 >= r.x1 || r.y0 >= r.y1) {
    throw GeometryError(std::string(what) + " lies outside the canvas");
  }
}

void require_inside(Point p, const ImageTensor& img, const char* what) {
  if (p.x < 0 || p.y < 0 || p.x >= img.width || p.y >= img.height) {
    throw GeometryError(std::string(what) + " lies outside the canvas");
  }
}

}  // namespace

void ChartSpec::validate() const {
  if (series.empty()) throw ArgumentError("chart needs at least one series");
  if (height < 48 || width < 48 || height % 2 != 0 || width % 2 != 0) {
    throw ArgumentError("chart size must be even and at least 48x48");
  }
  const std::size_t n = series.front().values.size();
  if (n == 0) throw ArgumentError("chart series has no values");
  for (const auto& s : series) {
    if (s.values.size() != n) throw ArgumentError("chart series differ in length");
    for (double v : s.values) {
      if (!std::isfinite(v) || v < 0.0) throw ArgumentError("chart values must be finite and non-negative");
    }
  }
  if (palette.size() < series.size()) throw ArgumentError("palette has fewer colors than series");
}

RenderedChart render_chart_with_layout(const ChartSpec& spec) {
  spec.validate();
  const int H = spec.height, W = spec.width;
  RenderedChart out{ImageTensor(H, W, 3, 1.0), {}};
  Canvas cv(out.image);
  ChartLayout& lay = out.layout;
  const int ns = static_cast<int>(spec.series.size());
  const int nc = static_cast<int>(spec.series.front().values.size());

  const int left = std::max(10, static_cast<int>(std::lround(0.16 * W)));
  const int bottom = std::max(9, static_cast<int>(std::lround(0.14 * H)));
  const int top = std::max(4, static_cast<int>(std::lround(0.08 * H)));
  const int legend_w = std::max(14, static_cast<int>(std::lround(0.22 * W)));
  lay.plot = {left, top, W - legend_w - 2, H - bottom};
  const BBox& plot = lay.plot;
  if (plot.width() < 2 * nc + 4 || plot.height() < 16) throw ArgumentError("chart too small for its data");

  double vmax = 0.0;
  for (const auto& s : spec.series) vmax = std::max(vmax, *std::max_element(s.values.begin(), s.values.end()));
  const int axis_max = std::max(2, static_cast<int>(std::ceil(vmax / 2.0)) * 2);
  const int inner_h = plot.height() - 2;  // rows strictly above the x axis
  auto value_y = [&](double v) {
    return plot.y1 - 2 - static_cast<int>(std::lround(v / axis_max * (inner_h - 1)));
  };

  // Light horizontal grid, style chosen by seed.
  const bool grid = (splitmix64(spec.seed) & 1) != 0;
  const std::array<int, 3> ticks = {0, axis_max / 2, axis_max};
  if (grid) {
    for (int t : ticks) {
      if (t == 0) continue;
      const int y = value_y(t);
      for (int x = plot.x0 + 1; x < plot.x1; ++x) cv.set(x, y, kGrid);
    }
  }

  lay.series_colors.assign(spec.palette.begin(), spec.palette.begin() + ns);
  lay.marks.assign(static_cast<std::size_t>(ns), {});
  const double group = static_cast<double>(plot.width() - 2) / nc;
  for (int c = 0; c < nc; ++c) {
    const int gx0 = plot.x0 + 2 + static_cast<int>(std::floor(c * group));
    const int gx1 = plot.x0 + 2 + static_cast<int>(std::floor((c + 1) * group));
    const int center = (gx0 + gx1) / 2;
    for (int s = 0; s < ns; ++s) {
      const auto& color = spec.palette[static_cast<std::size_t>(s)];
      const double v = spec.series[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(c)];
      const int y = value_y(v);
      BBox mark;
      if (spec.kind == ChartKind::kBar) {
        const int usable = std::max(ns, static_cast<int>(std::floor((gx1 - gx0) * 0.75)));
        const int bw = std::max(1, usable / ns);
        const int bx0 = center - (bw * ns) / 2 + s * bw;
        mark = {bx0, y, bx0 + bw, plot.y1 - 1};
        if (mark.y0 >= mark.y1) mark.y0 = mark.y1 - 1;
        cv.fill(mark, color);
      } else {
        mark = {center - 1, y - 1, center + 2, y + 2};
        mark.y0 = std::max(mark.y0, plot.y0);
        mark.y1 = std::min(mark.y1, plot.y1 - 1);
      }
      lay.marks[static_cast<std::size_t>(s)].push_back(mark);
    }
  }
  if (spec.kind != ChartKind::kBar) {
    for (int s = 0; s < ns; ++s) {
      const auto& color = spec.palette[static_cast<std::size_t>(s)];
      const auto& ms = lay.marks[static_cast<std::size_t>(s)];
      if (spec.kind == ChartKind::kLine) {
        for (std::size_t i = 1; i < ms.size(); ++i) {
          cv.line({(ms[i - 1].x0 + ms[i - 1].x1) / 2, (ms[i - 1].y0 + ms[i - 1].y1) / 2},
                  {(ms[i].x0 + ms[i].x1) / 2, (ms[i].y0 + ms[i].y1) / 2}, color);
        }
      }
      for (const auto& m : ms) cv.fill(m, color);
    }
  }

  // Axes and tick labels.
  for (int y = plot.y0; y < plot.y1; ++y) cv.set(plot.x0, y, kAxis);
  for (int x = plot.x0; x < plot.x1; ++x) cv.set(x, plot.y1 - 1, kAxis);
  for (int t : ticks) {
    const int y = value_y(t);
    cv.set(plot.x0 - 1, y, kAxis);
    const int lw = Canvas::number_width(t);
    const int ly = std::clamp(y - 2, 0, H - 5);
    lay.y_tick_labels.push_back(cv.number(t, plot.x0 - 3 - lw, ly, kText));
  }
  for (int c = 0; c < nc; ++c) {
    const int gx0 = plot.x0 + 2 + static_cast<int>(std::floor(c * group));
    const int gx1 = plot.x0 + 2 + static_cast<int>(std::floor((c + 1) * group));
    const int label = (c + 1) % 10;
    const int lx = (gx0 + gx1) / 2 - 1;
    lay.x_tick_labels.push_back(cv.number(label, lx, plot.y1 + 1, kText));
  }

  if (spec.data_labels && spec.kind == ChartKind::kBar) {
    for (int s = 0; s < ns; ++s) {
      for (int c = 0; c < nc; ++c) {
        const auto& bar = lay.marks[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
        const int v = static_cast<int>(std::lround(
            spec.series[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(c)]));
        const int lw = Canvas::number_width(v);
        const int lx = (bar.x0 + bar.x1) / 2 - lw / 2;
        const int ly = std::max(plot.y0, bar.y0 - 6);
        lay.data_labels.push_back(cv.number(v, lx, ly, kText));
      }
    }
  }

  // Legend: bordered box, a swatch and a text stub per series.
  const int lx0 = W - legend_w, lx1 = W - 2;
  lay.legend = {lx0, top, lx1, top + 3 + 6 * ns};
  cv.frame(lay.legend, kLegendBorder);
  for (int s = 0; s < ns; ++s) {
    const int sy = top + 2 + 6 * s;
    const BBox sw{lx0 + 2, sy, lx0 + 6, sy + 4};
    cv.fill(sw, spec.palette[static_cast<std::size_t>(s)]);
    lay.legend_swatches.push_back(sw);
    for (int x = lx0 + 8; x < lx1 - 2; ++x) cv.set(x, sy + 2, kText);
  }
  return out;
}

ImageTensor render_chart(const ChartSpec& spec) { return render_chart_with_layout(spec).image; }

ChartSpec random_chart_spec(std::uint64_t seed, int height, int width) {
  std::mt19937_64 rng(splitmix64(seed));
  ChartSpec spec;
  spec.seed = seed;
  spec.height = height;
  spec.width = width;
  spec.kind = static_cast<ChartKind>(std::uniform_int_distribution<int>(0, 2)(rng));
  const int ns = std::uniform_int_distribution<int>(1, 3)(rng);
  const int nc = std::uniform_int_distribution<int>(3, 6)(rng) / (spec.kind == ChartKind::kBar && ns > 1 ? 2 : 1) + 1;
  spec.data_labels = spec.kind == ChartKind::kBar && ns == 1 && std::bernoulli_distribution(0.5)(rng);
  std::uniform_real_distribution<double> value(1.0, spec.data_labels ? 8.0 : 9.5);
  std::vector<std::size_t> colors(kPalette.size());
  for (std::size_t i = 0; i < colors.size(); ++i) colors[i] = i;
  std::shuffle(colors.begin(), colors.end(), rng);
  for (int s = 0; s < ns; ++s) {
    Series ser;
    ser.label = "series " + std::to_string(s + 1);
    for (int c = 0; c < nc; ++c) ser.values.push_back(std::round(value(rng) * 10.0) / 10.0);
    spec.series.push_back(std::move(ser));
    spec.palette.push_back(kPalette[colors[static_cast<std::size_t>(s)]]);
  }
  return spec;
}

// ---------------------------------------------------------------------------

std::string_view tamper_kind_name(TamperKind k) {
  switch (k) {
    case TamperKind::kPaintCircle: return "paint_circle";
    case TamperKind::kPaintRect: return "paint_rect";
    case TamperKind::kPaintLine: return "paint_line";
    case TamperKind::kCopyRegion: return "copy_region";
    case TamperKind::kDeleteRegion: return "delete_region";
    case TamperKind::kRecolorRegion: return "recolor_region";
  }
  return "unknown";
}

std::optional<TamperKind> parse_tamper_kind(std::string_view s) {
  for (auto k : {TamperKind::kPaintCircle, TamperKind::kPaintRect, TamperKind::kPaintLine,
                 TamperKind::kCopyRegion, TamperKind::kDeleteRegion, TamperKind::kRecolorRegion}) {
    if (tamper_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

TamperMask pixel_difference(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw ShapeError("pixel_difference: shape mismatch");
  TamperMask m(a.height, a.width);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < a.channels; ++c) {
        if (a.at(y, x, c) != b.at(y, x, c)) {
          m.at(y, x) = 1;
          break;
        }
      }
    }
  }
  return m;
}

TamperResult apply_tamper(const ImageTensor& img, const std::vector<TamperOp>& ops) {
  if (img.channels != 3) throw ArgumentError("tampering expects an RGB image");
  ImageTensor out = img;
  Canvas cv(out);
  for (const auto& op : ops) {
    switch (op.kind) {
      case TamperKind::kPaintRect:
        require_inside(op.rect, out, "paint_rect");
        cv.fill(op.rect, op.color);
        break;
      case TamperKind::kDeleteRegion:
        require_inside(op.rect, out, "delete_region");
        cv.fill(op.rect, kWhite);
        break;
      case TamperKind::kPaintCircle: {
        require_inside(op.from, out, "paint_circle center");
        if (op.radius < 0) throw GeometryError("paint_circle radius is negative");
        require_inside(BBox{op.from.x - op.radius, op.from.y - op.radius, op.from.x + op.radius + 1,
                            op.from.y + op.radius + 1},
                       out, "paint_circle");
        cv.disc(op.from, op.radius, op.color);
        break;
      }
      case TamperKind::kPaintLine:
        require_inside(op.from, out, "paint_line start");
        require_inside(op.to, out, "paint_line end");
        if (op.thickness < 1) throw GeometryError("paint_line thickness must be >= 1");
        cv.line(op.from, op.to, op.color, op.thickness);
        break;
      case TamperKind::kCopyRegion: {
        require_inside(op.rect, out, "copy_region destination");
        const BBox src{op.rect.x0 + op.source_offset.x, op.rect.y0 + op.source_offset.y,
                       op.rect.x1 + op.source_offset.x, op.rect.y1 + op.source_offset.y};
        require_inside(src, out, "copy_region source");
        const ImageTensor snapshot = out;
        for (int y = op.rect.y0; y < op.rect.y1; ++y)
          for (int x = op.rect.x0; x < op.rect.x1; ++x)
            for (int c = 0; c < 3; ++c)
              out.at(y, x, c) = snapshot.at(y + op.source_offset.y, x + op.source_offset.x, c);
        break;
      }
      case TamperKind::kRecolorRegion: {
        require_inside(op.rect, out, "recolor_region");
        // Every non-background, non-gray pixel in the rect takes the new color.
        for (int y = op.rect.y0; y < op.rect.y1; ++y) {
          for (int x = op.rect.x0; x < op.rect.x1; ++x) {
            const Rgb p = cv.get(x, y);
            const double spread = std::max({p[0], p[1], p[2]}) - std::min({p[0], p[1], p[2]});
            if (spread > 0.1) cv.set(x, y, op.color);
          }
        }
        break;
      }
    }
  }
  return {out, pixel_difference(img, out)};
}

// ---------------------------------------------------------------------------

std::set<TamperKind> kinds_for_method(TamperMethod method) {
  switch (method) {
    case TamperMethod::kMDV: return {TamperKind::kPaintRect};
    case TamperMethod::kARD: return {TamperKind::kDeleteRegion, TamperKind::kCopyRegion};
    case TamperMethod::kMCV: return {TamperKind::kCopyRegion};
    case TamperMethod::kDAA: return {TamperKind::kPaintLine};
    case TamperMethod::kML: return {TamperKind::kRecolorRegion};
    case TamperMethod::kHL: return {TamperKind::kDeleteRegion};
    case TamperMethod::kARL: return {TamperKind::kPaintCircle};
    case TamperMethod::kDVD: return {TamperKind::kPaintRect};
    case TamperMethod::kMC: return {TamperKind::kRecolorRegion};
    case TamperMethod::kOthers: return {};
  }
  return {};
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Index of a mark in the flattened [series][category] order.
std::pair<std::size_t, std::size_t> pick_mark(const ChartLayout& lay, std::mt19937_64& rng) {
  const std::size_t s = std::uniform_int_distribution<std::size_t>(0, lay.marks.size() - 1)(rng);
  const std::size_t c = std::uniform_int_distribution<std::size_t>(0, lay.marks[s].size() - 1)(rng);
  return {s, c};
}

Rgb other_color(const Rgb& avoid, std::mt19937_64& rng) {
  std::vector<Rgb> options;
  for (const auto& c : kPalette)
    if (!same_color(c, avoid)) options.push_back(c);
  return pick(options, rng);
}

bool is_bar_chart(const RenderedChart& chart) {
  // Bars reach the x axis; markers do not.
  const auto& m = chart.layout.marks.front().front();
  return m.y1 == chart.layout.plot.y1 - 1 && m.height() > 3;
}

}  // namespace

std::optional<TamperOp> make_tamper_op(const RenderedChart& chart, TamperMethod method,
                                       std::mt19937_64& rng) {
  const ChartLayout& lay = chart.layout;
  const bool bars = is_bar_chart(chart);
  const bool labels = !lay.data_labels.empty();
  TamperOp op;
  op.method = method;
  switch (method) {
    case TamperMethod::kMDV: {
      if (!bars || labels) return std::nullopt;
      const auto [s, c] = pick_mark(lay, rng);
      const BBox bar = lay.marks[s][c];
      op.kind = TamperKind::kPaintRect;
      op.component = ComponentLabel::kRegion;
      const int grow = uniform(rng, 3, 8);
      const int top = std::max(lay.plot.y0 + 1, bar.y0 - grow);
      if (top < bar.y0 && std::bernoulli_distribution(0.6)(rng)) {
        op.rect = {bar.x0, top, bar.x1, bar.y0};
        op.color = lay.series_colors[s];
        op.intent = "Inflate the value of category " + std::to_string(c + 1) + " to overstate its performance.";
      } else {
        if (bar.height() < 4) return std::nullopt;
        op.rect = {bar.x0, bar.y0, bar.x1, bar.y0 + std::min(grow, bar.height() - 2)};
        op.color = kWhite;
        op.intent = "Shrink the value of category " + std::to_string(c + 1) + " to downplay it.";
      }
      return op;
    }
    case TamperMethod::kDVD: {
      if (!bars || !labels) return std::nullopt;
      const auto [s, c] = pick_mark(lay, rng);
      const BBox bar = lay.marks[s][c];
      if (bar.height() < 6) return std::nullopt;
      op.kind = TamperKind::kPaintRect;
      op.component = ComponentLabel::kRegion;
      op.rect = {bar.x0, bar.y0, bar.x1, bar.y0 + uniform(rng, 3, std::min(10, bar.height() - 2))};
      op.color = kWhite;
      op.intent = "Make the bar of category " + std::to_string(c + 1) +
                  " look smaller than its printed value to mislead at a glance.";
      return op;
    }
    case TamperMethod::kARD: {
      const auto [s, c] = pick_mark(lay, rng);
      const BBox mark = lay.marks[s][c];
      op.component = ComponentLabel::kRegion;
      if (!bars && std::bernoulli_distribution(0.5)(rng)) {
        // Duplicate a marker at a new height in the same column.
        const int shift = uniform(rng, 4, 10) * (std::bernoulli_distribution(0.5)(rng) ? 1 : -1);
        const BBox dst{mark.x0, mark.y0 + shift, mark.x1, mark.y1 + shift};
        if (dst.y0 < lay.plot.y0 || dst.y1 > lay.plot.y1 - 1) return std::nullopt;
        op.kind = TamperKind::kCopyRegion;
        op.rect = dst;
        op.source_offset = {0, -shift};
        op.intent = "Add a fabricated data point to suggest a trend that is not in the data.";
      } else {
        op.kind = TamperKind::kDeleteRegion;
        op.rect = mark;
        op.intent = "Remove the data point for category " + std::to_string(c + 1) +
                    " to hide an inconvenient value.";
      }
      return op;
    }
    case TamperMethod::kMCV: {
      if (lay.y_tick_labels.size() < 2) return std::nullopt;
      const std::size_t a = std::uniform_int_distribution<std::size_t>(0, lay.y_tick_labels.size() - 1)(rng);
      std::size_t b = std::uniform_int_distribution<std::size_t>(0, lay.y_tick_labels.size() - 2)(rng);
      if (b >= a) ++b;
      // Right-aligned labels: copy a fixed-width block ending at the tick.
      const BBox& dst_label = lay.y_tick_labels[a];
      const BBox& src_label = lay.y_tick_labels[b];
      const int x1 = dst_label.x1;
      const int x0 = std::max(0, x1 - 7);
      op.kind = TamperKind::kCopyRegion;
      op.component = ComponentLabel::kAxis;
      op.rect = {x0, dst_label.y0, x1, dst_label.y1};
      op.source_offset = {src_label.x1 - x1, src_label.y0 - dst_label.y0};
      op.intent = "Relabel the value axis so that differences between data points look larger.";
      return op;
    }
    case TamperMethod::kDAA: {
      const BBox& p = lay.plot;
      op.kind = TamperKind::kPaintLine;
      op.component = ComponentLabel::kAnnotation;
      op.from = {uniform(rng, p.x0 + 2, (p.x0 + p.x1) / 2), uniform(rng, p.y0 + 1, p.y1 - 3)};
      op.to = {uniform(rng, (p.x0 + p.x1) / 2, p.x1 - 2), uniform(rng, p.y0 + 1, p.y1 - 3)};
      op.thickness = uniform(rng, 1, 2);
      op.color = kAnnotation;
      op.intent = "Draw a guide line that suggests a trend the data does not support.";
      return op;
    }
    case TamperMethod::kML: {
      const std::size_t s = std::uniform_int_distribution<std::size_t>(0, lay.legend_swatches.size() - 1)(rng);
      op.kind = TamperKind::kRecolorRegion;
      op.component = ComponentLabel::kLegend;
      op.rect = lay.legend_swatches[s];
      op.color = other_color(lay.series_colors[s], rng);
      op.intent = "Swap the legend color so viewers attribute the series to the wrong category.";
      return op;
    }
    case TamperMethod::kHL: {
      op.kind = TamperKind::kDeleteRegion;
      if (labels) {
        op.component = ComponentLabel::kDataLabels;
        op.rect = pick(lay.data_labels, rng);
        op.intent = "Hide a data label so the exact value cannot be checked.";
      } else {
        op.component = ComponentLabel::kAxis;
        op.rect = pick(lay.x_tick_labels, rng);
        op.intent = "Hide an axis label to obscure which category the data refers to.";
      }
      return op;
    }
    case TamperMethod::kARL: {
      const int r = uniform(rng, 2, 4);
      const int H = chart.image.height, W = chart.image.width;
      op.kind = TamperKind::kPaintCircle;
      op.component = ComponentLabel::kLogo;
      op.radius = r;
      op.from = {uniform(rng, W - lay.plot.y0 - 2 * r, W - r - 2), uniform(rng, H - 2 * r - 6, H - r - 2)};
      op.from.x = std::clamp(op.from.x, r, W - r - 1);
      op.from.y = std::clamp(op.from.y, r, H - r - 1);
      op.color = kLogo;
      op.intent = "Stamp a logo so the chart appears to come from a trusted source.";
      return op;
    }
    case TamperMethod::kMC: {
      const auto [s, c] = pick_mark(lay, rng);
      op.kind = TamperKind::kRecolorRegion;
      op.component = ComponentLabel::kRegion;
      op.rect = lay.marks[s][c];
      op.color = other_color(lay.series_colors[s], rng);
      op.intent = "Recolor a data mark so it reads as part of a different group.";
      return op;
    }
    case TamperMethod::kOthers:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<CorpusItem> gen_corpus(const CorpusOptions& opts) {
  if (opts.count <= 0) throw ArgumentError("corpus size must be positive");
  if (opts.ops_per_item < 0 || opts.ops_per_item > 3) throw ArgumentError("ops_per_item must be in 0..3");
  std::vector<TamperMethod> methods;
  for (auto m : kAllMethods) {
    for (auto k : kinds_for_method(m)) {
      if (opts.kinds.count(k) != 0) {
        methods.push_back(m);
        break;
      }
    }
  }
  if (methods.empty()) throw ArgumentError("no tamper method is available for the requested kinds");

  std::vector<CorpusItem> items;
  for (int i = 0; i < opts.count; ++i) {
    std::mt19937_64 rng(splitmix64(opts.seed * 1000003ULL + static_cast<std::uint64_t>(i)));
    CorpusItem item;
    item.index = i;
    // Methods are drawn first so every label is equally likely; charts that
    // cannot host a drawn method are re-rolled.
    std::vector<TamperMethod> wanted;
    for (int k = 0; k < opts.ops_per_item; ++k) wanted.push_back(pick(methods, rng));
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200) throw ArgumentError("could not build a tampered chart with the requested kinds");
      item.spec = random_chart_spec(rng(), opts.height, opts.width);
      const RenderedChart chart = render_chart_with_layout(item.spec);
      item.clean = chart.image;
      item.ops.clear();
      ImageTensor current = chart.image;
      for (const TamperMethod m : wanted) {
        for (int k = 0; k < 20; ++k) {
          auto op = make_tamper_op(chart, m, rng);
          if (!op || opts.kinds.count(op->kind) == 0) continue;
          auto next = apply_tamper(current, {*op});
          if (next.truth_mask.count() == 0) continue;
          current = std::move(next.tampered);
          item.ops.push_back(std::move(*op));
          break;
        }
      }
      if (item.ops.size() == wanted.size()) {
        item.tampered = std::move(current);
        item.truth_mask = pixel_difference(item.clean, item.tampered);
        break;
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

// ---------------------------------------------------------------------------

namespace {
nlohmann::json rgb_json(const Rgb& c) { return nlohmann::json::array({c[0], c[1], c[2]}); }
Rgb rgb_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
nlohmann::json box_json(const BBox& b) { return nlohmann::json::array({b.x0, b.y0, b.x1, b.y1}); }
BBox box_from(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}
}  // namespace

nlohmann::json to_json(const TamperOp& op) {
  nlohmann::json j;
  j["kind"] = tamper_kind_name(op.kind);
  switch (op.kind) {
    case TamperKind::kPaintCircle:
      j["center"] = {op.from.x, op.from.y};
      j["radius"] = op.radius;
      j["color"] = rgb_json(op.color);
      break;
    case TamperKind::kPaintLine:
      j["from"] = {op.from.x, op.from.y};
      j["to"] = {op.to.x, op.to.y};
      j["thickness"] = op.thickness;
      j["color"] = rgb_json(op.color);
      break;
    case TamperKind::kCopyRegion:
      j["rect"] = box_json(op.rect);
      j["source_offset"] = {op.source_offset.x, op.source_offset.y};
      break;
    case TamperKind::kPaintRect:
    case TamperKind::kRecolorRegion:
      j["rect"] = box_json(op.rect);
      j["color"] = rgb_json(op.color);
      break;
    case TamperKind::kDeleteRegion:
      j["rect"] = box_json(op.rect);
      break;
  }
  j["method"] = method_abbrev(op.method);
  j["method_name"] = method_name(op.method);
  j["component"] = component_name(op.component);
  j["intent"] = op.intent;
  return j;
}

TamperOp tamper_op_from_json(const nlohmann::json& j) {
  TamperOp op;
  const auto kind = parse_tamper_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown tamper kind " + j.at("kind").dump());
  op.kind = *kind;
  if (j.contains("rect")) op.rect = box_from(j.at("rect"));
  if (j.contains("center")) op.from = {j.at("center").at(0).get<int>(), j.at("center").at(1).get<int>()};
  if (j.contains("from")) op.from = {j.at("from").at(0).get<int>(), j.at("from").at(1).get<int>()};
  if (j.contains("to")) op.to = {j.at("to").at(0).get<int>(), j.at("to").at(1).get<int>()};
  op.radius = j.value("radius", 0);
  op.thickness = j.value("thickness", 1);
  if (j.contains("source_offset")) {
    op.source_offset = {j.at("source_offset").at(0).get<int>(), j.at("source_offset").at(1).get<int>()};
  }
  if (j.contains("color")) op.color = rgb_from(j.at("color"));
  if (j.contains("method")) {
    const auto m = parse_method(j.at("method").get<std::string>());
    if (!m) throw FormatError("unknown tamper method " + j.at("method").dump());
    op.method = *m;
  }
  if (j.contains("component")) {
    const auto c = parse_component(j.at("component").get<std::string>());
    if (!c) throw FormatError("unknown component " + j.at("component").dump());
    op.component = *c;
  }
  op.intent = j.value("intent", "");
  return op;
}

nlohmann::json to_json(const ChartSpec& spec) {
  static constexpr const char* kKinds[] = {"bar", "line", "scatter"};
  nlohmann::json j;
  j["kind"] = kKinds[static_cast<int>(spec.kind)];
  j["height"] = spec.height;
  j["width"] = spec.width;
  j["seed"] = spec.seed;
  j["data_labels"] = spec.data_labels;
  j["series"] = nlohmann::json::array();
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    j["series"].push_back({{"label", spec.series[s].label},
                           {"values", spec.series[s].values},
                           {"color", rgb_json(spec.palette[s])}});
  }
  return j;
}

ChartSpec chart_spec_from_json(const nlohmann::json& j) {
  ChartSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "bar") spec.kind = ChartKind::kBar;
  else if (kind == "line") spec.kind = ChartKind::kLine;
  else if (kind == "scatter") spec.kind = ChartKind::kScatter;
  else throw FormatError("unknown chart kind " + kind);
  spec.height = j.at("height").get<int>();
  spec.width = j.at("width").get<int>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.data_labels = j.value("data_labels", false);
  for (const auto& s : j.at("series")) {
    spec.series.push_back({s.at("label").get<std::string>(), s.at("values").get<std::vector<double>>()});
    spec.palette.push_back(rgb_from(s.at("color")));
  }
  return spec;
}

std::string item_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

nlohmann::json corpus_manifest(const std::vector<CorpusItem>& items) {
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& item : items) {
    const std::string stem = item_stem(item.index);
    nlohmann::json j;
    j["id"] = item.index;
    j["clean"] = "clean/" + stem + ".png";
    j["tampered"] = "tampered/" + stem + ".png";
    j["mask"] = "mask/" + stem + ".png";
    j["chart"] = to_json(item.spec);
    j["ops"] = nlohmann::json::array();
    for (const auto& op : item.ops) j["ops"].push_back(to_json(op));
    manifest.push_back(std::move(j));
  }
  return manifest;
}

void write_corpus(const std::filesystem::path& root, const std::vector<CorpusItem>& items) {
  for (const char* sub : {"clean", "tampered", "mask"}) std::filesystem::create_directories(root / sub);
  for (const auto& item : items) {
    const std::string file = item_stem(item.index) + ".png";
    save_image(item.clean, root / "clean" / file);
    save_image(item.tampered, root / "tampered" / file);
    ImageTensor mask(item.truth_mask.height, item.truth_mask.width, 1);
    for (std::size_t i = 0; i < item.truth_mask.bits.size(); ++i) mask.data[i] = item.truth_mask.bits[i];
    save_image(mask, root / "mask" / file);
  }
  std::ofstream out(root / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + root.string());
  out << corpus_manifest(items).dump(2) << '\n';
}

nlohmann::json read_manifest(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("corpus manifest not found: " + (root / "manifest.json").string());
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw FormatError("corpus manifest must be a JSON array");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corpus manifest is not valid JSON: ") + e.what());
  }
}

}  // namespace chartseal
