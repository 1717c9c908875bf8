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

#include "chartseal/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "chartseal/errors.hpp"

namespace chartseal {

namespace {

void require_same(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": images differ in shape");
}

double mse(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return a.data.empty() ? 0.0 : s / static_cast<double>(a.data.size());
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
  require_same(a, b, "psnr");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double rmse_map(const ImageTensor& a, const ImageTensor& b) {
  require_same(a, b, "rmse");
  return std::sqrt(mse(a, b));
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
  require_same(a, b, "ssim");
  constexpr int kWin = 8;
  constexpr double c1 = 1e-4, c2 = 9e-4;
  const int wy = a.height / kWin, wx = a.width / kWin;
  if (wy == 0 || wx == 0) throw ShapeError("ssim: image smaller than one 8x8 window");
  constexpr double n = kWin * kWin;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    for (int by = 0; by < wy; ++by) {
      for (int bx = 0; bx < wx; ++bx) {
        double ma = 0.0, mb = 0.0;
        for (int y = by * kWin; y < (by + 1) * kWin; ++y)
          for (int x = bx * kWin; x < (bx + 1) * kWin; ++x) {
            ma += a.at(y, x, c);
            mb += b.at(y, x, c);
          }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int y = by * kWin; y < (by + 1) * kWin; ++y)
          for (int x = bx * kWin; x < (bx + 1) * kWin; ++x) {
            const double da = a.at(y, x, c) - ma, db = b.at(y, x, c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= n;
        vb /= n;
        cov /= n;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    }
  }
  return total / (static_cast<double>(a.channels) * wy * wx);
}

FidelityReport fidelity(const ImageTensor& reference, const ImageTensor& test) {
  return {psnr(reference, test), ssim(reference, test), rmse_map(reference, test), std::nullopt};
}

MaskReport mask_scores(const TamperMask& pred, const TamperMask& truth) {
  if (pred.height != truth.height || pred.width != truth.width || pred.bits.size() != truth.bits.size()) {
    throw ShapeError("mask_scores: masks differ in shape");
  }
  std::size_t p = 0, t = 0, inter = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    const bool a = pred.bits[i] != 0, b = truth.bits[i] != 0;
    p += a;
    t += b;
    inter += a && b;
  }
  MaskReport r;
  const std::size_t uni = p + t - inter;
  r.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  r.f1 = p + t == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(p + t);
  r.noise_percentage = pred.bits.empty() ? 0.0 : static_cast<double>(p) / static_cast<double>(pred.bits.size());
  return r;
}

namespace {
nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? nlohmann::json("inf") : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const FidelityReport& r) {
  return {{"psnr", number_or_null(r.psnr)},
          {"ssim", r.ssim},
          {"rmse", r.rmse},
          {"lpips", r.lpips ? nlohmann::json(*r.lpips) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const MaskReport& r) {
  return {{"iou", r.iou}, {"f1", r.f1}, {"noise_percentage", r.noise_percentage}};
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++s.n;
  }
  if (s.n == 0) {
    s.mean = s.lower = s.upper = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  const double sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(s.n));
  s.lower = s.mean - half;
  s.upper = s.mean + half;
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace chartseal
