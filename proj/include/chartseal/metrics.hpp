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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartseal/image.hpp"
#include "chartseal/region.hpp"

namespace chartseal {

// Identical inputs give +infinity; it is never capped to a finite value.
double psnr(const ImageTensor& a, const ImageTensor& b);

// Mean SSIM over non-overlapping 8x8 windows and all channels. Rows and
// columns past the last full window are ignored.
double ssim(const ImageTensor& a, const ImageTensor& b);

double rmse_map(const ImageTensor& a, const ImageTensor& b);

struct FidelityReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double rmse = 0.0;
  std::optional<double> lpips;  // not computed; kept so reports carry all three columns
};

FidelityReport fidelity(const ImageTensor& reference, const ImageTensor& test);

struct MaskReport {
  double iou = 0.0;
  double f1 = 0.0;
  double noise_percentage = 0.0;  // fraction of predicted bits, in [0, 1]
};

// Both masks empty: iou = f1 = 1.
MaskReport mask_scores(const TamperMask& pred, const TamperMask& truth);

nlohmann::json to_json(const FidelityReport& r);
nlohmann::json to_json(const MaskReport& r);

struct Summary {
  double mean = 0.0;
  double lower = 0.0;  // 95% normal-approximation interval
  double upper = 0.0;
  std::size_t n = 0;
};

// Non-finite samples are skipped.
Summary summarize(const std::vector<double>& values);

// Fixed-precision number formatting for reports ("inf" for +infinity).
std::string format_number(double v);

}  // namespace chartseal
