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

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "chartseal/image.hpp"
#include "chartseal/inn.hpp"
#include "chartseal/region.hpp"

namespace chartseal {

enum class Morphology { kNone, kOpenClose };

struct DetectionConfig {
  double tau = 0.2;
  int min_area = 16;
  int connectivity = 8;  // 4 or 8
  Morphology morphology = Morphology::kNone;
  int morph_radius = 1;

  void validate() const;
};

// Bit set where the largest per-channel |original - revealed| reaches tau.
TamperMask residual_mask(const LocationMap& original, const ImageTensor& revealed,
                         const DetectionConfig& cfg = {});
TamperMask residual_mask(const ImageTensor& original, const ImageTensor& revealed,
                         const DetectionConfig& cfg = {});

// Square-structuring-element opening followed by closing.
TamperMask open_close(const TamperMask& mask, int radius);

std::vector<TamperRegion> extract_regions(const TamperMask& mask, const DetectionConfig& cfg = {});

struct Detection {
  TamperMask mask;
  std::vector<TamperRegion> regions;
  ImageTensor overlay;
  ImageTensor revealed_map;
};

Detection detect_pipeline(const InnModel& model, const LocationMap& map, const ImageTensor& suspect,
                          const DetectionConfig& cfg = {});

ImageTensor mask_to_image(const TamperMask& mask);
TamperMask image_to_mask(const ImageTensor& img);
void save_mask(const TamperMask& mask, const std::filesystem::path& path);

nlohmann::json regions_to_json(const std::vector<TamperRegion>& regions);

}  // namespace chartseal
