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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartseal/chartgen.hpp"
#include "chartseal/detect.hpp"
#include "chartseal/inn.hpp"
#include "chartseal/metrics.hpp"

namespace chartseal {

// Embeds the map into a cover of any size: odd edges are replicated before
// embedding and cropped afterwards. The result is quantized to 8 bits, which
// is what a saved PNG holds.
ImageTensor protect(const InnModel& model, const ImageTensor& cover, const MapPattern& pattern);

// detect_pipeline for any size. Odd inputs are padded, the mask is cropped back
// and regions are extracted from the cropped mask.
Detection detect(const InnModel& model, const MapPattern& pattern, const ImageTensor& suspect,
                 const DetectionConfig& cfg = {});

struct EvaluationOptions {
  DetectionConfig detection;
  std::optional<int> jpeg_quality;  // JPEG applied after any tampering
  int jobs = 1;
};

struct EvaluationRow {
  int item = 0;
  std::string methods;  // abbreviations joined by '+', empty when untampered
  FidelityReport fidelity;
  double noise_percentage = 0.0;
  double rmse = 0.0;
  std::optional<MaskReport> tampered;  // absent for untampered items
};

struct EvaluationResult {
  std::vector<EvaluationRow> rows;
  bool any_tampered = false;
};

// protect -> (replay ops) -> (jpeg) -> detect for every item.
EvaluationResult evaluate(const InnModel& model, const MapPattern& pattern,
                          const std::vector<CorpusItem>& items, const EvaluationOptions& opts = {});

// Per-item rows, then mean and 95% interval rows. The iou and f1 columns are
// left out when no item was tampered.
std::string evaluation_csv(const EvaluationResult& result);
nlohmann::json evaluation_json(const EvaluationResult& result);

// Items as written by write_corpus.
std::vector<CorpusItem> read_corpus(const std::filesystem::path& root);

// Runs fn(i) for i in [0, n) on up to jobs threads. The first exception is
// rethrown after all workers stop.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace chartseal
