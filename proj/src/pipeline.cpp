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

#include "chartseal/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "chartseal/degrade.hpp"
#include "chartseal/errors.hpp"

namespace chartseal {

ImageTensor protect(const InnModel& model, const ImageTensor& cover, const MapPattern& pattern) {
  const ImageTensor padded = pad_to_even(cover);
  const LocationMap map = make_location_map(pattern, padded.height, padded.width, padded.channels);
  return quantize8(crop(embed(model, padded, map), cover.height, cover.width));
}

Detection detect(const InnModel& model, const MapPattern& pattern, const ImageTensor& suspect,
                 const DetectionConfig& cfg) {
  cfg.validate();
  const ImageTensor padded = pad_to_even(suspect);
  const LocationMap map = make_location_map(pattern, padded.height, padded.width, padded.channels);
  Detection d = detect_pipeline(model, map, padded, cfg);
  if (padded.height == suspect.height && padded.width == suspect.width) return d;
  TamperMask cropped(suspect.height, suspect.width);
  for (int y = 0; y < suspect.height; ++y)
    for (int x = 0; x < suspect.width; ++x) cropped.at(y, x) = d.mask.at(y, x);
  d.mask = std::move(cropped);
  d.regions = extract_regions(d.mask, cfg);
  d.overlay = render_overlay(suspect, d.regions);
  d.revealed_map = crop(d.revealed_map, suspect.height, suspect.width);
  return d;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::clamp(jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EvaluationResult evaluate(const InnModel& model, const MapPattern& pattern, const std::vector<CorpusItem>& items,
                          const EvaluationOptions& opts) {
  if (items.empty()) throw ArgumentError("evaluation corpus is empty");
  opts.detection.validate();
  EvaluationResult result;
  result.rows.resize(items.size());
  auto channel = [&](const ImageTensor& img) {
    if (!opts.jpeg_quality) return img;
    return apply(Degradation{JpegCompression{*opts.jpeg_quality}, 0}, img);
  };
  parallel_for(static_cast<int>(items.size()), opts.jobs, [&](int i) {
    const CorpusItem& item = items[static_cast<std::size_t>(i)];
    EvaluationRow& row = result.rows[static_cast<std::size_t>(i)];
    row.item = item.index;
    for (const auto& op : item.ops) {
      if (!row.methods.empty()) row.methods += '+';
      row.methods += method_abbrev(op.method);
    }
    const ImageTensor prot = protect(model, item.clean, pattern);
    row.fidelity = fidelity(item.clean, prot);

    const Detection clean = detect(model, pattern, channel(prot), opts.detection);
    row.noise_percentage = mask_scores(clean.mask, TamperMask(clean.mask.height, clean.mask.width)).noise_percentage;
    const ImageTensor padded_map =
        realize_location_map(pattern, prot.height + prot.height % 2, prot.width + prot.width % 2, prot.channels);
    row.rmse = rmse_map(crop(padded_map, prot.height, prot.width), clean.revealed_map);

    if (!item.ops.empty()) {
      const TamperResult t = apply_tamper(prot, item.ops);
      const Detection d = detect(model, pattern, channel(t.tampered), opts.detection);
      row.tampered = mask_scores(d.mask, t.truth_mask);
    }
  });
  for (const auto& r : result.rows) result.any_tampered = result.any_tampered || r.tampered.has_value();
  return result;
}

std::string evaluation_csv(const EvaluationResult& result) {
  std::ostringstream out;
  const bool t = result.any_tampered;
  out << "item,methods,noise_percentage,rmse" << (t ? ",iou,f1" : "") << '\n';
  std::vector<double> noise, rmse, iou, f1;
  for (const auto& r : result.rows) {
    out << item_stem(r.item) << ',' << r.methods << ',' << format_number(r.noise_percentage) << ','
        << format_number(r.rmse);
    noise.push_back(r.noise_percentage);
    rmse.push_back(r.rmse);
    if (t) {
      if (r.tampered) {
        out << ',' << format_number(r.tampered->iou) << ',' << format_number(r.tampered->f1);
        iou.push_back(r.tampered->iou);
        f1.push_back(r.tampered->f1);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
  const Summary sn = summarize(noise), sr = summarize(rmse), si = summarize(iou), sf = summarize(f1);
  auto line = [&](const char* name, double Summary::*field) {
    out << name << ",," << format_number(sn.*field) << ',' << format_number(sr.*field);
    if (t) out << ',' << format_number(si.*field) << ',' << format_number(sf.*field);
    out << '\n';
  };
  line("mean", &Summary::mean);
  line("ci95_lower", &Summary::lower);
  line("ci95_upper", &Summary::upper);
  return out.str();
}

nlohmann::json evaluation_json(const EvaluationResult& result) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json j{{"item", item_stem(r.item)},
                     {"methods", r.methods},
                     {"fidelity", to_json(r.fidelity)},
                     {"noise_percentage", r.noise_percentage},
                     {"rmse", r.rmse}};
    if (r.tampered) j["tampered"] = to_json(*r.tampered);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<CorpusItem> read_corpus(const std::filesystem::path& root) {
  const nlohmann::json manifest = read_manifest(root);
  std::vector<CorpusItem> items;
  try {
    for (const auto& e : manifest) {
      CorpusItem item;
      item.index = e.at("id").get<int>();
      item.spec = chart_spec_from_json(e.at("chart"));
      item.clean = to_rgb(load_image(root / e.at("clean").get<std::string>()));
      item.tampered = to_rgb(load_image(root / e.at("tampered").get<std::string>()));
      for (const auto& o : e.at("ops")) item.ops.push_back(tamper_op_from_json(o));
      item.truth_mask = pixel_difference(item.clean, item.tampered);
      items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("corpus manifest entry is malformed: ") + ex.what());
  }
  return items;
}

}  // namespace chartseal
