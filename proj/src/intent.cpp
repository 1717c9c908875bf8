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

#include "chartseal/intent.hpp"

#include <algorithm>
#include <map>

#include "chartseal/chartgen.hpp"
#include "chartseal/errors.hpp"

namespace chartseal {

MappingRule rule_lookup(ComponentLabel component) {
  using M = TamperMethod;
  switch (component) {
    case ComponentLabel::kRegion: return {component, {M::kMDV, M::kARD, M::kDVD}, {M::kMC}};
    case ComponentLabel::kDataLabels: return {component, {M::kMDV, M::kHL}, {M::kARD, M::kDVD}};
    case ComponentLabel::kAxis: return {component, {M::kMCV}, {M::kHL}};
    case ComponentLabel::kLegend: return {component, {M::kML}, {}};
    case ComponentLabel::kAnnotation: return {component, {M::kDAA}, {}};
    case ComponentLabel::kLogo: return {component, {M::kARL}, {}};
    case ComponentLabel::kColormap: return {component, {M::kMC}, {}};
  }
  return {component, {}, {}};
}

bool rule_reaches(ComponentLabel component, TamperMethod method) {
  const MappingRule r = rule_lookup(component);
  return std::find(r.primary_methods.begin(), r.primary_methods.end(), method) != r.primary_methods.end() ||
         std::find(r.secondary_methods.begin(), r.secondary_methods.end(), method) != r.secondary_methods.end();
}

nlohmann::json refinement_to_json(std::span<const RefinedRegion> regions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regions) {
    nlohmann::json comps = nlohmann::json::array();
    for (auto c : r.tampered_component) comps.push_back(component_name(c));
    arr.push_back({{"tampered_region", r.tampered_region}, {"tampered_component", comps}, {"reason", r.reason}});
  }
  return {{"tampered_regions", arr}};
}

nlohmann::json to_json(const IntentReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json j{{"tampered_region", e.tampered_region},
                     {"method", method_name(e.method)},
                     {"tamper", e.tamper},
                     {"intent", e.intent}};
    if (e.non_conformant) j["non_conformant"] = true;
    arr.push_back(std::move(j));
  }
  return {{"tampering_intents", arr}};
}

// ---------------------------------------------------------------------------
// Parsing

std::string extract_json_block(std::string_view response) {
  std::size_t open = response.find("```json");
  std::size_t body = std::string_view::npos;
  if (open != std::string_view::npos) {
    body = open + 7;
  } else if ((open = response.find("```")) != std::string_view::npos) {
    body = open + 3;
  }
  if (body == std::string_view::npos) throw ParseError("response has no fenced JSON block");
  // Accept the ''' closer used by the prompt's own example as well as ```.
  std::size_t close = response.find("```", body);
  const std::size_t alt = response.find("'''", body);
  if (alt != std::string_view::npos && (close == std::string_view::npos || alt < close)) close = alt;
  if (close == std::string_view::npos) throw ParseError("fenced JSON block is not closed");
  return std::string(response.substr(body, close - body));
}

namespace {

nlohmann::json parse_block(std::string_view response) {
  const std::string block = extract_json_block(response);
  try {
    return nlohmann::json::parse(block);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fenced block is not valid JSON: ") + e.what());
  }
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw ValidationError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

const nlohmann::json& require_array(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_array()) throw ValidationError(path.empty() ? key : path + "." + key, "expected an array");
  return v;
}

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

}  // namespace

std::vector<RefinedRegion> parse_refinement(std::string_view response) {
  const nlohmann::json doc = parse_block(response);
  const auto& arr = require_array(doc, "tampered_regions", "");
  std::vector<RefinedRegion> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = index_path("tampered_regions", i);
    RefinedRegion r;
    r.tampered_region = require_string(arr[i], "tampered_region", path);
    const auto& comps = require_array(arr[i], "tampered_component", path);
    if (comps.empty()) throw ValidationError(path + ".tampered_component", "at least one component is required");
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const std::string cpath = index_path(path + ".tampered_component", k);
      if (!comps[k].is_string()) throw ValidationError(cpath, "expected a string");
      const auto c = parse_component(comps[k].get<std::string>());
      if (!c) throw ValidationError(cpath, "unknown component '" + comps[k].get<std::string>() + "'");
      r.tampered_component.push_back(*c);
    }
    r.reason = require_string(arr[i], "reason", path);
    out.push_back(std::move(r));
  }
  return out;
}

IntentReport parse_intent(std::string_view response) {
  const nlohmann::json doc = parse_block(response);
  const auto& arr = require_array(doc, "tampering_intents", "");
  IntentReport report;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = index_path("tampering_intents", i);
    IntentEntry e;
    e.tampered_region = require_string(arr[i], "tampered_region", path);
    const std::string method = require_string(arr[i], "method", path);
    const auto m = parse_method(method);
    if (!m) throw ValidationError(path + ".method", "unknown method '" + method + "'");
    e.method = *m;
    e.tamper = require_string(arr[i], "tamper", path);
    e.intent = require_string(arr[i], "intent", path);
    report.entries.push_back(std::move(e));
  }
  return report;
}

ParsedResponse parse_and_validate(std::string_view response, ResponseSchema schema) {
  if (schema == ResponseSchema::kRefinement) return parse_refinement(response);
  return parse_intent(response);
}

// ---------------------------------------------------------------------------
// Mock backends

namespace {

std::string fenced(const nlohmann::json& j) { return "```json\n" + j.dump(2) + "\n```\n"; }

bool is_intent_prompt(const std::string& prompt) { return prompt.find("\"tampering_intents\"") != std::string::npos; }

std::string describe_box(const BBox& b) {
  return "area from (" + std::to_string(b.x0) + ", " + std::to_string(b.y0) + ") to (" + std::to_string(b.x1) +
         ", " + std::to_string(b.y1) + ")";
}

BBox op_box(const TamperOp& op) {
  switch (op.kind) {
    case TamperKind::kPaintCircle:
      return {op.from.x - op.radius, op.from.y - op.radius, op.from.x + op.radius + 1, op.from.y + op.radius + 1};
    case TamperKind::kPaintLine:
      return {std::min(op.from.x, op.to.x), std::min(op.from.y, op.to.y), std::max(op.from.x, op.to.x) + 1,
              std::max(op.from.y, op.to.y) + 1};
    default:
      return op.rect;
  }
}

std::string describe_op(const TamperOp& op) {
  return std::string(tamper_kind_name(op.kind)) + " over the " + describe_box(op_box(op)) + ".";
}

}  // namespace

TruthMockBackend::TruthMockBackend(nlohmann::json manifest) : manifest_(std::move(manifest)) {
  if (!manifest_.is_array()) throw ArgumentError("truth mock needs a manifest array");
}

std::string TruthMockBackend::complete(const MllmRequest& request) {
  ++calls_;
  const nlohmann::json* item = nullptr;
  for (const auto& entry : manifest_) {
    const std::string stem = item_stem(entry.at("id").get<int>());
    if (request.image_ref == stem || request.image_ref.find(stem + ".") != std::string::npos) {
      item = &entry;
      break;
    }
  }
  if (item == nullptr) throw TransportError("truth mock has no manifest entry for '" + request.image_ref + "'");
  std::vector<TamperOp> ops;
  for (const auto& o : item->at("ops")) ops.push_back(tamper_op_from_json(o));

  if (!is_intent_prompt(request.prompt)) {
    std::vector<RefinedRegion> refined;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      refined.push_back({"edit " + std::to_string(i + 1) + ": " + describe_box(op_box(ops[i])),
                         {ops[i].component},
                         "recorded in the corpus manifest"});
    }
    return fenced(refinement_to_json(refined));
  }
  IntentReport report;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    report.entries.push_back({"edit " + std::to_string(i + 1) + ": " + describe_box(op_box(ops[i])), ops[i].method,
                              describe_op(ops[i]), ops[i].intent, false});
  }
  return fenced(to_json(report));
}

std::string GeometricMockBackend::complete(const MllmRequest& request) {
  ++calls_;
  if (!is_intent_prompt(request.prompt)) {
    if (request.png_images.empty()) throw TransportError("geometric mock needs the overlay image");
    const ImageTensor img = to_rgb(decode_image(request.png_images.front()));
    TamperMask green(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        green.at(y, x) = img.at(y, x, 0) < 0.1 && img.at(y, x, 1) > 0.9 && img.at(y, x, 2) < 0.1;
    // Outlines are traced as 8-connected blobs; each blob is one region.
    std::vector<RefinedRegion> refined;
    std::vector<int> seen(green.bits.size(), 0);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (!green.at(y, x) || seen[static_cast<std::size_t>(y) * img.width + x]) continue;
        BBox b{x, y, x + 1, y + 1};
        std::vector<Point> stack{{x, y}};
        seen[static_cast<std::size_t>(y) * img.width + x] = 1;
        while (!stack.empty()) {
          const Point p = stack.back();
          stack.pop_back();
          b = {std::min(b.x0, p.x), std::min(b.y0, p.y), std::max(b.x1, p.x + 1), std::max(b.y1, p.y + 1)};
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = p.x + dx, yy = p.y + dy;
              if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) continue;
              const std::size_t j = static_cast<std::size_t>(yy) * img.width + xx;
              if (green.bits[j] && !seen[j]) {
                seen[j] = 1;
                stack.push_back({xx, yy});
              }
            }
        }
        const double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
        ComponentLabel c = ComponentLabel::kRegion;
        if (cy >= 0.85 * img.height) {
          c = ComponentLabel::kAxis;
        } else if (cx >= 0.8 * img.width) {
          c = ComponentLabel::kLegend;
        }
        refined.push_back({"outlined " + describe_box(b), {c}, "green outline located by position"});
      }
    }
    return fenced(refinement_to_json(refined));
  }
  // The intent prompt carries the refined regions as its first JSON block.
  const auto refined = parse_refinement(request.prompt);
  IntentReport report;
  for (const auto& r : refined) {
    const MappingRule rule = rule_lookup(r.tampered_component.front());
    const TamperMethod m = rule.primary_methods.front();
    report.entries.push_back({r.tampered_region, m,
                              std::string(method_name(m)) + " in the " + r.tampered_region + ".",
                              "Change how the chart is read at this location.", false});
  }
  return fenced(to_json(report));
}

std::string ScriptedBackend::complete(const MllmRequest& request) {
  requests_.push_back(request);
  if (responses_.empty()) throw TransportError("scripted backend has no responses");
  const std::size_t i = std::min(requests_.size(), responses_.size()) - 1;
  return responses_[i];
}

// ---------------------------------------------------------------------------

namespace {

ParsedResponse ask(MllmBackend& backend, MllmRequest req, ResponseSchema schema) {
  std::string error;
  try {
    return parse_and_validate(backend.complete(req), schema);
  } catch (const ParseError& e) {
    error = e.what();
  } catch (const ValidationError& e) {
    error = e.what();
  }
  req.prompt += "\n\nYour previous reply could not be used (" + error +
                "). Reply again with only the JSON block in the required format.";
  try {
    return parse_and_validate(backend.complete(req), schema);
  } catch (const ParseError& e) {
    throw AnalysisError(std::string("backend reply still malformed after a re-ask: ") + e.what());
  } catch (const ValidationError& e) {
    throw AnalysisError(std::string("backend reply still malformed after a re-ask: ") + e.what());
  }
}

}  // namespace

AnalysisResult analyze(MllmBackend& backend, const ImageTensor& suspect, std::span<const TamperRegion> regions,
                       const AnalyzeConfig& cfg) {
  AnalysisResult result;
  if (regions.empty()) return result;
  const ImageTensor overlay = render_overlay(suspect, regions, cfg.overlay);
  MllmRequest req;
  req.png_images.push_back(encode_png(quantize8(overlay)));
  req.image_ref = cfg.image_ref;

  req.prompt = build_refinement_prompt(cfg.image_ref);
  result.refined = std::get<std::vector<RefinedRegion>>(ask(backend, req, ResponseSchema::kRefinement));
  if (result.refined.empty()) return result;

  req.prompt = build_intent_prompt(cfg.image_ref, result.refined);
  result.report = std::get<IntentReport>(ask(backend, req, ResponseSchema::kIntent));

  for (std::size_t i = 0; i < result.report.entries.size(); ++i) {
    auto& e = result.report.entries[i];
    const RefinedRegion* match = nullptr;
    for (const auto& r : result.refined) {
      if (r.tampered_region == e.tampered_region) {
        match = &r;
        break;
      }
    }
    if (match == nullptr && i < result.refined.size()) match = &result.refined[i];
    bool ok = false;
    if (match != nullptr) {
      for (auto c : match->tampered_component) ok = ok || rule_reaches(c, e.method);
    }
    e.non_conformant = !ok;
  }
  return result;
}

}  // namespace chartseal
