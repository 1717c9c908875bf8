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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "chartseal/image.hpp"
#include "chartseal/region.hpp"
#include "chartseal/taxonomy.hpp"

namespace chartseal {

struct MappingRule {
  ComponentLabel component = ComponentLabel::kRegion;
  std::vector<TamperMethod> primary_methods;
  std::vector<TamperMethod> secondary_methods;
};

MappingRule rule_lookup(ComponentLabel component);
// method is in primary or secondary for component.
bool rule_reaches(ComponentLabel component, TamperMethod method);

struct RefinedRegion {
  std::string tampered_region;
  std::vector<ComponentLabel> tampered_component;
  std::string reason;
};

struct IntentEntry {
  std::string tampered_region;
  TamperMethod method = TamperMethod::kOthers;
  std::string tamper;
  std::string intent;
  // Set by analyze when the method is not reachable from the region's
  // components under rule_lookup.
  bool non_conformant = false;
};

struct IntentReport {
  std::vector<IntentEntry> entries;
};

nlohmann::json refinement_to_json(std::span<const RefinedRegion> regions);
nlohmann::json to_json(const IntentReport& report);

std::string build_refinement_prompt(std::string_view image_ref);
// Throws ArgumentError when refined is empty.
std::string build_intent_prompt(std::string_view image_ref, std::span<const RefinedRegion> refined);

enum class ResponseSchema { kRefinement, kIntent };
using ParsedResponse = std::variant<std::vector<RefinedRegion>, IntentReport>;

// First fenced ```json block of a response. ParseError when none.
std::string extract_json_block(std::string_view response);

// ParseError: no block or malformed JSON. ValidationError: schema violation,
// with the offending field path (e.g. "tampered_regions[0].tampered_component[1]").
ParsedResponse parse_and_validate(std::string_view response, ResponseSchema schema);
std::vector<RefinedRegion> parse_refinement(std::string_view response);
IntentReport parse_intent(std::string_view response);

// ---------------------------------------------------------------------------
// Backends

struct MllmRequest {
  std::string prompt;
  std::vector<std::vector<std::uint8_t>> png_images;
  // Identifier substituted for the image placeholder in the prompt.
  std::string image_ref;
};

class MllmBackend {
 public:
  virtual ~MllmBackend() = default;
  // Returns the model's raw text. Throws TransportError on failure.
  virtual std::string complete(const MllmRequest& request) = 0;
};

struct HttpBackendConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;     // forwarded as "model" when non-empty
  std::string token_env = "CHARTSEAL_API_TOKEN";
  double timeout_seconds = 60.0;
  int retries = 3;
  double backoff_seconds = 1.0;  // doubled after each failed attempt
  int max_in_flight = 4;
};

// POSTs {"model", "prompt", "images": [{"mime_type", "data"}]} as JSON with a
// bearer token from the environment. Accepts a plain-text body, {"text": ...},
// or a chat-completions style {"choices": [{"message": {"content": ...}}]}.
class HttpBackend final : public MllmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  std::string complete(const MllmRequest& request) override;

  static nlohmann::json request_body(const MllmRequest& request, const std::string& model);
  static std::string response_text(const std::string& body);

 private:
  HttpBackendConfig cfg_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Answers from a corpus manifest: the request's image_ref must be the stem
// of a manifest item (see item_stem).
class TruthMockBackend final : public MllmBackend {
 public:
  explicit TruthMockBackend(nlohmann::json manifest);
  std::string complete(const MllmRequest& request) override;
  int calls() const { return calls_; }

 private:
  nlohmann::json manifest_;
  int calls_ = 0;
};

// Locates green outlines in the overlay, labels them by position
// (bottom 15% -> axis, right 20% -> legend, else region) and answers with the
// first primary method of each component.
class GeometricMockBackend final : public MllmBackend {
 public:
  std::string complete(const MllmRequest& request) override;
  int calls() const { return calls_; }

 private:
  int calls_ = 0;
};

// Wraps a fixed sequence of responses (mostly for tests); repeats the last.
class ScriptedBackend final : public MllmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const MllmRequest& request) override;
  const std::vector<MllmRequest>& requests() const { return requests_; }

 private:
  std::vector<std::string> responses_;
  std::vector<MllmRequest> requests_;
};

struct AnalyzeConfig {
  std::string image_ref = "suspect.png";
  OverlayStyle overlay;
};

struct AnalysisResult {
  std::vector<RefinedRegion> refined;
  IntentReport report;
};

// overlay -> refinement prompt -> backend -> parse -> intent prompt -> backend
// -> parse, one re-ask per stage on a malformed reply. Empty regions make no
// backend calls.
AnalysisResult analyze(MllmBackend& backend, const ImageTensor& suspect,
                       std::span<const TamperRegion> regions, const AnalyzeConfig& cfg = {});

}  // namespace chartseal
