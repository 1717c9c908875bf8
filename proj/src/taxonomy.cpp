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

#include "chartseal/taxonomy.hpp"

#include <algorithm>
#include <cctype>

namespace chartseal {

namespace {

std::string fold(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view component_name(ComponentLabel c) {
  switch (c) {
    case ComponentLabel::kAxis: return "axis";
    case ComponentLabel::kDataLabels: return "data labels";
    case ComponentLabel::kLegend: return "legend";
    case ComponentLabel::kColormap: return "colormap";
    case ComponentLabel::kRegion: return "region";
    case ComponentLabel::kLogo: return "logo";
    case ComponentLabel::kAnnotation: return "annotation";
  }
  return "";
}

std::optional<ComponentLabel> parse_component(std::string_view s) {
  const std::string key = fold(s);
  for (auto c : kAllComponents) {
    if (key == component_name(c)) return c;
  }
  if (key == "datalabels" || key == "data_labels" || key == "data label") return ComponentLabel::kDataLabels;
  return std::nullopt;
}

std::string_view method_name(TamperMethod m) {
  switch (m) {
    case TamperMethod::kMDV: return "Modifying data point values";
    case TamperMethod::kARD: return "Adding or removing data points";
    case TamperMethod::kMCV: return "Modifying coordinate values";
    case TamperMethod::kDAA: return "Deceptive auxiliary annotations";
    case TamperMethod::kML: return "Modifying the legend";
    case TamperMethod::kHL: return "Hiding labels";
    case TamperMethod::kARL: return "Adding or removing logos";
    case TamperMethod::kDVD: return "Data-visual disproportion";
    case TamperMethod::kMC: return "Modifying the colormap";
    case TamperMethod::kOthers: return "Others";
  }
  return "";
}

std::string_view method_abbrev(TamperMethod m) {
  switch (m) {
    case TamperMethod::kMDV: return "MDV";
    case TamperMethod::kARD: return "ARD";
    case TamperMethod::kMCV: return "MCV";
    case TamperMethod::kDAA: return "DAA";
    case TamperMethod::kML: return "ML";
    case TamperMethod::kHL: return "HL";
    case TamperMethod::kARL: return "ARL";
    case TamperMethod::kDVD: return "DVD";
    case TamperMethod::kMC: return "MC";
    case TamperMethod::kOthers: return "Others";
  }
  return "";
}

std::optional<TamperMethod> parse_method(std::string_view s) {
  const std::string key = fold(s);
  for (auto m : kAllMethods) {
    if (key == fold(method_name(m)) || key == fold(method_abbrev(m))) return m;
  }
  return std::nullopt;
}

}  // namespace chartseal
