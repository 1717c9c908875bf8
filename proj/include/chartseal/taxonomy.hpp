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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace chartseal {

// Chart components a tampered region can be attributed to.
enum class ComponentLabel {
  kAxis,
  kDataLabels,
  kLegend,
  kColormap,
  kRegion,
  kLogo,
  kAnnotation,
};

inline constexpr std::array<ComponentLabel, 7> kAllComponents = {
    ComponentLabel::kAxis,     ComponentLabel::kDataLabels,
    ComponentLabel::kLegend,   ComponentLabel::kColormap,
    ComponentLabel::kRegion,   ComponentLabel::kLogo,
    ComponentLabel::kAnnotation,
};

// The nine tampering types plus a catch-all.
enum class TamperMethod {
  kMDV,  // modifying data point values
  kARD,  // adding or removing data points
  kMCV,  // modifying coordinate values
  kDAA,  // deceptive auxiliary annotations
  kML,   // modifying the legend
  kHL,   // hiding labels
  kARL,  // adding or removing logos
  kDVD,  // data-visual disproportion
  kMC,   // modifying the colormap
  kOthers,
};

inline constexpr std::array<TamperMethod, 10> kAllMethods = {
    TamperMethod::kMDV, TamperMethod::kARD, TamperMethod::kMCV,
    TamperMethod::kDAA, TamperMethod::kML,  TamperMethod::kHL,
    TamperMethod::kARL, TamperMethod::kDVD, TamperMethod::kMC,
    TamperMethod::kOthers,
};

// Lower-case name used in prompts and JSON, e.g. "data labels".
std::string_view component_name(ComponentLabel c);
// Case-insensitive; surrounding whitespace ignored.
std::optional<ComponentLabel> parse_component(std::string_view s);

// Display name, e.g. "Modifying the legend".
std::string_view method_name(TamperMethod m);
// Abbreviation, e.g. "ML".
std::string_view method_abbrev(TamperMethod m);
// Accepts the display name or the abbreviation, case-insensitively.
std::optional<TamperMethod> parse_method(std::string_view s);

}  // namespace chartseal
