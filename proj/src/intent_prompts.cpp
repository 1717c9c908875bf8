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

#include <initializer_list>
#include <string>
#include <utility>

#include "chartseal/errors.hpp"
#include "chartseal/intent.hpp"

namespace chartseal {

namespace {

constexpr std::string_view kImagePlaceholder = "{chart_img_path}";
constexpr std::string_view kRegionsPlaceholder = "{tampered_region_json_path}";

// Prompt texts are kept word for word, including their original slips
// (the duplicated clause, "Prmopt", the ''' closing fence).
constexpr std::string_view kRefinementTemplate = R"(**Task Context**
---
You are an expert in computer vision. Given a tampered chart image, and we have detected the tampered areas and marked them with green lines.
You should provide the refined tampered regions and components as output, considering the principles provided.
The components to consider are:
    - `axis`
    - `data labels`
    - `legend`
    - `colormap`
    - `region`
    - `logo`
    - `annotation`

**Data Input**
---
`Tampered Visualization Image with Visual Prmopt:` {chart_img_path}

**Chain-of-Thought**
---
Your reasoning should retain only confirmed information. Here is a potential checklist for inferring the tampering area:
1. Analyze the overall information conveyed by the visualization.
2. Identify the areas surrounded by green lines, which indicate potential tampering regions.
3. Filter out noise from the highlighted areas and determine where meaningful tampering has actually occurred.
3. Determine the tampering regions and corresponding components.

**Principles**
---
To filter out noise, you may refer to the three principles:

- **Area Analysis**: Prioritize highlighting sufficiently large areas and filter out minor areas along the background or edges that are likely noise. When you find a very small highlighted area on a relatively large color block, shape, or text, it is highly likely to be noise.

- **Shape Analysis**: For highlighted visual elements, focus on regular shapes (e.g., rectangles or circles) to detect potential tampering and disregard irregular shapes that suggest noise.

- **Edge Analysis**: Except for text modifications, the highlighted tampered areas should have smooth edges and fully cover the manipulated regions.

**Output Format**
---
Return the output in this strict format:
```json
{
  "tampered_regions": [
    {
      "tampered_region": "<tampered region>",
      "tampered_component": ["<tampered component 1>", "<tampered component 2>", ...]
      "reason": "reason for tampered region"
    },
    ...
  ]
}
'''
)";

constexpr std::string_view kIntentTemplate = R"(**Task Context**
---
You are an expert in visual analytics. Given the refined tampered regions identified from a tampered visualization image, you need to interpret and analyze the tampering intent behind these regions.
You should provide a detailed analysis of the tampering intent, including the types of manipulations and their potential misleading effects.

**Data Input**
---
`Tampered Visualization Image with Visual Prompt:` {chart_img_path}
`Textual Prompt of Tampered Region:` {tampered_region_json_path}

**Component-to-Method Mapping Rules**
---
For a given tampering_component, you must For a given `tampering_component`, you must evaluate the Primary Methods first. Only if none of the primary methods accurately describe the manipulation should you consider the Secondary Methods.

- If `tampering_component` is **"region"**:
    - **Primary Methods:** `Modifying data point values`, `Adding or removing data points`, `Data-visual disproportion`
    - **Secondary Methods:** `Modifying the colormap`
- If `tampering_component` is **"data labels"**:
    - **Primary Methods:** `Modifying data point values`, `Hiding labels`
    - **Secondary Methods:** `Adding or removing data points`, `Data-visual disproportion`
- If `tampering_component` is **"axis"**:
    - **Primary Methods:** `Modifying coordinate values`
    - **Secondary Methods:** `Hiding labels`
- If `tampering_component` is **"legend"**:
    - **Primary Method:** `Modifying the legend`
- If `tampering_component` is **"annotation"**:
    - **Primary Method:** `Deceptive auxiliary annotations`
- If `tampering_component` is **"logo"**:
    - **Primary Method:** `Adding or removing logos`
- If `tampering_component` is **"colormap"**:
    - **Primary Method:** `Modifying the colormap`

**Chain-of-Thought**
---
Let’s think step by step about the tampering intent. Here is a potential checklist for inferring the tampering intent:
1. Understand the context and a full understanding of the input
2. For each tampered region, first identify its `tampering_component` from the input. Then, using the **Component-to-Method Mapping Rules** above, select the most fitting `method`. Remember to check Primary Methods before Secondary ones.
3. Based on your analysis, provide a simple description of the tampering process (`tamper`) in one sentence — how the original image was tampered to become the current version. For example: "Increase the population value of England from 53 million to 60 million and decrease the population value of Scotland from 5.2 million to 4 million.", "Remove the data points for feeling hopeful about the future"
4. Infer the `intent` based on the primary message conveyed by the chart and the identified tampered areas.

**Principles**
---
To infer the tampering intents, you may refer to these common tampering types:
- **Modifying data point values**: Changing the quantitative value of an existing data point, which alters its visual representation (e.g., making a bar taller/shorter, moving a point up/down, changing the height of a line segment, or altering the boundary of an area). Crucially, in this method, the visual element is consistently updated to accurately reflect the new (modified) data point value. The visual element representing the data point remains present on the chart, but its specific value has been changed.
- **Adding or removing data points**: Introducing entirely new data points (and their corresponding visual elements) or completely deleting existing data points (and their corresponding visual elements). This results in visual elements appearing or disappearing from the chart, rather than just changing their existing properties.
- **Modifying coordinate values**: Changing the values or textual labels of x-axis or y-axis to alter their position in the chart.
- **Deceptive auxiliary annotations**: Using misleading annotations (e.g., clustering boxes, guide lines, arrows) to create a false impression.
- **Modifying the legend**: Changing the legend’s content, colors, or order to mislead viewers about what the data represents.
- **Hiding labels**: Removing data labels near data points (e.g., scatter, point, etc.) to obscure the true meaning of the data.
- **Adding or removing logos**: Inserting or deleting logos to mislead viewers about the data source.
- **Data-visual disproportion**: Making the visual representation of data inconsistent with the actual values. This occurs when the visual element (e.g., bar length, area size) does not accurately correspond to its stated numerical value, or when one is modified without the other being consistently updated, creating a mismatch.
- **Modifying the colormap**: Adjusting the color mapping (including legend, data points, and their background colors) to distort the perception of data distribution, or introducing inconsistent colors to mislead.
- **Others**: Any other tampering method that is not included in the above types.

**Output Format**
---
Return in JSON format with the following structure:
```json
{ "tampering_intents": [
    {
      "tampered_region": "<tampered region>",
      "method": "<Tampering Method>",
      "tamper": "<Tampering Process>",
      "intent": "<Tampering Intent>"
    },...]}
'''
)";

// Single left-to-right pass, so substituted text is never rescanned.
std::string substitute(std::string_view text, std::initializer_list<std::pair<std::string_view, std::string_view>> keys) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool hit = false;
    for (const auto& [key, value] : keys) {
      if (text.compare(pos, key.size(), key) == 0) {
        out += value;
        pos += key.size();
        hit = true;
        break;
      }
    }
    if (!hit) out += text[pos++];
  }
  return out;
}

}  // namespace

std::string build_refinement_prompt(std::string_view image_ref) {
  return substitute(kRefinementTemplate, {{kImagePlaceholder, image_ref}});
}

std::string build_intent_prompt(std::string_view image_ref, std::span<const RefinedRegion> refined) {
  if (refined.empty()) throw ArgumentError("intent prompt needs at least one refined region");
  const std::string regions = "\n```json\n" + refinement_to_json(refined).dump(2) + "\n```";
  return substitute(kIntentTemplate, {{kImagePlaceholder, image_ref}, {kRegionsPlaceholder, regions}});
}

}  // namespace chartseal
