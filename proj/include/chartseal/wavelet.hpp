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

#include "chartseal/image.hpp"
#include "chartseal/tensor.hpp"

namespace chartseal {

// Single-level orthonormal 2-D Haar decomposition. Each band is planar
// (C x H/2 x W/2). For a 2x2 block
//   a b
//   c d
// ll = (a+b+c+d)/2, lh = (a-b+c-d)/2, hl = (a+b-c-d)/2, hh = (a-b-c+d)/2.
struct SubbandSet {
  Tensor ll;
  Tensor lh;
  Tensor hl;
  Tensor hh;
  int source_height = 0;
  int source_width = 0;
};

SubbandSet dwt(const ImageTensor& img);
// Exact inverse of dwt. No clamping; values may leave [0, 1].
ImageTensor idwt(const SubbandSet& sb);

// Stream layout used by the coupling network: the four bands stacked along
// the channel axis as [ll | lh | hl | hh], 4C channels in total.
Tensor pack_subbands(const SubbandSet& sb);
SubbandSet unpack_subbands(const Tensor& stream, int image_channels);

// dwt/idwt fused with pack/unpack. Both are orthonormal, so each is the
// adjoint of the other; backpropagation uses that directly.
Tensor haar_forward(const ImageTensor& img);
ImageTensor haar_inverse(const Tensor& stream);

}  // namespace chartseal
