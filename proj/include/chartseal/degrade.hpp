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

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "chartseal/image.hpp"

namespace chartseal {

struct NoDegradation {};
// Additive N(0, sigma^2) in normalized intensity, sigma in [0, 1].
struct GaussianNoise {
  double sigma = 0.0;
};
// Poisson(v * peak) / peak per value.
struct PoissonNoise {
  double peak = 255.0;
};
// Baseline JPEG encode + decode at the given quality (1..100).
struct JpegCompression {
  int quality = 90;
};

using DegradationKind = std::variant<NoDegradation, GaussianNoise, PoissonNoise, JpegCompression>;

struct Degradation {
  DegradationKind kind = NoDegradation{};
  std::uint64_t seed = 0;
};

void validate(const Degradation& deg);
std::string describe(const Degradation& deg);

// Benign channel; output clamped to [0, 1]. Same seed, same realization.
ImageTensor apply(const Degradation& deg, const ImageTensor& img);

// Forward pass of the training channel. The backward pass is the identity for
// every supported kind (additive noise is constant w.r.t. the input and JPEG
// uses a straight-through estimator), see channel_backward. Poisson noise is
// evaluation-only and rejected here.
ImageTensor apply_differentiable(const Degradation& deg, const ImageTensor& img);
ImageTensor channel_backward(const Degradation& deg, const ImageTensor& grad_out);

// Draws degradations for training batches: kind chosen by the caller's
// schedule entry, parameters uniform in [min, max].
struct DegradationSampler {
  enum class Kind { kNone, kGaussian, kJpeg, kPoisson };
  Kind kind = Kind::kNone;
  double min = 0.0;
  double max = 0.0;

  Degradation sample(std::mt19937_64& rng) const;
};

}  // namespace chartseal
