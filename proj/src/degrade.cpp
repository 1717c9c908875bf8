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

#include "chartseal/degrade.hpp"

#include <algorithm>
#include <cmath>

#include "chartseal/errors.hpp"

namespace chartseal {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

void validate(const Degradation& deg) {
  std::visit(Overloaded{
                 [](const NoDegradation&) {},
                 [](const GaussianNoise& g) {
                   if (!(g.sigma >= 0.0 && g.sigma <= 1.0)) throw ArgumentError("gaussian sigma must be in [0, 1]");
                 },
                 [](const PoissonNoise& p) {
                   if (!(p.peak > 0.0) || !std::isfinite(p.peak)) throw ArgumentError("poisson peak must be positive");
                 },
                 [](const JpegCompression& j) {
                   if (j.quality < 1 || j.quality > 100) throw ArgumentError("jpeg quality must be in 1..100");
                 },
             },
             deg.kind);
}

std::string describe(const Degradation& deg) {
  return std::visit(Overloaded{
                        [](const NoDegradation&) { return std::string("none"); },
                        [](const GaussianNoise& g) { return "gaussian(sigma=" + std::to_string(g.sigma) + ")"; },
                        [](const PoissonNoise& p) { return "poisson(peak=" + std::to_string(p.peak) + ")"; },
                        [](const JpegCompression& j) { return "jpeg(quality=" + std::to_string(j.quality) + ")"; },
                    },
                    deg.kind);
}

ImageTensor apply(const Degradation& deg, const ImageTensor& img) {
  validate(deg);
  std::mt19937_64 rng(deg.seed);
  return std::visit(
      Overloaded{
          [&](const NoDegradation&) { return img; },
          [&](const GaussianNoise& g) {
            ImageTensor out = img;
            if (g.sigma == 0.0) return out;
            std::normal_distribution<double> noise(0.0, g.sigma);
            for (double& v : out.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
            return out;
          },
          [&](const PoissonNoise& p) {
            ImageTensor out = img;
            for (double& v : out.data) {
              const double mean = std::max(0.0, v) * p.peak;
              if (mean <= 0.0) {
                v = 0.0;
                continue;
              }
              std::poisson_distribution<long long> counts(mean);
              v = std::clamp(static_cast<double>(counts(rng)) / p.peak, 0.0, 1.0);
            }
            return out;
          },
          [&](const JpegCompression& j) {
            ImageTensor out = decode_image(encode_jpeg(img, j.quality));
            if (out.channels != img.channels) out = img.channels == 3 ? to_rgb(out) : out;
            return out;
          },
      },
      deg.kind);
}

ImageTensor apply_differentiable(const Degradation& deg, const ImageTensor& img) {
  if (std::holds_alternative<PoissonNoise>(deg.kind)) {
    throw ArgumentError("poisson noise is evaluation-only and has no differentiable path");
  }
  return apply(deg, img);
}

ImageTensor channel_backward(const Degradation& deg, const ImageTensor& grad_out) {
  if (std::holds_alternative<PoissonNoise>(deg.kind)) {
    throw ArgumentError("poisson noise is evaluation-only and has no differentiable path");
  }
  return grad_out;
}

Degradation DegradationSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(min, max);
  Degradation d;
  d.seed = rng();
  switch (kind) {
    case Kind::kNone:
      break;
    case Kind::kGaussian:
      d.kind = GaussianNoise{max > min ? u(rng) : min};
      break;
    case Kind::kJpeg:
      d.kind = JpegCompression{static_cast<int>(std::lround(max > min ? u(rng) : min))};
      break;
    case Kind::kPoisson:
      d.kind = PoissonNoise{max > min ? u(rng) : min};
      break;
  }
  return d;
}

}  // namespace chartseal
