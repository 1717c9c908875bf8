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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chartseal/tensor.hpp"

namespace chartseal::nn {

// All trainable values of a model live in one flat vector; layers keep
// offsets into it. Gradients use a vector of the same length, so Adam,
// checkpointing and finite-difference checks work on plain spans.
class ParamStore {
 public:
  std::size_t allocate(std::size_t n) {
    const std::size_t off = values_.size();
    values_.resize(off + n, 0.0);
    return off;
  }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Zero-padded stride-1 convolution with square kernel (1 or 3).
// Weight layout: [out][in][ky][kx], followed by a separate bias block.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamStore& store, int in_channels, int out_channels, int kernel);

  int in_channels() const { return cin_; }
  int out_channels() const { return cout_; }
  int kernel() const { return k_; }
  std::size_t weight_offset() const { return w_off_; }
  std::size_t bias_offset() const { return b_off_; }
  std::size_t weight_count() const { return static_cast<std::size_t>(cout_) * cin_ * k_ * k_; }

  // x points at cin planes of h*w values; y receives cout planes.
  void forward(std::span<const double> theta, const double* x, int h, int w, double* y) const;
  // Accumulates weight/bias gradients into grad and, if dx is non-null, the
  // input gradient into dx.
  void backward(std::span<const double> theta, const double* x, int h, int w, const double* dy,
                std::span<double> grad, double* dx) const;

  // Uniform(-scale/sqrt(fan_in), +scale/sqrt(fan_in)) weights, zero bias.
  void init(std::span<double> theta, std::mt19937_64& rng, double scale = 1.0) const;

  Tensor forward(std::span<const double> theta, const Tensor& x) const;

 private:
  int cin_ = 0;
  int cout_ = 0;
  int k_ = 1;
  std::size_t w_off_ = 0;
  std::size_t b_off_ = 0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// SiLU x*sigmoid(x): smooth, so finite-difference checks stay well-posed.
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// Five-layer dense block (each 3x3 conv sees the concatenation of the block
// input and every earlier layer output) followed by a pointwise mixing layer.
class DenseSubnet {
 public:
  struct Cache {
    Tensor features;               // [input | a1 | ... | a_{L-1}]
    std::vector<Tensor> pre;       // pre-activations of the hidden layers
    Tensor last;                   // output of the final conv, before mixing
  };

  DenseSubnet() = default;
  DenseSubnet(ParamStore& store, int channels, int growth, int layers);

  Tensor forward(std::span<const double> theta, const Tensor& x, Cache* cache) const;
  Tensor backward(std::span<const double> theta, const Cache& cache, const Tensor& dy,
                  std::span<double> grad) const;

  void init(std::span<double> theta, std::mt19937_64& rng, double output_scale) const;
  // Receptive-field radius in samples of the input grid.
  int radius() const { return static_cast<int>(convs_.size()); }

  const std::vector<Conv2d>& convs() const { return convs_; }
  const Conv2d& mix() const { return mix_; }

 private:
  int channels_ = 0;
  int growth_ = 0;
  std::vector<Conv2d> convs_;
  Conv2d mix_;
};

}  // namespace chartseal::nn
