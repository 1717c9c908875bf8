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
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "chartseal/image.hpp"
#include "chartseal/nn.hpp"
#include "chartseal/tensor.hpp"

namespace chartseal {

struct InnConfig {
  int image_channels = 3;
  int blocks = 4;
  int growth = 16;
  int dense_layers = 5;
  double clamp = 2.0;
  int pem_width = 32;
  int pem_res_blocks = 2;
  int pem_attn_blocks = 1;

  int stream_channels() const { return 4 * image_channels; }
  void validate() const;
  friend bool operator==(const InnConfig&, const InnConfig&) = default;
};

// ---------------------------------------------------------------------------
// Location map

struct CheckerboardPattern {
  int cell = 16;
  Rgb color0{0.0, 0.0, 0.0};
  Rgb color1{1.0, 1.0, 1.0};
};

struct SolidPattern {
  Rgb color{1.0, 1.0, 1.0};
};

using MapPattern = std::variant<CheckerboardPattern, SolidPattern>;

// Checkerboard: pixel (x, y) takes color0 when (x/cell + y/cell) is even.
// offset_x/offset_y shift the pattern origin (training augmentation only).
ImageTensor realize_location_map(const MapPattern& pattern, int height, int width,
                                 int channels = 3, int offset_x = 0, int offset_y = 0);

struct LocationMap {
  MapPattern pattern;
  ImageTensor realized;
};

LocationMap make_location_map(const MapPattern& pattern, int height, int width, int channels = 3);

// ---------------------------------------------------------------------------
// Affine coupling block
//
// Embed direction:
//   xc' = xc + phi(xl)
//   xl' = xl * exp(s(xc')) + rho(xc'),   s = clamp * (2 sigmoid(eta(xc')) - 1)
// Reveal direction inverts it exactly:
//   xl  = (xl' - rho(xc')) * exp(-s(xc'))
//   xc  = xc' - phi(xl)
class CouplingBlock {
 public:
  struct Cache {
    Tensor xl;       // map stream on the xl side of the block (input on embed, output on reveal)
    Tensor squash;   // tanh(eta(xc')/2), the bounded log-scale before multiplying by clamp
    Tensor scale;    // exp(+s) for embed, exp(-s) for reveal
    nn::DenseSubnet::Cache phi;
    nn::DenseSubnet::Cache eta;
    nn::DenseSubnet::Cache rho;
  };
  struct Pair {
    Tensor cover;
    Tensor map;
  };

  CouplingBlock() = default;
  CouplingBlock(nn::ParamStore& store, const InnConfig& cfg);

  Pair embed(std::span<const double> theta, const Tensor& xc, const Tensor& xl, Cache* cache) const;
  // Takes gradients w.r.t. the embed outputs, returns them w.r.t. the inputs.
  Pair embed_backward(std::span<const double> theta, const Cache& cache, const Tensor& d_xc_next,
                      const Tensor& d_xl_next, std::span<double> grad) const;

  Pair reveal(std::span<const double> theta, const Tensor& xc_next, const Tensor& xl_next,
              Cache* cache) const;
  // Takes gradients w.r.t. the reveal outputs, returns them w.r.t. its inputs.
  Pair reveal_backward(std::span<const double> theta, const Cache& cache, const Tensor& d_xc,
                       const Tensor& d_xl, std::span<double> grad) const;

  // The bounded log-scale s(xc') in [-clamp, clamp].
  Tensor log_scale(std::span<const double> theta, const Tensor& xc_next) const;

  void init(std::span<double> theta, std::mt19937_64& rng, double output_scale) const;

  const nn::DenseSubnet& phi() const { return phi_; }
  const nn::DenseSubnet& eta() const { return eta_; }
  const nn::DenseSubnet& rho() const { return rho_; }
  double clamp() const { return clamp_; }

 private:
  nn::DenseSubnet phi_;
  nn::DenseSubnet eta_;
  nn::DenseSubnet rho_;
  double clamp_ = 2.0;
};

// ---------------------------------------------------------------------------
// Posterior estimator: predicts the map stream that the embed side discards.
//
//   u   = DWT(received)
//   f1  = residual blocks(head(u))
//   Ft  = attention blocks(f1) + f1
//   Wp  = softmax(fuse(mean_xy(Ft)))           (one weight per degradation prompt)
//   out = tail(Ft + sum_k Wp[k] * P_k)
class PosteriorEstimator {
 public:
  static constexpr int kPrompts = 3;

  struct Cache {
    Tensor input;
    Tensor head;
    std::vector<Tensor> res_in;
    std::vector<Tensor> res_pre;
    std::vector<Tensor> attn_in;
    std::vector<Tensor> attn_gate;
    Tensor f1;
    Tensor ft;
    std::vector<double> pooled;
    std::array<double, kPrompts> weights{};
    Tensor fused;
  };

  PosteriorEstimator() = default;
  PosteriorEstimator(nn::ParamStore& store, const InnConfig& cfg);

  Tensor forward(std::span<const double> theta, const Tensor& subbands, Cache* cache) const;
  Tensor backward(std::span<const double> theta, const Cache& cache, const Tensor& d_out,
                  std::span<double> grad) const;

  std::array<double, kPrompts> prompt_weights(std::span<const double> theta,
                                              const Tensor& subbands) const;

  void init(std::span<double> theta, std::mt19937_64& rng, double output_scale) const;
  // Receptive-field radius in subband samples, ignoring the global pooling
  // that only feeds the three prompt weights.
  int radius() const;

  std::size_t prompt_offset() const { return prompt_off_; }

 private:
  int width_ = 0;
  nn::Conv2d head_;
  std::vector<std::array<nn::Conv2d, 2>> res_;
  std::vector<std::array<nn::Conv2d, 2>> attn_;  // {gate 3x3, projection 1x1}
  nn::Conv2d fuse_;
  std::size_t prompt_off_ = 0;
  nn::Conv2d tail_;
};

// ---------------------------------------------------------------------------

class InnModel {
 public:
  InnModel() : InnModel(InnConfig{}) {}
  // All parameters start at zero: an exact identity coupling.
  explicit InnModel(const InnConfig& cfg);

  // Random initialization for training; deterministic in seed.
  void randomize(std::uint64_t seed, double output_scale = 0.1);

  const InnConfig& config() const { return cfg_; }
  std::span<double> params() { return store_.values(); }
  std::span<const double> params() const { return store_.values(); }
  std::size_t parameter_count() const { return store_.size(); }
  const std::vector<CouplingBlock>& blocks() const { return blocks_; }
  const PosteriorEstimator& pem() const { return pem_; }

  // Receptive-field radius of the reveal path in image pixels (local terms only).
  int reveal_radius() const;

 private:
  InnConfig cfg_;
  nn::ParamStore store_;
  std::vector<CouplingBlock> blocks_;
  PosteriorEstimator pem_;
};

struct StreamPair {
  Tensor cover;
  Tensor map;
};

// Stream-level passes through all blocks (embed: 0..n-1, reveal: n-1..0).
StreamPair embed_streams(const InnModel& model, const Tensor& xc, const Tensor& xl);
StreamPair reveal_streams(const InnModel& model, const Tensor& xc, const Tensor& xl);

// Protected image, clamped to [0, 1].
ImageTensor embed(const InnModel& model, const ImageTensor& cover, const LocationMap& map);

struct RevealResult {
  ImageTensor map;
  ImageTensor cover;
};

RevealResult reveal(const InnModel& model, const ImageTensor& received);

// Initial map stream for the reveal pass (4C x H/2 x W/2).
Tensor estimate_posterior(const InnModel& model, const ImageTensor& received);
std::array<double, PosteriorEstimator::kPrompts> prompt_weights(const InnModel& model,
                                                                const ImageTensor& received);

// Checkpoint: "VZMK", u16 version, architecture config, u64 parameter count,
// then every parameter as a little-endian float32 in declaration order.
std::vector<std::uint8_t> serialize_checkpoint(const InnModel& model);
InnModel deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const InnModel& model, const std::filesystem::path& path);
InnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace chartseal
