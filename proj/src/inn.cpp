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

#include "chartseal/inn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "chartseal/errors.hpp"
#include "chartseal/wavelet.hpp"

namespace chartseal {

void InnConfig::validate() const {
  if (image_channels != 1 && image_channels != 3) throw ArgumentError("image_channels must be 1 or 3");
  if (blocks < 1) throw ArgumentError("need at least one coupling block");
  if (growth < 1 || dense_layers < 1) throw ArgumentError("dense block needs growth >= 1 and layers >= 1");
  if (!(clamp > 0.0)) throw ArgumentError("clamp must be positive");
  if (pem_width < 1 || pem_res_blocks < 0 || pem_attn_blocks < 0) {
    throw ArgumentError("invalid posterior estimator size");
  }
}

// ---------------------------------------------------------------------------

ImageTensor realize_location_map(const MapPattern& pattern, int height, int width, int channels,
                                 int offset_x, int offset_y) {
  if (height % 2 != 0 || width % 2 != 0) throw ShapeError("location map size must be even");
  ImageTensor img(height, width, channels);
  auto put = [&](int y, int x, const Rgb& col) {
    if (channels == 3) {
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
    } else {
      img.at(y, x, 0) = (col[0] + col[1] + col[2]) / 3.0;
    }
  };
  if (const auto* cb = std::get_if<CheckerboardPattern>(&pattern)) {
    if (cb->cell <= 0) throw ArgumentError("checkerboard cell must be positive");
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        // Floor division keeps the parity rule consistent for negative offsets.
        const int cx = static_cast<int>(std::floor(static_cast<double>(x + offset_x) / cb->cell));
        const int cy = static_cast<int>(std::floor(static_cast<double>(y + offset_y) / cb->cell));
        put(y, x, ((cx + cy) % 2 + 2) % 2 == 0 ? cb->color0 : cb->color1);
      }
    }
  } else {
    const auto& solid = std::get<SolidPattern>(pattern);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) put(y, x, solid.color);
  }
  return img;
}

LocationMap make_location_map(const MapPattern& pattern, int height, int width, int channels) {
  return {pattern, realize_location_map(pattern, height, width, channels)};
}

// ---------------------------------------------------------------------------

CouplingBlock::CouplingBlock(nn::ParamStore& store, const InnConfig& cfg)
    : phi_(store, cfg.stream_channels(), cfg.growth, cfg.dense_layers),
      eta_(store, cfg.stream_channels(), cfg.growth, cfg.dense_layers),
      rho_(store, cfg.stream_channels(), cfg.growth, cfg.dense_layers),
      clamp_(cfg.clamp) {}

CouplingBlock::Pair CouplingBlock::embed(std::span<const double> theta, const Tensor& xc,
                                         const Tensor& xl, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  Pair out;
  out.cover = xc + phi_.forward(theta, xl, &c.phi);
  const Tensor n = eta_.forward(theta, out.cover, &c.eta);
  const Tensor r = rho_.forward(theta, out.cover, &c.rho);
  c.xl = xl;
  c.squash = Tensor(n.c, n.h, n.w);
  c.scale = Tensor(n.c, n.h, n.w);
  out.map = Tensor(n.c, n.h, n.w);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double t = std::tanh(0.5 * n.v[i]);
    const double e = std::exp(clamp_ * t);
    c.squash.v[i] = t;
    c.scale.v[i] = e;
    out.map.v[i] = xl.v[i] * e + r.v[i];
  }
  return out;
}

CouplingBlock::Pair CouplingBlock::embed_backward(std::span<const double> theta, const Cache& c,
                                                  const Tensor& d_xc_next, const Tensor& d_xl_next,
                                                  std::span<double> grad) const {
  const std::size_t n = d_xl_next.size();
  Pair d;
  d.map = Tensor(d_xl_next.c, d_xl_next.h, d_xl_next.w);
  Tensor dn(d.map.c, d.map.h, d.map.w);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = c.scale.v[i], t = c.squash.v[i];
    d.map.v[i] = d_xl_next.v[i] * e;
    const double ds = d_xl_next.v[i] * c.xl.v[i] * e;
    dn.v[i] = ds * clamp_ * 0.5 * (1.0 - t * t);
  }
  Tensor dxc = d_xc_next;
  dxc += eta_.backward(theta, c.eta, dn, grad);
  dxc += rho_.backward(theta, c.rho, d_xl_next, grad);
  d.map += phi_.backward(theta, c.phi, dxc, grad);
  d.cover = std::move(dxc);
  return d;
}

CouplingBlock::Pair CouplingBlock::reveal(std::span<const double> theta, const Tensor& xc_next,
                                          const Tensor& xl_next, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  const Tensor n = eta_.forward(theta, xc_next, &c.eta);
  const Tensor r = rho_.forward(theta, xc_next, &c.rho);
  c.squash = Tensor(n.c, n.h, n.w);
  c.scale = Tensor(n.c, n.h, n.w);
  Pair out;
  out.map = Tensor(n.c, n.h, n.w);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double t = std::tanh(0.5 * n.v[i]);
    const double e = std::exp(-clamp_ * t);
    c.squash.v[i] = t;
    c.scale.v[i] = e;
    out.map.v[i] = (xl_next.v[i] - r.v[i]) * e;
  }
  out.cover = xc_next - phi_.forward(theta, out.map, &c.phi);
  c.xl = out.map;
  return out;
}

CouplingBlock::Pair CouplingBlock::reveal_backward(std::span<const double> theta, const Cache& c,
                                                   const Tensor& d_xc, const Tensor& d_xl,
                                                   std::span<double> grad) const {
  // xc = xc' - phi(xl): phi sees the negated upstream gradient.
  Tensor neg = d_xc;
  neg *= -1.0;
  Tensor dxl = d_xl;
  dxl += phi_.backward(theta, c.phi, neg, grad);
  Pair d;
  d.cover = d_xc;
  d.map = Tensor(dxl.c, dxl.h, dxl.w);
  Tensor dr(dxl.c, dxl.h, dxl.w);
  Tensor dn(dxl.c, dxl.h, dxl.w);
  for (std::size_t i = 0; i < dxl.size(); ++i) {
    const double e = c.scale.v[i], t = c.squash.v[i];
    d.map.v[i] = dxl.v[i] * e;
    dr.v[i] = -dxl.v[i] * e;
    const double ds = -dxl.v[i] * c.xl.v[i];
    dn.v[i] = ds * clamp_ * 0.5 * (1.0 - t * t);
  }
  d.cover += eta_.backward(theta, c.eta, dn, grad);
  d.cover += rho_.backward(theta, c.rho, dr, grad);
  return d;
}

Tensor CouplingBlock::log_scale(std::span<const double> theta, const Tensor& xc_next) const {
  Tensor s = eta_.forward(theta, xc_next, nullptr);
  for (double& v : s.v) v = clamp_ * std::tanh(0.5 * v);
  return s;
}

void CouplingBlock::init(std::span<double> theta, std::mt19937_64& rng, double output_scale) const {
  phi_.init(theta, rng, output_scale);
  eta_.init(theta, rng, output_scale);
  rho_.init(theta, rng, output_scale);
}

// ---------------------------------------------------------------------------

PosteriorEstimator::PosteriorEstimator(nn::ParamStore& store, const InnConfig& cfg)
    : width_(cfg.pem_width) {
  head_ = nn::Conv2d(store, cfg.stream_channels(), width_, 3);
  for (int i = 0; i < cfg.pem_res_blocks; ++i) {
    res_.push_back({nn::Conv2d(store, width_, width_, 3), nn::Conv2d(store, width_, width_, 3)});
  }
  for (int i = 0; i < cfg.pem_attn_blocks; ++i) {
    attn_.push_back({nn::Conv2d(store, width_, width_, 3), nn::Conv2d(store, width_, width_, 1)});
  }
  fuse_ = nn::Conv2d(store, width_, kPrompts, 1);
  prompt_off_ = store.allocate(static_cast<std::size_t>(kPrompts) * width_);
  tail_ = nn::Conv2d(store, width_, cfg.stream_channels(), 3);
}

namespace {

std::array<double, PosteriorEstimator::kPrompts> softmax3(const double* logits) {
  std::array<double, PosteriorEstimator::kPrompts> w{};
  const double m = *std::max_element(logits, logits + w.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += (w[k] = std::exp(logits[k] - m));
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

Tensor PosteriorEstimator::forward(std::span<const double> theta, const Tensor& u,
                                   Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.input = u;
  c.head = head_.forward(theta, u);
  Tensor x = c.head;
  c.res_in.clear();
  c.res_pre.clear();
  for (const auto& rb : res_) {
    c.res_in.push_back(x);
    Tensor z = rb[0].forward(theta, x);
    Tensor a = z;
    for (double& v : a.v) v = nn::silu(v);
    c.res_pre.push_back(std::move(z));
    x += rb[1].forward(theta, a);
  }
  c.f1 = x;
  c.attn_in.clear();
  c.attn_gate.clear();
  for (const auto& ab : attn_) {
    c.attn_in.push_back(x);
    Tensor g = ab[0].forward(theta, x);
    for (double& v : g.v) v = nn::sigmoid(v);
    Tensor gated = x;
    for (std::size_t i = 0; i < gated.size(); ++i) gated.v[i] *= g.v[i];
    c.attn_gate.push_back(std::move(g));
    x += ab[1].forward(theta, gated);
  }
  c.ft = x + c.f1;

  const std::size_t plane = c.ft.plane();
  c.pooled.assign(static_cast<std::size_t>(width_), 0.0);
  for (int k = 0; k < width_; ++k) {
    const double* p = c.ft.channel(k);
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += p[i];
    c.pooled[static_cast<std::size_t>(k)] = s / static_cast<double>(plane);
  }
  double logits[kPrompts];
  fuse_.forward(theta, c.pooled.data(), 1, 1, logits);
  c.weights = softmax3(logits);

  c.fused = c.ft;
  for (int k = 0; k < width_; ++k) {
    double prompt = 0.0;
    for (int j = 0; j < kPrompts; ++j) {
      prompt += c.weights[static_cast<std::size_t>(j)] *
                theta[prompt_off_ + static_cast<std::size_t>(j) * width_ + k];
    }
    double* p = c.fused.channel(k);
    for (std::size_t i = 0; i < plane; ++i) p[i] += prompt;
  }
  return tail_.forward(theta, c.fused);
}

Tensor PosteriorEstimator::backward(std::span<const double> theta, const Cache& c,
                                    const Tensor& d_out, std::span<double> grad) const {
  const int h = d_out.h, w = d_out.w;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor dfused(width_, h, w);
  tail_.backward(theta, c.fused.data(), h, w, d_out.data(), grad, dfused.data());

  // Prompt mixture: fused = ft + sum_j W[j] P_j (broadcast over pixels).
  std::vector<double> dprompt(static_cast<std::size_t>(width_), 0.0);
  for (int k = 0; k < width_; ++k) {
    const double* p = dfused.channel(k);
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += p[i];
    dprompt[static_cast<std::size_t>(k)] = s;
  }
  double dweights[kPrompts] = {0.0, 0.0, 0.0};
  for (int j = 0; j < kPrompts; ++j) {
    for (int k = 0; k < width_; ++k) {
      const std::size_t idx = prompt_off_ + static_cast<std::size_t>(j) * width_ + k;
      grad[idx] += c.weights[static_cast<std::size_t>(j)] * dprompt[static_cast<std::size_t>(k)];
      dweights[j] += theta[idx] * dprompt[static_cast<std::size_t>(k)];
    }
  }
  double dot = 0.0;
  for (int j = 0; j < kPrompts; ++j) dot += c.weights[static_cast<std::size_t>(j)] * dweights[j];
  double dlogits[kPrompts];
  for (int j = 0; j < kPrompts; ++j) dlogits[j] = c.weights[static_cast<std::size_t>(j)] * (dweights[j] - dot);
  std::vector<double> dpooled(static_cast<std::size_t>(width_), 0.0);
  fuse_.backward(theta, c.pooled.data(), 1, 1, dlogits, grad, dpooled.data());

  Tensor dft = std::move(dfused);
  for (int k = 0; k < width_; ++k) {
    const double g = dpooled[static_cast<std::size_t>(k)] / static_cast<double>(plane);
    double* p = dft.channel(k);
    for (std::size_t i = 0; i < plane; ++i) p[i] += g;
  }

  // ft = attn(f1) + f1
  Tensor dx = dft;
  for (std::size_t b = attn_.size(); b-- > 0;) {
    const auto& ab = attn_[b];
    const Tensor& xin = c.attn_in[b];
    const Tensor& g = c.attn_gate[b];
    Tensor gated = xin;
    for (std::size_t i = 0; i < gated.size(); ++i) gated.v[i] *= g.v[i];
    Tensor dgated(width_, h, w);
    ab[1].backward(theta, gated.data(), h, w, dx.data(), grad, dgated.data());
    Tensor dq(width_, h, w);
    for (std::size_t i = 0; i < dq.size(); ++i) {
      dx.v[i] += dgated.v[i] * g.v[i];
      dq.v[i] = dgated.v[i] * xin.v[i] * g.v[i] * (1.0 - g.v[i]);
    }
    ab[0].backward(theta, xin.data(), h, w, dq.data(), grad, dx.data());
  }
  dx += dft;

  for (std::size_t b = res_.size(); b-- > 0;) {
    const auto& rb = res_[b];
    const Tensor& z = c.res_pre[b];
    Tensor a = z;
    for (double& v : a.v) v = nn::silu(v);
    Tensor da(width_, h, w);
    rb[1].backward(theta, a.data(), h, w, dx.data(), grad, da.data());
    for (std::size_t i = 0; i < da.size(); ++i) da.v[i] *= nn::silu_grad(z.v[i]);
    rb[0].backward(theta, c.res_in[b].data(), h, w, da.data(), grad, dx.data());
  }

  Tensor du(c.input.c, h, w);
  head_.backward(theta, c.input.data(), h, w, dx.data(), grad, du.data());
  return du;
}

std::array<double, PosteriorEstimator::kPrompts> PosteriorEstimator::prompt_weights(
    std::span<const double> theta, const Tensor& subbands) const {
  Cache c;
  forward(theta, subbands, &c);
  return c.weights;
}

void PosteriorEstimator::init(std::span<double> theta, std::mt19937_64& rng,
                              double output_scale) const {
  head_.init(theta, rng, std::sqrt(3.0));
  for (const auto& rb : res_) {
    rb[0].init(theta, rng, std::sqrt(3.0));
    rb[1].init(theta, rng, output_scale);
  }
  for (const auto& ab : attn_) {
    ab[0].init(theta, rng, std::sqrt(3.0));
    ab[1].init(theta, rng, output_scale);
  }
  fuse_.init(theta, rng, 1.0);
  std::normal_distribution<double> dist(0.0, 0.1);
  for (std::size_t i = 0; i < static_cast<std::size_t>(kPrompts) * width_; ++i) {
    theta[prompt_off_ + i] = dist(rng);
  }
  tail_.init(theta, rng, output_scale);
}

int PosteriorEstimator::radius() const {
  return 1 + 2 * static_cast<int>(res_.size()) + static_cast<int>(attn_.size()) + 1;
}

// ---------------------------------------------------------------------------

InnModel::InnModel(const InnConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (int i = 0; i < cfg_.blocks; ++i) blocks_.emplace_back(store_, cfg_);
  pem_ = PosteriorEstimator(store_, cfg_);
}

void InnModel::randomize(std::uint64_t seed, double output_scale) {
  std::mt19937_64 rng(seed);
  auto theta = store_.values();
  for (const auto& b : blocks_) b.init(theta, rng, output_scale);
  pem_.init(theta, rng, output_scale);
}

int InnModel::reveal_radius() const {
  const int sub = cfg_.dense_layers;
  int r_cover = 0;
  int r_map = pem_.radius();
  for (int i = cfg_.blocks - 1; i >= 0; --i) {
    r_map = std::max(r_map, r_cover + sub);
    r_cover = std::max(r_cover, r_map + sub);
  }
  // One subband sample spans two pixels; the 2x2 Haar footprint adds one more.
  return 2 * r_map + 1;
}

StreamPair embed_streams(const InnModel& model, const Tensor& xc, const Tensor& xl) {
  if (!xc.same_shape(xl)) throw ShapeError("cover and map streams differ in shape");
  if (xc.c != model.config().stream_channels()) throw ShapeError("stream channel count mismatch");
  CouplingBlock::Pair p{xc, xl};
  for (const auto& b : model.blocks()) p = b.embed(model.params(), p.cover, p.map, nullptr);
  return {std::move(p.cover), std::move(p.map)};
}

StreamPair reveal_streams(const InnModel& model, const Tensor& xc, const Tensor& xl) {
  if (!xc.same_shape(xl)) throw ShapeError("cover and map streams differ in shape");
  if (xc.c != model.config().stream_channels()) throw ShapeError("stream channel count mismatch");
  CouplingBlock::Pair p{xc, xl};
  const auto& blocks = model.blocks();
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    p = it->reveal(model.params(), p.cover, p.map, nullptr);
  }
  return {std::move(p.cover), std::move(p.map)};
}

namespace {

void require_model_input(const InnModel& model, const ImageTensor& img) {
  if (img.height % 2 != 0 || img.width % 2 != 0) {
    throw ShapeError("image must have even height and width, got " + std::to_string(img.height) +
                     "x" + std::to_string(img.width));
  }
  if (img.channels != model.config().image_channels) {
    throw ShapeError("image has " + std::to_string(img.channels) + " channels, model expects " +
                     std::to_string(model.config().image_channels));
  }
}

}  // namespace

ImageTensor embed(const InnModel& model, const ImageTensor& cover, const LocationMap& map) {
  require_model_input(model, cover);
  if (!cover.same_shape(map.realized)) throw ShapeError("location map shape differs from cover");
  const auto s = embed_streams(model, haar_forward(cover), haar_forward(map.realized));
  return clamp01(haar_inverse(s.cover));
}

Tensor estimate_posterior(const InnModel& model, const ImageTensor& received) {
  require_model_input(model, received);
  return model.pem().forward(model.params(), haar_forward(received), nullptr);
}

std::array<double, PosteriorEstimator::kPrompts> prompt_weights(const InnModel& model,
                                                                const ImageTensor& received) {
  require_model_input(model, received);
  return model.pem().prompt_weights(model.params(), haar_forward(received));
}

RevealResult reveal(const InnModel& model, const ImageTensor& received) {
  require_model_input(model, received);
  const Tensor xc = haar_forward(received);
  const Tensor xl = model.pem().forward(model.params(), xc, nullptr);
  const auto s = reveal_streams(model, xc, xl);
  return {clamp01(haar_inverse(s.map)), clamp01(haar_inverse(s.cover))};
}

// ---------------------------------------------------------------------------
// Checkpoint I/O. Explicit little-endian encoding, independent of host order.

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { le(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf(b) {}
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[pos + i]) << (8 * i));
    pos += sizeof(T);
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(le<std::uint32_t>())); }
  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw FormatError("checkpoint truncated");
  }
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const InnModel& model) {
  Writer w;
  w.bytes("VZMK", 4);
  w.le<std::uint16_t>(kCheckpointVersion);
  const auto& c = model.config();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.image_channels));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.blocks));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.growth));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.dense_layers));
  w.f32(c.clamp);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.pem_width));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.pem_res_blocks));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.pem_attn_blocks));
  w.le<std::uint64_t>(model.parameter_count());
  for (double v : model.params()) w.f32(v);
  return std::move(w.out);
}

InnModel deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), "VZMK", 4) != 0) throw FormatError("not a model checkpoint (bad magic)");
  r.pos = 4;
  const auto version = r.le<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  InnConfig c;
  c.image_channels = static_cast<int>(r.le<std::uint32_t>());
  c.blocks = static_cast<int>(r.le<std::uint32_t>());
  c.growth = static_cast<int>(r.le<std::uint32_t>());
  c.dense_layers = static_cast<int>(r.le<std::uint32_t>());
  c.clamp = r.f32();
  c.pem_width = static_cast<int>(r.le<std::uint32_t>());
  c.pem_res_blocks = static_cast<int>(r.le<std::uint32_t>());
  c.pem_attn_blocks = static_cast<int>(r.le<std::uint32_t>());
  if (c.blocks > 64 || c.growth > 1024 || c.dense_layers > 64 || c.pem_width > 4096 ||
      c.pem_res_blocks > 64 || c.pem_attn_blocks > 64) {
    throw FormatError("checkpoint architecture out of range");
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("checkpoint architecture invalid: ") + e.what());
  }
  InnModel model(c);
  const auto count = r.le<std::uint64_t>();
  if (count != model.parameter_count()) {
    throw FormatError("checkpoint parameter count does not match its architecture");
  }
  r.need(count * 4);
  for (double& v : model.params()) v = r.f32();
  if (r.pos != bytes.size()) throw FormatError("checkpoint has trailing bytes");
  return model;
}

void save_checkpoint(const InnModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
}

InnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace chartseal
