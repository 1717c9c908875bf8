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

#include "chartseal/nn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "chartseal/errors.hpp"

namespace chartseal::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Rows are (channel, ky, kx) triples; columns are output pixels.
void im2col3(const double* x, int cin, int h, int w, double* col) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < cin; ++i) {
    const double* plane = x + i * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = col + (static_cast<std::size_t>(i) * 9 + ky * 3 + kx) * hw;
        const int dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          double* out = row + static_cast<std::size_t>(y) * w;
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) {
            std::fill(out, out + w, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(sy) * w;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          std::fill(out, out + x0, 0.0);
          std::copy(src + x0 + dx, src + x1 + dx, out + x0);
          std::fill(out + x1, out + w, 0.0);
        }
      }
    }
  }
}

void col2im3_add(const double* col, int cin, int h, int w, double* dx_out) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < cin; ++i) {
    double* plane = dx_out + i * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = col + (static_cast<std::size_t>(i) * 9 + ky * 3 + kx) * hw;
        const int dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          const double* in = row + static_cast<std::size_t>(y) * w;
          double* dst = plane + static_cast<std::size_t>(sy) * w;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int x = x0; x < x1; ++x) dst[x + dx] += in[x];
        }
      }
    }
  }
}

std::vector<double>& scratch(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

std::vector<double>& scratch2(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

Conv2d::Conv2d(ParamStore& store, int in_channels, int out_channels, int kernel)
    : cin_(in_channels), cout_(out_channels), k_(kernel) {
  if (kernel != 1 && kernel != 3) throw ArgumentError("conv kernel must be 1 or 3");
  w_off_ = store.allocate(weight_count());
  b_off_ = store.allocate(static_cast<std::size_t>(cout_));
}

void Conv2d::forward(std::span<const double> theta, const double* x, int h, int w,
                     double* y) const {
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
  const Eigen::Index kk = static_cast<Eigen::Index>(cin_) * k_ * k_;
  ConstMapMat W(theta.data() + w_off_, cout_, kk);
  Eigen::Map<const Eigen::VectorXd> b(theta.data() + b_off_, cout_);
  MapMat Y(y, cout_, hw);
  if (k_ == 1) {
    Y.noalias() = W * ConstMapMat(x, cin_, hw);
  } else {
    auto& col = scratch(static_cast<std::size_t>(kk * hw));
    im2col3(x, cin_, h, w, col.data());
    Y.noalias() = W * ConstMapMat(col.data(), kk, hw);
  }
  Y.colwise() += b;
}

void Conv2d::backward(std::span<const double> theta, const double* x, int h, int w,
                      const double* dy, std::span<double> grad, double* dx) const {
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
  const Eigen::Index kk = static_cast<Eigen::Index>(cin_) * k_ * k_;
  ConstMapMat W(theta.data() + w_off_, cout_, kk);
  ConstMapMat dY(dy, cout_, hw);
  MapMat dW(grad.data() + w_off_, cout_, kk);
  // Plain loop: Eigen's vectorized sum peels by alignment, so its order
  // would change with the buffer address.
  for (int o = 0; o < cout_; ++o) {
    const double* row = dy + static_cast<std::size_t>(o) * hw;
    double s = 0.0;
    for (Eigen::Index i = 0; i < hw; ++i) s += row[i];
    grad[b_off_ + static_cast<std::size_t>(o)] += s;
  }
  if (k_ == 1) {
    ConstMapMat X(x, cin_, hw);
    dW.noalias() += dY * X.transpose();
    if (dx != nullptr) {
      MapMat dX(dx, cin_, hw);
      dX.noalias() += W.transpose() * dY;
    }
    return;
  }
  auto& col = scratch(static_cast<std::size_t>(kk * hw));
  im2col3(x, cin_, h, w, col.data());
  ConstMapMat C(col.data(), kk, hw);
  dW.noalias() += dY * C.transpose();
  if (dx != nullptr) {
    auto& dcol = scratch2(static_cast<std::size_t>(kk * hw));
    MapMat dC(dcol.data(), kk, hw);
    dC.noalias() = W.transpose() * dY;
    col2im3_add(dcol.data(), cin_, h, w, dx);
  }
}

void Conv2d::init(std::span<double> theta, std::mt19937_64& rng, double scale) const {
  const double bound = scale / std::sqrt(static_cast<double>(cin_ * k_ * k_));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < weight_count(); ++i) theta[w_off_ + i] = dist(rng);
  std::fill_n(theta.begin() + static_cast<std::ptrdiff_t>(b_off_), cout_, 0.0);
}

Tensor Conv2d::forward(std::span<const double> theta, const Tensor& x) const {
  if (x.c != cin_) throw ShapeError("conv input channel mismatch");
  Tensor y(cout_, x.h, x.w);
  forward(theta, x.data(), x.h, x.w, y.data());
  return y;
}

DenseSubnet::DenseSubnet(ParamStore& store, int channels, int growth, int layers)
    : channels_(channels), growth_(growth) {
  if (layers < 1) throw ArgumentError("dense block needs at least one layer");
  for (int k = 0; k < layers; ++k) {
    const int in = channels + k * growth;
    const int out = k + 1 == layers ? channels : growth;
    convs_.emplace_back(store, in, out, 3);
  }
  mix_ = Conv2d(store, channels, channels, 1);
}

Tensor DenseSubnet::forward(std::span<const double> theta, const Tensor& x, Cache* cache) const {
  if (x.c != channels_) throw ShapeError("subnet input channel mismatch");
  const int hidden = static_cast<int>(convs_.size()) - 1;
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.features = Tensor(channels_ + hidden * growth_, x.h, x.w);
  std::copy(x.v.begin(), x.v.end(), c.features.v.begin());
  c.pre.assign(static_cast<std::size_t>(hidden), Tensor());
  for (int k = 0; k < hidden; ++k) {
    Tensor& z = c.pre[static_cast<std::size_t>(k)];
    z = Tensor(growth_, x.h, x.w);
    convs_[static_cast<std::size_t>(k)].forward(theta, c.features.data(), x.h, x.w, z.data());
    double* a = c.features.channel(channels_ + k * growth_);
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = silu(z.v[i]);
  }
  c.last = Tensor(channels_, x.h, x.w);
  convs_.back().forward(theta, c.features.data(), x.h, x.w, c.last.data());
  Tensor y(channels_, x.h, x.w);
  mix_.forward(theta, c.last.data(), x.h, x.w, y.data());
  return y;
}

Tensor DenseSubnet::backward(std::span<const double> theta, const Cache& c, const Tensor& dy,
                             std::span<double> grad) const {
  const int h = dy.h, w = dy.w;
  const int hidden = static_cast<int>(convs_.size()) - 1;
  Tensor dlast(channels_, h, w);
  mix_.backward(theta, c.last.data(), h, w, dy.data(), grad, dlast.data());
  Tensor dfeat(c.features.c, h, w);
  convs_.back().backward(theta, c.features.data(), h, w, dlast.data(), grad, dfeat.data());
  Tensor dz(growth_, h, w);
  for (int k = hidden - 1; k >= 0; --k) {
    const Tensor& z = c.pre[static_cast<std::size_t>(k)];
    const double* da = dfeat.channel(channels_ + k * growth_);
    for (std::size_t i = 0; i < dz.size(); ++i) dz.v[i] = da[i] * silu_grad(z.v[i]);
    // Layer k only reads the first channels_ + k*growth_ planes.
    convs_[static_cast<std::size_t>(k)].backward(theta, c.features.data(), h, w, dz.data(), grad,
                                                 dfeat.data());
  }
  Tensor dx(channels_, h, w);
  std::copy(dfeat.v.begin(), dfeat.v.begin() + static_cast<std::ptrdiff_t>(dx.size()), dx.v.begin());
  return dx;
}

void DenseSubnet::init(std::span<double> theta, std::mt19937_64& rng, double output_scale) const {
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    convs_[k].init(theta, rng, k + 1 == convs_.size() ? output_scale : std::sqrt(3.0));
  }
  // Mixing starts at identity so the dense output passes straight through.
  const std::size_t off = mix_.weight_offset();
  for (int o = 0; o < channels_; ++o) {
    for (int i = 0; i < channels_; ++i) theta[off + static_cast<std::size_t>(o) * channels_ + i] = o == i;
  }
  std::fill_n(theta.begin() + static_cast<std::ptrdiff_t>(mix_.bias_offset()), channels_, 0.0);
}

}  // namespace chartseal::nn
