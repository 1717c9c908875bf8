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

#include "chartseal/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "chartseal/errors.hpp"
#include "chartseal/wavelet.hpp"

namespace chartseal {

void TrainConfig::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ArgumentError("alpha and beta must be positive");
  if (!(learning_rate >= 0.0)) throw ArgumentError("learning_rate must be non-negative");
  if (iterations < 0) throw ArgumentError("iterations must be non-negative");
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0)) {
    throw ArgumentError("final_lr_fraction must lie in [0, 1]");
  }
  if (degradation_schedule.empty()) throw ArgumentError("degradation schedule is empty");
  for (const auto& s : degradation_schedule) {
    if (s.kind == DegradationSampler::Kind::kPoisson) {
      throw ArgumentError("poisson noise cannot be used for training");
    }
    if (s.min > s.max) throw ArgumentError("degradation range has min > max");
  }
}

namespace {

void require_pair(const ImageTensor& cover, const ImageTensor& map) {
  if (!cover.same_shape(map)) throw ShapeError("cover and location map differ in shape");
}

// Everything the backward pass needs from one embed -> channel -> reveal run.
struct ForwardPass {
  std::vector<CouplingBlock::Cache> embed;
  std::vector<CouplingBlock::Cache> reveal;
  PosteriorEstimator::Cache pem;
  ImageTensor protected_raw;
  ImageTensor protected_img;
  ImageTensor revealed_raw;
  LossBreakdown loss;
};

ForwardPass run_forward(const InnModel& model, const ImageTensor& cover, const ImageTensor& map,
                        const Degradation& deg, double alpha, double beta, bool keep_caches) {
  require_pair(cover, map);
  const auto theta = model.params();
  const auto& blocks = model.blocks();
  ForwardPass fp;
  if (keep_caches) {
    fp.embed.resize(blocks.size());
    fp.reveal.resize(blocks.size());
  }
  CouplingBlock::Pair p{haar_forward(cover), haar_forward(map)};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    p = blocks[i].embed(theta, p.cover, p.map, keep_caches ? &fp.embed[i] : nullptr);
  }
  fp.protected_raw = haar_inverse(p.cover);
  fp.protected_img = clamp01(fp.protected_raw);

  const ImageTensor received = apply_differentiable(deg, fp.protected_img);
  const Tensor yc = haar_forward(received);
  const Tensor z = model.pem().forward(theta, yc, keep_caches ? &fp.pem : nullptr);
  CouplingBlock::Pair q{yc, z};
  for (std::size_t i = blocks.size(); i-- > 0;) {
    q = blocks[i].reveal(theta, q.cover, q.map, keep_caches ? &fp.reveal[i] : nullptr);
  }
  fp.revealed_raw = haar_inverse(q.map);

  const double n = static_cast<double>(cover.size());
  double enc = 0.0, ext = 0.0;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const double d = fp.protected_img.data[i] - cover.data[i];
    enc += d * d;
    ext += std::abs(fp.revealed_raw.data[i] - map.data[i]);
  }
  fp.loss = combine_loss(alpha, beta, enc / n, ext / n);
  return fp;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

LossBreakdown compute_loss(const InnModel& model, const ImageTensor& cover, const ImageTensor& map,
                           const Degradation& deg, double alpha, double beta) {
  return run_forward(model, cover, map, deg, alpha, beta, false).loss;
}

LossBreakdown loss_and_gradient(const InnModel& model, const ImageTensor& cover,
                                const ImageTensor& map, const Degradation& deg, double alpha,
                                double beta, std::span<double> grad) {
  if (grad.size() != model.parameter_count()) throw ShapeError("gradient buffer size mismatch");
  ForwardPass fp = run_forward(model, cover, map, deg, alpha, beta, true);
  const auto theta = model.params();
  const auto& blocks = model.blocks();
  const double n = static_cast<double>(cover.size());

  // d ext / d revealed (sign of the residual), then back through the IDWT,
  // whose adjoint is the forward Haar transform.
  ImageTensor d_revealed(cover.height, cover.width, cover.channels);
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const double r = fp.revealed_raw.data[i] - map.data[i];
    d_revealed.data[i] = beta * static_cast<double>((r > 0.0) - (r < 0.0)) / n;
  }
  const Tensor d_map0 = haar_forward(d_revealed);
  CouplingBlock::Pair d{Tensor(d_map0.c, d_map0.h, d_map0.w), d_map0};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    d = blocks[i].reveal_backward(theta, fp.reveal[i], d.cover, d.map, grad);
  }
  Tensor d_received_bands = model.pem().backward(theta, fp.pem, d.map, grad);
  d_received_bands += d.cover;
  ImageTensor d_protected = channel_backward(deg, haar_inverse(d_received_bands));

  for (std::size_t i = 0; i < cover.size(); ++i) {
    double g = d_protected.data[i] + 2.0 * alpha * (fp.protected_img.data[i] - cover.data[i]) / n;
    const double raw = fp.protected_raw.data[i];
    if (raw < 0.0 || raw > 1.0) g = 0.0;
    d_protected.data[i] = g;
  }
  const Tensor d_cover_top = haar_forward(d_protected);
  CouplingBlock::Pair e{d_cover_top, Tensor(d_cover_top.c, d_cover_top.h, d_cover_top.w)};
  for (std::size_t i = blocks.size(); i-- > 0;) {
    e = blocks[i].embed_backward(theta, fp.embed[i], e.cover, e.map, grad);
  }
  return fp.loss;
}

void AdamState::update(std::span<double> params, std::span<const double> grad, double lr) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEpsilon);
  }
}

double learning_rate_at(const TrainConfig& cfg, int it) {
  if (!cfg.cosine_decay || cfg.iterations <= 1) return cfg.learning_rate;
  const double t = static_cast<double>(it) / static_cast<double>(cfg.iterations - 1);
  const double lo = cfg.learning_rate * cfg.final_lr_fraction;
  return lo + 0.5 * (cfg.learning_rate - lo) * (1.0 + std::cos(std::numbers::pi * t));
}

LossBreakdown step(InnModel& model, std::span<const TrainingSample> batch, const TrainConfig& cfg,
                   AdamState& adam) {
  return step(model, batch, cfg, adam, cfg.learning_rate);
}

LossBreakdown step(InnModel& model, std::span<const TrainingSample> batch, const TrainConfig& cfg,
                   AdamState& adam, double learning_rate) {
  if (batch.empty()) throw ArgumentError("training batch is empty");
  std::vector<double> grad(model.parameter_count(), 0.0);
  LossBreakdown mean;
  for (const auto& s : batch) {
    const auto l = loss_and_gradient(model, s.cover, s.map, s.degradation, cfg.alpha, cfg.beta, grad);
    mean.enc += l.enc;
    mean.ext += l.ext;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  mean = combine_loss(cfg.alpha, cfg.beta, mean.enc * inv, mean.ext * inv);
  for (double& g : grad) g *= inv;
  if (!std::isfinite(mean.total) || !all_finite(grad)) {
    throw DivergenceError("non-finite loss or gradient");
  }
  adam.update(model.params(), grad, learning_rate);
  return mean;
}

std::vector<TrainRecord> train(InnModel& model, std::span<const ImageTensor> covers,
                               const MapPattern& pattern, const TrainConfig& cfg,
                               std::ostream* log) {
  cfg.validate();
  if (covers.empty()) throw ArgumentError("no training images");
  for (const auto& c : covers) {
    if (!c.same_shape(covers.front())) throw ShapeError("training images differ in shape");
  }
  const int h = covers.front().height, w = covers.front().width, ch = covers.front().channels;
  int period = 0;
  if (const auto* cb = std::get_if<CheckerboardPattern>(&pattern)) period = 2 * cb->cell;

  std::mt19937_64 rng(cfg.seed);
  AdamState adam(model.parameter_count());
  std::vector<TrainRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.iterations));
  std::vector<TrainingSample> batch(static_cast<std::size_t>(cfg.batch_size));
  std::uniform_int_distribution<std::size_t> pick(0, covers.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_channel(0, cfg.degradation_schedule.size() - 1);
  std::uniform_int_distribution<int> pick_offset(0, std::max(0, period / 2 - 1));

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::size_t batch_channel = pick_channel(rng);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto& s = batch[k];
      const std::size_t slot = cfg.mix_channels_in_batch
                                   ? (static_cast<std::size_t>(it) * batch.size() + k) %
                                         cfg.degradation_schedule.size()
                                   : batch_channel;
      const auto& sampler = cfg.degradation_schedule[slot];
      s.cover = covers[pick(rng)];
      int ox = 0, oy = 0;
      if (cfg.randomize_map_offset && period > 0) {
        ox = 2 * pick_offset(rng);
        oy = 2 * pick_offset(rng);
      }
      s.map = realize_location_map(pattern, h, w, ch, ox, oy);
      s.degradation = sampler.sample(rng);
    }
    LossBreakdown loss;
    try {
      loss = step(model, batch, cfg, adam, learning_rate_at(cfg, it));
    } catch (const DivergenceError&) {
      if (!cfg.checkpoint_path.empty()) save_checkpoint(model, cfg.checkpoint_path);
      throw;
    }
    records.push_back({it, loss});
    if (log != nullptr) {
      *log << it << ' ' << loss.enc << ' ' << loss.ext << ' ' << loss.total << '\n';
    }
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (it + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(model, cfg.checkpoint_path);
    }
  }
  return records;
}

GradcheckReport gradcheck(const InnModel& model, const ImageTensor& cover, const ImageTensor& map,
                          double tolerance, const GradcheckOptions& opts) {
  const std::size_t count = model.parameter_count();
  if (count > opts.max_parameters) {
    throw ArgumentError("gradcheck model has " + std::to_string(count) + " parameters, limit is " +
                        std::to_string(opts.max_parameters));
  }
  const Degradation none{};
  std::vector<double> grad(count, 0.0);
  loss_and_gradient(model, cover, map, none, opts.alpha, opts.beta, grad);
  if (opts.tamper_gradient) opts.tamper_gradient(grad);

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opts.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(opts.fraction * static_cast<double>(count))));
  order.resize(std::min(k, count));
  std::sort(order.begin(), order.end());

  InnModel probe = model;
  GradcheckReport report;
  for (std::size_t idx : order) {
    double& p = probe.params()[idx];
    const double saved = p;
    p = saved + opts.step;
    const double up = compute_loss(probe, cover, map, none, opts.alpha, opts.beta).total;
    p = saved - opts.step;
    const double down = compute_loss(probe, cover, map, none, opts.alpha, opts.beta).total;
    p = saved;
    GradcheckEntry e;
    e.index = idx;
    e.analytic = grad[idx];
    e.numeric = (up - down) / (2.0 * opts.step);
    e.rel_error = std::abs(e.analytic - e.numeric) /
                  std::max(1e-8, std::abs(e.analytic) + std::abs(e.numeric));
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.entries.push_back(e);
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace chartseal
