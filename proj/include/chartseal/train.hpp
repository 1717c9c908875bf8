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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "chartseal/degrade.hpp"
#include "chartseal/image.hpp"
#include "chartseal/inn.hpp"

namespace chartseal {

struct TrainConfig {
  double alpha = 100.0;
  double beta = 1.0;
  double learning_rate = 1e-4;
  int iterations = 1000;
  int batch_size = 4;
  std::uint64_t seed = 0;
  std::vector<DegradationSampler> degradation_schedule = {
      {DegradationSampler::Kind::kNone, 0.0, 0.0},
      {DegradationSampler::Kind::kGaussian, 0.0, 0.04},
      {DegradationSampler::Kind::kJpeg, 70.0, 95.0},
  };
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_path;
  // Shift the location map by a random even offset per sample so the reveal
  // path has to read the embedded signal instead of memorizing positions.
  bool randomize_map_offset = true;
  // Cycle the schedule inside each batch (sample k of iteration i gets entry
  // (i * batch + k) mod size) instead of drawing one channel per batch.
  bool mix_channels_in_batch = false;
  // Cosine decay from learning_rate to learning_rate * final_lr_fraction.
  bool cosine_decay = false;
  double final_lr_fraction = 0.05;

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double enc = 0.0;  // mean squared error (protected vs cover)
  double ext = 0.0;  // mean absolute error (revealed map vs map)
};

inline LossBreakdown combine_loss(double alpha, double beta, double enc, double ext) {
  return {alpha * enc + beta * ext, enc, ext};
}

struct TrainingSample {
  ImageTensor cover;
  ImageTensor map;
  Degradation degradation;
};

// embed -> channel -> reveal, loss only. The extraction term is measured on the
// revealed map before its final clamp.
LossBreakdown compute_loss(const InnModel& model, const ImageTensor& cover, const ImageTensor& map,
                           const Degradation& deg, double alpha = 100.0, double beta = 1.0);

// Same forward pass, plus the analytic gradient accumulated into grad
// (length = parameter count).
LossBreakdown loss_and_gradient(const InnModel& model, const ImageTensor& cover,
                                const ImageTensor& map, const Degradation& deg, double alpha,
                                double beta, std::span<double> grad);

class AdamState {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit AdamState(std::size_t n = 0) : m_(n, 0.0), v_(n, 0.0) {}
  void update(std::span<double> params, std::span<const double> grad, double lr);
  std::int64_t steps() const { return t_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

// Mean batch loss, gradient in fixed sample order, one Adam update.
// Throws DivergenceError (parameters untouched) on a non-finite loss or gradient.
LossBreakdown step(InnModel& model, std::span<const TrainingSample> batch, const TrainConfig& cfg,
                   AdamState& adam);
LossBreakdown step(InnModel& model, std::span<const TrainingSample> batch, const TrainConfig& cfg,
                   AdamState& adam, double learning_rate);

// Step size used at iteration it (0-based) under cfg's schedule.
double learning_rate_at(const TrainConfig& cfg, int it);

struct TrainRecord {
  int iteration = 0;
  LossBreakdown loss;
};

// Full training loop over a fixed set of covers. Writes one
// "iteration enc ext total" line per step to log when given. On divergence the
// last good parameters are restored (and checkpointed when a path is set)
// before the DivergenceError propagates.
std::vector<TrainRecord> train(InnModel& model, std::span<const ImageTensor> covers,
                               const MapPattern& pattern, const TrainConfig& cfg,
                               std::ostream* log = nullptr);

struct GradcheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradcheckOptions {
  double step = 1e-3;
  double fraction = 0.05;
  std::uint64_t seed = 7;
  double alpha = 100.0;
  double beta = 1.0;
  std::size_t max_parameters = 5000;
  // Test hook: lets a caller corrupt the analytic gradient before comparison.
  std::function<void(std::span<double>)> tamper_gradient;
};

// Central finite differences on a random subset of parameters, no
// degradation. rel_error = |a - n| / max(1e-8, |a| + |n|).
GradcheckReport gradcheck(const InnModel& model, const ImageTensor& cover, const ImageTensor& map,
                          double tolerance, const GradcheckOptions& opts = {});

}  // namespace chartseal
