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


#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "chartseal/errors.hpp"
#include "chartseal/inn.hpp"
#include "chartseal/metrics.hpp"
#include "chartseal/wavelet.hpp"

using namespace chartseal;

namespace {

InnConfig small_config() {
  InnConfig cfg;
  cfg.blocks = 2;
  cfg.growth = 4;
  cfg.pem_width = 8;
  cfg.pem_res_blocks = 1;
  return cfg;
}

ImageTensor random_image(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageTensor img(h, w, c);
  for (auto& v : img.data) v = u(rng);
  return img;
}

Tensor random_stream(int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(c, h, w);
  for (auto& v : t.v) v = u(rng);
  return t;
}

}  // namespace

TEST(LocationMap, SolidWhite) {
  auto m = realize_location_map(SolidPattern{}, 4, 4);
  for (double v : m.data) EXPECT_EQ(v, 1.0);
}

TEST(LocationMap, CheckerboardParity) {
  CheckerboardPattern p;
  p.cell = 2;
  auto m = realize_location_map(p, 4, 4);
  // (row, col) pairs from the parity rule.
  EXPECT_EQ(m.at(0, 0, 0), 0.0);
  EXPECT_EQ(m.at(0, 2, 0), 1.0);
  EXPECT_EQ(m.at(2, 0, 0), 1.0);
  EXPECT_EQ(m.at(2, 2, 0), 0.0);
  EXPECT_EQ(m.at(1, 1, 2), 0.0);
  EXPECT_EQ(m.at(3, 1, 1), 1.0);
}

TEST(LocationMap, DeterministicAndValidated) {
  CheckerboardPattern p;
  EXPECT_EQ(realize_location_map(p, 32, 48), realize_location_map(p, 32, 48));
  p.cell = 0;
  EXPECT_THROW(realize_location_map(p, 4, 4), ArgumentError);
  EXPECT_THROW(realize_location_map(SolidPattern{}, 5, 4), ShapeError);
}

TEST(Inn, ZeroModelEmbedIsIdentity) {
  InnModel model(small_config());
  auto cover = random_image(16, 16, 3, 1);
  auto map = make_location_map(CheckerboardPattern{}, 16, 16);
  auto prot = embed(model, cover, map);
  for (std::size_t i = 0; i < cover.size(); ++i) EXPECT_NEAR(prot.data[i], cover.data[i], 1e-12);
}

TEST(Inn, ZeroModelRevealKeepsCover) {
  InnModel model(small_config());
  auto img = random_image(16, 16, 3, 2);
  auto r = reveal(model, img);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(r.cover.data[i], img.data[i], 1e-12);
  ASSERT_TRUE(r.map.same_shape(img));
}

TEST(Inn, RandomModelProtectedIsClampedWithFinitePsnr) {
  InnModel model(small_config());
  model.randomize(3, 0.05);
  auto cover = random_image(64, 64, 3, 3);
  auto map = make_location_map(CheckerboardPattern{}, 64, 64);
  auto prot = embed(model, cover, map);
  for (double v : prot.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_TRUE(std::isfinite(psnr(cover, prot)));
}

TEST(Inn, StreamsInvertForRandomParameters) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    InnModel model(small_config());
    model.randomize(seed, 0.5);
    auto xc = random_stream(12, 8, 8, 100 + seed);
    auto xl = random_stream(12, 8, 8, 200 + seed);
    auto fwd = embed_streams(model, xc, xl);
    auto back = reveal_streams(model, fwd.cover, fwd.map);
    EXPECT_LT(max_abs_diff(back.cover, xc), 1e-4);
    EXPECT_LT(max_abs_diff(back.map, xl), 1e-4);
  }
}

TEST(Inn, GrayModelInverts) {
  auto cfg = small_config();
  cfg.image_channels = 1;
  InnModel model(cfg);
  model.randomize(5, 0.5);
  auto xc = random_stream(4, 6, 6, 1);
  auto xl = random_stream(4, 6, 6, 2);
  auto fwd = embed_streams(model, xc, xl);
  auto back = reveal_streams(model, fwd.cover, fwd.map);
  EXPECT_LT(max_abs_diff(back.cover, xc), 1e-4);
  EXPECT_LT(max_abs_diff(back.map, xl), 1e-4);
}

TEST(Inn, LogScaleIsBounded) {
  InnModel model(small_config());
  // Large weights push the squash into saturation.
  model.randomize(7, 20.0);
  auto x = random_stream(12, 8, 8, 3);
  x *= 50.0;
  for (const auto& b : model.blocks()) {
    auto s = b.log_scale(model.params(), x);
    for (double v : s.v) {
      EXPECT_LE(std::abs(v), b.clamp());
      EXPECT_LE(std::exp(std::abs(v)), std::exp(b.clamp()));
    }
  }
}

TEST(Posterior, PromptWeightsSumToOne) {
  InnModel model(small_config());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    model.randomize(seed, 1.0);
    auto w = prompt_weights(model, random_image(16, 16, 3, seed));
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-6);
    for (double v : w) EXPECT_GT(v, 0.0);
  }
}

TEST(Posterior, ZeroInputZeroParamsGivesZeroLatent) {
  InnModel model(small_config());
  auto latent = estimate_posterior(model, ImageTensor(16, 16, 3, 0.0));
  for (double v : latent.v) EXPECT_EQ(v, 0.0);
}

TEST(Posterior, OutputShape) {
  InnModel model(small_config());
  model.randomize(1);
  auto latent = estimate_posterior(model, random_image(12, 20, 3, 1));
  EXPECT_EQ(latent.c, 12);
  EXPECT_EQ(latent.h, 6);
  EXPECT_EQ(latent.w, 10);
}

TEST(Inn, ShapeErrors) {
  InnModel model(small_config());
  auto map = make_location_map(SolidPattern{}, 16, 16);
  EXPECT_THROW(embed(model, ImageTensor(16, 18, 3, 0.5), map), ShapeError);
  EXPECT_THROW(reveal(model, ImageTensor(15, 16, 3, 0.5)), ShapeError);
  EXPECT_THROW(reveal(model, ImageTensor(16, 16, 1, 0.5)), ShapeError);
}

TEST(Inn, ConfigValidation) {
  InnConfig cfg;
  cfg.blocks = 0;
  EXPECT_THROW(InnModel{cfg}, ArgumentError);
  cfg = InnConfig{};
  cfg.clamp = 0.0;
  EXPECT_THROW(InnModel{cfg}, ArgumentError);
  cfg = InnConfig{};
  cfg.image_channels = 2;
  EXPECT_THROW(InnModel{cfg}, ArgumentError);
}

TEST(Checkpoint, RoundTrip) {
  InnModel model(small_config());
  model.randomize(9);
  auto bytes = serialize_checkpoint(model);
  ASSERT_GE(bytes.size(), 6u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VZMK");
  auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.config(), model.config());
  ASSERT_EQ(back.parameter_count(), model.parameter_count());
  for (std::size_t i = 0; i < model.parameter_count(); ++i)
    EXPECT_EQ(back.params()[i], static_cast<double>(static_cast<float>(model.params()[i])));
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, Corruption) {
  InnModel model(small_config());
  auto bytes = serialize_checkpoint(model);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad), FormatError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(deserialize_checkpoint(truncated), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(deserialize_checkpoint(trailing), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.vzmk"), IoError);
}
