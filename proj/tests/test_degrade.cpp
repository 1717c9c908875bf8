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
#include <random>

#include "chartseal/degrade.hpp"
#include "chartseal/errors.hpp"

using namespace chartseal;

namespace {

ImageTensor random_image(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageTensor img(h, w, c);
  for (auto& v : img.data) v = u(rng);
  return img;
}

}  // namespace

TEST(Degrade, NoneAndZeroSigmaAreIdentity) {
  auto img = random_image(8, 8, 3, 1);
  EXPECT_EQ(apply(Degradation{NoDegradation{}, 1}, img), img);
  EXPECT_EQ(apply(Degradation{GaussianNoise{0.0}, 1}, img), img);
}

TEST(Degrade, GaussianStatistics) {
  ImageTensor img(256, 256, 1, 0.5);
  auto out = apply(Degradation{GaussianNoise{0.05}, 42}, img);
  double mean = 0, sq = 0;
  for (double v : out.data) mean += v;
  mean /= out.size();
  for (double v : out.data) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / out.size());
  EXPECT_GT(mean, 0.49);
  EXPECT_LT(mean, 0.51);
  EXPECT_GE(sd, 0.045);
  EXPECT_LE(sd, 0.055);
}

TEST(Degrade, SeedDeterminism) {
  auto img = random_image(16, 16, 3, 2);
  for (const Degradation& d : {Degradation{GaussianNoise{0.1}, 5}, Degradation{PoissonNoise{50.0}, 5},
                               Degradation{JpegCompression{60}, 5}}) {
    EXPECT_EQ(apply(d, img), apply(d, img)) << describe(d);
  }
  EXPECT_NE(apply(Degradation{GaussianNoise{0.1}, 5}, img), apply(Degradation{GaussianNoise{0.1}, 6}, img));
}

TEST(Degrade, OutputStaysInRange) {
  auto img = random_image(32, 32, 3, 3);
  for (const Degradation& d : {Degradation{GaussianNoise{0.8}, 1}, Degradation{PoissonNoise{3.0}, 1},
                               Degradation{JpegCompression{5}, 1}}) {
    auto out = apply(d, img);
    ASSERT_TRUE(out.same_shape(img));
    for (double v : out.data) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Degrade, JpegPreservesGrayChannelCount) {
  auto img = random_image(16, 16, 1, 4);
  auto out = apply(Degradation{JpegCompression{90}, 0}, img);
  EXPECT_TRUE(out.same_shape(img));
}

TEST(Degrade, InvalidParameters) {
  auto img = random_image(4, 4, 3, 5);
  EXPECT_THROW(apply(Degradation{GaussianNoise{-0.1}, 0}, img), ArgumentError);
  EXPECT_THROW(apply(Degradation{GaussianNoise{1.5}, 0}, img), ArgumentError);
  EXPECT_THROW(apply(Degradation{PoissonNoise{0.0}, 0}, img), ArgumentError);
  EXPECT_THROW(apply(Degradation{JpegCompression{0}, 0}, img), ArgumentError);
  EXPECT_THROW(apply(Degradation{JpegCompression{101}, 0}, img), ArgumentError);
}

TEST(Degrade, DifferentiableForwardMatchesApply) {
  auto img = random_image(16, 16, 3, 6);
  for (const Degradation& d : {Degradation{NoDegradation{}, 0}, Degradation{GaussianNoise{0.02}, 3},
                               Degradation{JpegCompression{80}, 3}}) {
    EXPECT_EQ(apply_differentiable(d, img), apply(d, img));
  }
}

TEST(Degrade, BackwardIsIdentity) {
  auto g = random_image(8, 8, 3, 7);
  for (auto& v : g.data) v -= 0.5;
  for (const Degradation& d : {Degradation{NoDegradation{}, 0}, Degradation{GaussianNoise{0.02}, 3},
                               Degradation{JpegCompression{80}, 3}}) {
    EXPECT_EQ(channel_backward(d, g), g);
  }
}

TEST(Degrade, PoissonHasNoTrainingPath) {
  auto img = random_image(4, 4, 3, 8);
  EXPECT_THROW(apply_differentiable(Degradation{PoissonNoise{255.0}, 0}, img), ArgumentError);
  EXPECT_THROW(channel_backward(Degradation{PoissonNoise{255.0}, 0}, img), ArgumentError);
}

TEST(Degrade, SamplerStaysInRange) {
  std::mt19937_64 rng(1);
  DegradationSampler gs{DegradationSampler::Kind::kGaussian, 0.0, 0.04};
  DegradationSampler js{DegradationSampler::Kind::kJpeg, 70.0, 95.0};
  for (int i = 0; i < 200; ++i) {
    auto g = std::get<GaussianNoise>(gs.sample(rng).kind);
    EXPECT_GE(g.sigma, 0.0);
    EXPECT_LE(g.sigma, 0.04);
    auto j = std::get<JpegCompression>(js.sample(rng).kind);
    EXPECT_GE(j.quality, 70);
    EXPECT_LE(j.quality, 95);
  }
}
