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

#include "chartseal/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "chartseal/errors.hpp"

namespace chartseal {

namespace {
void require_same(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("tensor shape mismatch");
}
}  // namespace

Tensor& Tensor::operator+=(const Tensor& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& x : v) x *= s;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace chartseal
