// Copyright 2026 The ctxrepair Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctxrepair/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace ctxrepair {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  int n = std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
  data.assign(n, 0.0);
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v); });
}

void xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (double& v : t.data) v = u(rng);
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y,
            int col_begin) {
  const int cols = w.shape[1];
  const int n = static_cast<int>(x.size());
  for (int r = 0; r < static_cast<int>(y.size()); ++r) {
    const double* row = w.data.data() + r * cols + col_begin;
    double acc = 0.0;
    for (int c = 0; c < n; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_add(const Tensor& w, std::span<const double> y,
                  std::span<double> x, int col_begin) {
  const int cols = w.shape[1];
  const int n = static_cast<int>(x.size());
  for (int r = 0; r < static_cast<int>(y.size()); ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    const double* row = w.data.data() + r * cols + col_begin;
    for (int c = 0; c < n; ++c) x[c] += row[c] * yr;
  }
}

void outer_add(Tensor& g, std::span<const double> y, std::span<const double> x,
               int col_begin) {
  const int cols = g.shape[1];
  const int n = static_cast<int>(x.size());
  for (int r = 0; r < static_cast<int>(y.size()); ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    double* row = g.data.data() + r * cols + col_begin;
    for (int c = 0; c < n; ++c) row[c] += yr * x[c];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace ctxrepair
