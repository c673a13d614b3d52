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

#ifndef CTXREPAIR_TENSOR_H_
#define CTXREPAIR_TENSOR_H_

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxrepair/dsl.h"

namespace ctxrepair {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  int numel() const { return static_cast<int>(data.size()); }
  int dim(int i) const { return shape.at(i); }

  double& operator()(int r, int c) { return data[r * shape[1] + c]; }
  double operator()(int r, int c) const { return data[r * shape[1] + c]; }
  std::span<double> row(int r) {
    return {data.data() + r * shape[1], static_cast<size_t>(shape[1])};
  }
  std::span<const double> row(int r) const {
    return {data.data() + r * shape[1], static_cast<size_t>(shape[1])};
  }

  void zero() { std::fill(data.begin(), data.end(), 0.0); }
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Xavier/Glorot uniform with the given fan-in and fan-out.
void xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng);

// y = W x for W of shape [rows, cols] restricted to columns
// [col_begin, col_begin + x.size()).
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y,
            int col_begin = 0);
// x += W^T y over the same column block.
void matvec_t_add(const Tensor& w, std::span<const double> y,
                  std::span<double> x, int col_begin = 0);
// G[:, col_begin:] += y x^T
void outer_add(Tensor& g, std::span<const double> y, std::span<const double> x,
               int col_begin = 0);

double dot(std::span<const double> a, std::span<const double> b);

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace ctxrepair

#endif  // CTXREPAIR_TENSOR_H_
