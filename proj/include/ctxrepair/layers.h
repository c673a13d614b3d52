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

#ifndef CTXREPAIR_LAYERS_H_
#define CTXREPAIR_LAYERS_H_

#include <span>
#include <vector>

#include "ctxrepair/context_graph.h"
#include "ctxrepair/tensor.h"

// Differentiable kernels with hand-written backward passes. Every backward
// accumulates (+=) into the gradient buffers it is given.

namespace ctxrepair {

// ---------------------------------------------------------------------------
// Convolution

enum class Activation { kLinear, kRelu };

struct FeatureMap {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> data;  // HWC

  FeatureMap() = default;
  FeatureMap(int h_, int w_, int c_) : h(h_), w(w_), c(c_), data(h_ * w_ * c_, 0.0) {}
  double& at(int y, int x, int ch) { return data[(y * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return data[(y * w + x) * c + ch]; }
};

// Valid (unpadded) convolution:
//   out[y, x, o] = g(sum_{i,j,c} K[o, i, j, c] * in[y + i, x + j, c] + b[o])
struct ConvLayer {
  Tensor kernel;  // [c_out, k_h, k_w, c_in]
  Tensor bias;    // [c_out]
  Activation activation = Activation::kRelu;

  int c_out() const { return kernel.dim(0); }
  int k_h() const { return kernel.dim(1); }
  int k_w() const { return kernel.dim(2); }
  int c_in() const { return kernel.dim(3); }
};

struct ConvCache {
  std::vector<FeatureMap> inputs;  // input of each layer
  std::vector<FeatureMap> pre;     // pre-activation of each layer
};

// Runs the stack and global-average-pools each output channel.
std::vector<double> conv_forward(const std::vector<ConvLayer>& stack,
                                 const FeatureMap& input,
                                 ConvCache* cache = nullptr);

// d_pooled -> parameter gradients (same layout as `stack`) and optionally the
// input gradient.
void conv_backward(const std::vector<ConvLayer>& stack, const ConvCache& cache,
                   std::span<const double> d_pooled,
                   std::vector<ConvLayer>& grads,
                   FeatureMap* d_input = nullptr);

// ---------------------------------------------------------------------------
// Graph attention
//
// W = [W_self | W_nbr] is d x 2d so that W [h_i || h_k] = W_self h_i +
// W_nbr h_k. Scores e_k = A^T LeakyReLU(W [h_i || h_k]) are soft-maxed over
// {i} ∪ N_i and the node update is h_i' = sum_k alpha_k W_nbr h_k.

struct GatParams {
  Tensor w;  // [d, 2d]
  Tensor a;  // [d]
  double slope = 0.2;

  int d() const { return w.dim(0); }
};

// Attention weights, self first, then neighbours in the given order.
std::vector<double> gat_scores(std::span<const double> h_i,
                               const std::vector<std::span<const double>>& nbrs,
                               const GatParams& p);

struct GatNodeCache {
  std::vector<std::vector<double>> u;    // pre-activation W [h_i || h_k]
  std::vector<std::vector<double>> msg;  // W_nbr h_k
  std::vector<double> alpha;
};

// Output of one node; `nbrs` excludes the node itself.
std::vector<double> gat_node_forward(
    std::span<const double> h_i,
    const std::vector<std::span<const double>>& nbrs, const GatParams& p,
    GatNodeCache* cache = nullptr);

void gat_node_backward(std::span<const double> h_i,
                       const std::vector<std::span<const double>>& nbrs,
                       const GatParams& p, const GatNodeCache& cache,
                       std::span<const double> d_out, GatParams& grads,
                       std::span<double> d_h_i,
                       const std::vector<std::span<double>>& d_nbrs);

// Whole-graph pass: row i of the result is gat_node_forward of node i over
// its neighbourhood. H is [n, d].
Tensor gat_forward(const std::vector<std::vector<int>>& neighbors,
                   const Tensor& H, const GatParams& p);

// ---------------------------------------------------------------------------
// Classifier

// softmax(C x + b); C is [V, dim(x)].
std::vector<double> predict_token(std::span<const double> x, const Tensor& c,
                                  const Tensor& b);

// Given dlogits, accumulates dC, db and dx.
void classifier_backward(std::span<const double> x, const Tensor& c,
                         std::span<const double> d_logits, Tensor& d_c,
                         Tensor& d_b, std::span<double> d_x);

double leaky_relu(double v, double slope);

}  // namespace ctxrepair

#endif  // CTXREPAIR_LAYERS_H_
