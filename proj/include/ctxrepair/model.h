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

#ifndef CTXREPAIR_MODEL_H_
#define CTXREPAIR_MODEL_H_

#include <atomic>
#include <functional>
#include <string>
#include <vector>

#include "ctxrepair/context_graph.h"
#include "ctxrepair/layers.h"

namespace ctxrepair {

// Which evidence the repairer sees.
enum class ModelMode {
  kFull,         // "OS": graph attention + environment contexts
  kContextOnly,  // "O": contexts, graph attention replaced by identity
  kGraphOnly,    // "S": graph attention, context vector fixed at zero
};

std::string mode_name(ModelMode m);
ModelMode parse_mode(const std::string& s);

struct ConvSpec {
  int kernel = 3;
  int channels = 16;
  Activation activation = Activation::kRelu;
};

// Per-cell input channels of the context encoder:
//   pre appearance, pre depth, post appearance, post depth,
//   goal overlay (pre frame), goal overlay (post frame), run residual,
//   segment motion, unreached flag. Residual and motion are constant across
//   cells.
int context_channels(const ViewSpec& view);

struct ModelConfig {
  int vocab_size = vocab::kSize;
  int d = 32;
  ViewSpec view;
  std::vector<ConvSpec> conv = {{3, 16, Activation::kRelu},
                                {3, 32, Activation::kRelu}};
  double leaky_slope = 0.2;
  ModelMode mode = ModelMode::kFull;
};

struct ModelParams {
  ModelConfig config;
  Tensor token_embedding;  // [V, d]
  Tensor type_embedding;   // [kinds, d]
  Tensor mask_embedding;   // [1, d], stands in for the predicted position
  std::vector<ConvLayer> conv;
  GatParams gat;
  Tensor cls_w;  // [V, d + d_obs]
  Tensor cls_b;  // [V]

  int d_obs() const { return conv.back().c_out(); }

  // Named view over every trainable tensor, in a fixed order.
  std::vector<std::pair<std::string, Tensor*>> tensors();
  std::vector<std::pair<std::string, const Tensor*>> tensors() const;

  bool all_finite() const;
};

// Xavier-uniform weights, zero biases, zero classifier (uniform predictions).
ModelParams init_params(const ModelConfig& config, uint64_t seed);

// Same shapes as `p`, all zeros.
ModelParams zeros_like(const ModelParams& p);

// One training or inference instance: a candidate program's graph plus the
// encoder input of every segment, for one or more I/O pairs.
struct Example {
  ProgramGraph graph;
  std::vector<std::vector<int>> segment_nodes;  // nodes of each segment
  // [pair][segment]; embeddings are averaged across pairs.
  std::vector<std::vector<FeatureMap>> segment_inputs;
  std::vector<int> targets;  // gold vocab id per node
};

// Packs a context into the encoder input layout of context_channels().
FeatureMap encode_context(const EnvContext& ctx);

// `captures` holds one capture per I/O pair. With `gold`, targets are the
// gold tokens at each node; otherwise targets are the candidate's own.
Example build_example(const Program& candidate,
                      const std::vector<const ContextCapture*>& captures,
                      const Program* gold = nullptr);

// Counters proving which inputs a mode reads.
struct Instrumentation {
  std::atomic<long> edge_reads{0};
  std::atomic<long> observation_reads{0};
  void reset() {
    edge_reads = 0;
    observation_reads = 0;
  }
};
Instrumentation& instrumentation();

// Distribution over the vocabulary for every node, each computed with that
// node's own embedding replaced by the mask embedding.
std::vector<std::vector<double>> predict_nodes(const ModelParams& params,
                                               const Example& ex);

// Nested-average cross-entropy
//   L = -1/N sum_i 1/T_i sum_t 1/L_t sum_{s in t} log p(target_s)
// When `grads` is non-null, accumulates dL/dtheta into it.
double batch_loss(const ModelParams& params, const std::vector<Example>& batch,
                  ModelParams* grads = nullptr);
double batch_loss(const ModelParams& params,
                  const std::vector<const Example*>& batch,
                  ModelParams* grads = nullptr);

// Contribution of one example with weight `scale` (1/N in batch_loss).
double example_loss(const ModelParams& params, const Example& ex, double scale,
                    ModelParams* grads);

// Checkpoints: JSON tensor dump with shapes (see docs/checkpoint.md).
void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& extra_json = "{}");
ModelParams load_checkpoint(const std::string& path);

}  // namespace ctxrepair

#endif  // CTXREPAIR_MODEL_H_
