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

#include "ctxrepair/model.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ctxrepair/serialization.h"

namespace ctxrepair {


std::string mode_name(ModelMode m) {
  switch (m) {
    case ModelMode::kFull: return "OS";
    case ModelMode::kContextOnly: return "O";
    case ModelMode::kGraphOnly: return "S";
  }
  return "?";
}

ModelMode parse_mode(const std::string& s) {
  if (s == "OS" || s == "full") return ModelMode::kFull;
  if (s == "O") return ModelMode::kContextOnly;
  if (s == "S") return ModelMode::kGraphOnly;
  throw std::invalid_argument("unknown mode '" + s + "' (expected OS, O or S)");
}

int context_channels(const ViewSpec& view) {
  return 2 * (view.n_c + 1) + 2 * kGoalChannels + 2 * kResidualFeatures + 1;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Tensor*>> out = {
      {"token_embedding", &token_embedding},
      {"type_embedding", &type_embedding},
      {"mask_embedding", &mask_embedding},
  };
  for (size_t l = 0; l < conv.size(); ++l) {
    out.emplace_back("conv" + std::to_string(l) + ".kernel", &conv[l].kernel);
    out.emplace_back("conv" + std::to_string(l) + ".bias", &conv[l].bias);
  }
  out.emplace_back("gat.w", &gat.w);
  out.emplace_back("gat.a", &gat.a);
  out.emplace_back("classifier.w", &cls_w);
  out.emplace_back("classifier.b", &cls_b);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::tensors()
    const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<ModelParams*>(this)->tensors()) {
    out.emplace_back(name, t);
  }
  return out;
}

bool ModelParams::all_finite() const {
  for (auto& [name, t] : tensors()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

namespace {

ModelParams shaped(const ModelConfig& cfg) {
  ModelParams p;
  p.config = cfg;
  const int d = cfg.d;
  p.token_embedding = Tensor({cfg.vocab_size, d});
  p.type_embedding = Tensor({kNumTokenKinds, d});
  p.mask_embedding = Tensor({1, d});
  int cin = context_channels(cfg.view);
  for (const ConvSpec& s : cfg.conv) {
    ConvLayer layer;
    layer.kernel = Tensor({s.channels, s.kernel, s.kernel, cin});
    layer.bias = Tensor({s.channels});
    layer.activation = s.activation;
    p.conv.push_back(std::move(layer));
    cin = s.channels;
  }
  p.gat.w = Tensor({d, 2 * d});
  p.gat.a = Tensor({d});
  p.gat.slope = cfg.leaky_slope;
  p.cls_w = Tensor({cfg.vocab_size, d + p.d_obs()});
  p.cls_b = Tensor({cfg.vocab_size});
  return p;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
  if (cfg.conv.empty()) throw std::invalid_argument("model needs a conv layer");
  ModelParams p = shaped(cfg);
  Rng rng(seed);
  const int d = cfg.d;
  xavier_uniform(p.token_embedding, cfg.vocab_size, d, rng);
  xavier_uniform(p.type_embedding, kNumTokenKinds, d, rng);
  xavier_uniform(p.mask_embedding, 1, d, rng);
  for (ConvLayer& l : p.conv) {
    int fan_in = l.k_h() * l.k_w() * l.c_in();
    int fan_out = l.k_h() * l.k_w() * l.c_out();
    xavier_uniform(l.kernel, fan_in, fan_out, rng);
  }
  xavier_uniform(p.gat.w, 2 * d, d, rng);
  xavier_uniform(p.gat.a, d, 1, rng);
  // Classifier starts at zero so the initial prediction is uniform.
  return p;
}

ModelParams zeros_like(const ModelParams& p) { return shaped(p.config); }

Instrumentation& instrumentation() {
  static Instrumentation inst;
  return inst;
}

// ---------------------------------------------------------------------------
// Features

FeatureMap encode_context(const EnvContext& ctx) {
  const Observation& pre = ctx.pre;
  const Observation& post = ctx.post;
  const int n_c = pre.n_c;
  const int channels = context_channels({pre.n_h, pre.n_w, n_c});
  FeatureMap fm(pre.n_h, pre.n_w, channels);
  for (int r = 0; r < pre.n_h; ++r) {
    for (int c = 0; c < pre.n_w; ++c) {
      const int cell = r * pre.n_w + c;
      int ch = 0;
      for (int k = 0; k < n_c; ++k) fm.at(r, c, ch++) = pre.app(r, c, k);
      fm.at(r, c, ch++) = pre.depth[cell];
      for (int k = 0; k < n_c; ++k) fm.at(r, c, ch++) = post.app(r, c, k);
      fm.at(r, c, ch++) = post.depth[cell];
      for (int k = 0; k < kGoalChannels; ++k) {
        double v = ctx.goal_pre.empty() || !pre.valid[cell]
                       ? 0.0
                       : ctx.goal_pre[cell * kGoalChannels + k];
        fm.at(r, c, ch++) = v;
      }
      for (int k = 0; k < kGoalChannels; ++k) {
        double v = ctx.goal_post.empty() || !post.valid[cell]
                       ? 0.0
                       : ctx.goal_post[cell * kGoalChannels + k];
        fm.at(r, c, ch++) = v;
      }
      for (int k = 0; k < kResidualFeatures; ++k) {
        fm.at(r, c, ch++) = ctx.residual.empty() ? 0.0 : ctx.residual[k];
      }
      for (int k = 0; k < kResidualFeatures; ++k) {
        fm.at(r, c, ch++) = ctx.motion.empty() ? 0.0 : ctx.motion[k];
      }
      fm.at(r, c, ch++) = ctx.unreached ? 1.0 : 0.0;
    }
  }
  return fm;
}

Example build_example(const Program& candidate,
                      const std::vector<const ContextCapture*>& captures,
                      const Program* gold) {
  Example ex;
  ex.graph = build_graph(candidate);
  const int T = static_cast<int>(extract_segments(candidate).size());
  ex.segment_nodes.assign(T, {});
  for (int i = 0; i < ex.graph.size(); ++i) {
    ex.segment_nodes[ex.graph.nodes[i].segment_id].push_back(i);
  }
  for (const ContextCapture* cap : captures) {
    if (static_cast<int>(cap->contexts.size()) != T) {
      throw std::invalid_argument("build_example: context count != segments");
    }
    std::vector<FeatureMap> inputs;
    inputs.reserve(T);
    for (const EnvContext& ctx : cap->contexts) inputs.push_back(encode_context(ctx));
    ex.segment_inputs.push_back(std::move(inputs));
  }
  if (gold) {
    const std::vector<int> cand_ids = token_ids(candidate);
    const std::vector<int> gold_ids = token_ids(*gold);
    if (cand_ids.size() != gold_ids.size()) {
      throw std::invalid_argument("build_example: gold differs in structure");
    }
    for (size_t t = 0; t < cand_ids.size(); ++t) {
      // Bracket names may differ after an if <-> while swap.
      bool delim = vocab::token(cand_ids[t]).kind == TokenKind::kDelimiter;
      bool gold_delim = vocab::token(gold_ids[t]).kind == TokenKind::kDelimiter;
      if (delim != gold_delim) {
        throw std::invalid_argument("build_example: gold differs in structure");
      }
    }
    for (const GraphNode& n : ex.graph.nodes) ex.targets.push_back(gold_ids[n.token_index]);
  } else {
    for (const GraphNode& n : ex.graph.nodes) ex.targets.push_back(n.token.vocab_id);
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct ForwardPass {
  std::vector<std::vector<double>> obs;           // [segment][d_obs]
  std::vector<std::vector<ConvCache>> conv_cache;  // [pair][segment]
  std::vector<std::vector<double>> base;          // [node][d]
  std::vector<std::vector<double>> masked;        // [node][d]
  std::vector<GatNodeCache> gat;
  std::vector<std::vector<double>> fused;   // [node][d + d_obs]
  std::vector<std::vector<double>> logits;  // [node][V]
};

bool uses_graph(ModelMode m) { return m != ModelMode::kContextOnly; }
bool uses_context(ModelMode m) { return m != ModelMode::kGraphOnly; }

ForwardPass forward(const ModelParams& p, const Example& ex, bool keep_cache) {
  const ModelMode mode = p.config.mode;
  const int d = p.config.d;
  const int d_obs = p.d_obs();
  const int n = ex.graph.size();
  const int T = static_cast<int>(ex.segment_nodes.size());
  ForwardPass f;

  f.obs.assign(T, std::vector<double>(d_obs, 0.0));
  if (uses_context(mode)) {
    const int pairs = static_cast<int>(ex.segment_inputs.size());
    if (pairs == 0) throw std::invalid_argument("example has no contexts");
    instrumentation().observation_reads += static_cast<long>(pairs) * T;
    if (keep_cache) f.conv_cache.assign(pairs, std::vector<ConvCache>(T));
    for (int q = 0; q < pairs; ++q) {
      for (int t = 0; t < T; ++t) {
        auto o = conv_forward(p.conv, ex.segment_inputs[q][t],
                              keep_cache ? &f.conv_cache[q][t] : nullptr);
        for (int k = 0; k < d_obs; ++k) f.obs[t][k] += o[k] / pairs;
      }
    }
  }

  f.base.assign(n, std::vector<double>(d));
  f.masked.assign(n, std::vector<double>(d));
  for (int i = 0; i < n; ++i) {
    const GraphNode& node = ex.graph.nodes[i];
    auto tok = p.token_embedding.row(node.token.vocab_id);
    auto type = p.type_embedding.row(static_cast<int>(node.type_tag));
    auto mask = p.mask_embedding.row(0);
    for (int k = 0; k < d; ++k) {
      f.base[i][k] = tok[k] + type[k];
      f.masked[i][k] = mask[k] + type[k];
    }
  }

  f.gat.resize(n);
  f.fused.assign(n, std::vector<double>(d + d_obs));
  f.logits.assign(n, std::vector<double>(p.config.vocab_size));
  for (int i = 0; i < n; ++i) {
    std::vector<double> h;
    if (uses_graph(mode)) {
      const auto& nb = ex.graph.neighbors[i];
      instrumentation().edge_reads += static_cast<long>(nb.size());
      std::vector<std::span<const double>> nbrs;
      nbrs.reserve(nb.size());
      for (int j : nb) nbrs.push_back(f.base[j]);
      h = gat_node_forward(f.masked[i], nbrs, p.gat,
                           keep_cache ? &f.gat[i] : nullptr);
    } else {
      h = f.masked[i];
    }
    std::copy(h.begin(), h.end(), f.fused[i].begin());
    const auto& o = f.obs[ex.graph.nodes[i].segment_id];
    std::copy(o.begin(), o.end(), f.fused[i].begin() + d);
    matvec(p.cls_w, f.fused[i], f.logits[i]);
    for (int v = 0; v < p.config.vocab_size; ++v) f.logits[i][v] += p.cls_b.data[v];
  }
  return f;
}

double log_sum_exp(const std::vector<double>& z) {
  double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

std::vector<std::vector<double>> predict_nodes(const ModelParams& params,
                                               const Example& ex) {
  ForwardPass f = forward(params, ex, false);
  std::vector<std::vector<double>> out;
  out.reserve(f.logits.size());
  for (const auto& z : f.logits) out.push_back(softmax(z));
  return out;
}

double example_loss(const ModelParams& p, const Example& ex, double scale,
                    ModelParams* grads) {
  const ModelMode mode = p.config.mode;
  const int d = p.config.d;
  const int d_obs = p.d_obs();
  const int V = p.config.vocab_size;
  const int n = ex.graph.size();
  const int T = static_cast<int>(ex.segment_nodes.size());
  if (static_cast<int>(ex.targets.size()) != n) {
    throw std::invalid_argument("example targets do not cover all nodes");
  }
  ForwardPass f = forward(p, ex, grads != nullptr);

  double loss = 0.0;
  std::vector<std::vector<double>> d_obs_seg(T, std::vector<double>(d_obs, 0.0));
  std::vector<std::vector<double>> d_base(n, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> d_masked(n, std::vector<double>(d, 0.0));
  for (int t = 0; t < T; ++t) {
    const auto& nodes = ex.segment_nodes[t];
    if (nodes.empty()) continue;
    const double w = scale / (T * static_cast<double>(nodes.size()));
    for (int i : nodes) {
      const int target = ex.targets[i];
      const double lse = log_sum_exp(f.logits[i]);
      loss -= w * (f.logits[i][target] - lse);
      if (!grads) continue;
      std::vector<double> dz(V);
      for (int v = 0; v < V; ++v) dz[v] = w * std::exp(f.logits[i][v] - lse);
      dz[target] -= w;
      std::vector<double> dx(d + d_obs, 0.0);
      classifier_backward(f.fused[i], p.cls_w, dz, grads->cls_w, grads->cls_b, dx);
      for (int k = 0; k < d_obs; ++k) d_obs_seg[t][k] += dx[d + k];
      std::span<const double> dh(dx.data(), d);
      if (uses_graph(mode)) {
        const auto& nb = ex.graph.neighbors[i];
        std::vector<std::span<const double>> nbrs;
        std::vector<std::span<double>> d_nbrs;
        for (int j : nb) {
          nbrs.push_back(f.base[j]);
          d_nbrs.push_back(d_base[j]);
        }
        gat_node_backward(f.masked[i], nbrs, p.gat, f.gat[i], dh, grads->gat,
                          d_masked[i], d_nbrs);
      } else {
        for (int k = 0; k < d; ++k) d_masked[i][k] += dh[k];
      }
    }
  }
  if (!grads) return loss;

  for (int i = 0; i < n; ++i) {
    const GraphNode& node = ex.graph.nodes[i];
    auto tok = grads->token_embedding.row(node.token.vocab_id);
    auto type = grads->type_embedding.row(static_cast<int>(node.type_tag));
    auto mask = grads->mask_embedding.row(0);
    for (int k = 0; k < d; ++k) {
      tok[k] += d_base[i][k];
      type[k] += d_base[i][k] + d_masked[i][k];
      mask[k] += d_masked[i][k];
    }
  }
  if (uses_context(mode)) {
    const int pairs = static_cast<int>(ex.segment_inputs.size());
    for (int q = 0; q < pairs; ++q) {
      for (int t = 0; t < T; ++t) {
        std::vector<double> g(d_obs_seg[t]);
        for (double& v : g) v /= pairs;
        conv_backward(p.conv, f.conv_cache[q][t], g, grads->conv);
      }
    }
  }
  return loss;
}

double batch_loss(const ModelParams& params,
                  const std::vector<const Example*>& batch, ModelParams* grads) {
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Example* ex : batch) loss += example_loss(params, *ex, scale, grads);
  return loss;
}

double batch_loss(const ModelParams& params, const std::vector<Example>& batch,
                  ModelParams* grads) {
  std::vector<const Example*> ptrs;
  for (const Example& ex : batch) ptrs.push_back(&ex);
  return batch_loss(params, ptrs, grads);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointFormat = "ctxrepair-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& extra_json) {
  Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = to_json(params.config);
  j["extra"] = Json::parse(extra_json);
  Json tensors = Json::array();
  for (auto& [name, t] : params.tensors()) {
    tensors.push_back({{"name", name}, {"shape", t->shape}, {"data", t->data}});
  }
  j["tensors"] = tensors;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << j.dump() << "\n";
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) {
    throw std::runtime_error(path + ": not a ctxrepair checkpoint");
  }
  if (j.at("version") != kCheckpointVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version");
  }
  ModelConfig cfg;
  from_json(j.at("config"), cfg);
  ModelParams p = shaped(cfg);
  auto named = p.tensors();
  const Json& tensors = j.at("tensors");
  if (tensors.size() != named.size()) {
    throw std::runtime_error(path + ": tensor count mismatch");
  }
  for (size_t i = 0; i < named.size(); ++i) {
    const Json& t = tensors[i];
    if (t.at("name") != named[i].first ||
        t.at("shape").get<std::vector<int>>() != named[i].second->shape) {
      throw std::runtime_error(path + ": unexpected tensor " +
                               t.at("name").get<std::string>());
    }
    const size_t expected = named[i].second->data.size();  // from the shape
    named[i].second->data = t.at("data").get<std::vector<double>>();
    if (named[i].second->data.size() != expected) {
      throw std::runtime_error(path + ": bad tensor size");
    }
  }
  return p;
}

}  // namespace ctxrepair
