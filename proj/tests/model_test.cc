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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "ctxrepair/grad_check.h"
#include "ctxrepair/optimizer.h"
#include "ctxrepair/repair.h"

namespace ctxrepair {
namespace {

ModelConfig tiny_config(ModelMode mode) {
  ModelConfig c;
  c.d = 4;
  c.conv = {{3, 3, Activation::kRelu}, {3, 4, Activation::kRelu}};
  c.mode = mode;
  return c;
}

// Randomizes every parameter (the classifier starts at zero otherwise).
ModelParams random_params(const ModelConfig& c, uint64_t seed) {
  ModelParams p = init_params(c, seed);
  Rng rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& [name, t] : p.tensors()) {
    for (double& v : t->data) v += u(rng);
  }
  return p;
}

std::vector<IOPair> spec_for(const Program& gold, int k, uint64_t seed) {
  Rng rng(seed);
  std::vector<IOPair> spec;
  for (int i = 0; i < k; ++i) {
    WorldState in = init_world({7, 7, 0.1, 2, 1}, rng);
    spec.push_back({in, execute(gold, in).final_state});
  }
  return spec;
}

std::vector<Example> small_batch(bool all_pairs = false) {
  const char* golds[] = {
      "DEF run m( moveForward if(frontIsClear) i( turnLeft moveForward i) interact m)",
      "DEF run m( repeat(R=3) r( strafeLeft r) while(not frontIsClear) w( turnRight w) m)",
      "DEF run m( ifelse(itemPresent) i( interact i) e( moveBackward e) m)",
  };
  ContextOptions opts;
  opts.all_pairs = all_pairs;
  std::vector<Example> batch;
  uint64_t seed = 3;
  for (const char* g : golds) {
    Program gold = parse_source(g);
    Rng rng(seed);
    Candidate bad = corrupt(gold, 1, rng);
    batch.push_back(make_example(bad.program, spec_for(gold, 2, seed++), opts, &gold));
  }
  return batch;
}

TEST(ModeTest, NamesRoundTrip) {
  for (ModelMode m : {ModelMode::kFull, ModelMode::kContextOnly, ModelMode::kGraphOnly}) {
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  }
  EXPECT_EQ(parse_mode("full"), ModelMode::kFull);
  EXPECT_THROW(parse_mode("OSX"), std::invalid_argument);
}

TEST(ModelTest, InitialLossIsLogV) {
  ModelParams p = init_params(ModelConfig{}, 1);
  EXPECT_NEAR(batch_loss(p, small_batch()), std::log(36.0), 1e-12);
  EXPECT_EQ(p.cls_w.dim(1), 32 + 32);
  EXPECT_EQ(p.conv[0].c_in(), context_channels(ViewSpec{}));
}

TEST(ModelTest, ExampleLayout) {
  std::vector<Example> batch = small_batch();
  const Example& ex = batch[0];
  EXPECT_EQ(ex.graph.size(), 6);
  EXPECT_EQ(ex.segment_nodes.size(), 5u);
  ASSERT_EQ(ex.segment_inputs.size(), 1u);
  EXPECT_EQ(ex.segment_inputs[0][0].c, context_channels(ViewSpec{}));
  EXPECT_EQ(small_batch(true)[0].segment_inputs.size(), 2u);
}

// Oracle built from the individually tested primitives: masked node embedding,
// attention over unmasked neighbours, pair-averaged segment encoding,
// concatenation, softmax classifier.
std::vector<std::vector<double>> manual_predict(const ModelParams& p, const Example& ex) {
  const int d = p.config.d, d_obs = p.d_obs();
  std::vector<std::vector<double>> out;
  auto embed = [&](int i, bool masked) {
    std::vector<double> h(d);
    const GraphNode& n = ex.graph.nodes[i];
    for (int k = 0; k < d; ++k) {
      h[k] = (masked ? p.mask_embedding(0, k) : p.token_embedding(n.token.vocab_id, k)) +
             p.type_embedding(static_cast<int>(n.type_tag), k);
    }
    return h;
  };
  for (int i = 0; i < ex.graph.size(); ++i) {
    std::vector<double> hi = embed(i, true), h;
    if (p.config.mode == ModelMode::kContextOnly) {
      h = hi;
    } else {
      std::vector<std::vector<double>> nb;
      for (int j : ex.graph.neighbors[i]) nb.push_back(embed(j, false));
      std::vector<std::span<const double>> spans(nb.begin(), nb.end());
      h = gat_node_forward(hi, spans, p.gat);
    }
    std::vector<double> obs(d_obs, 0.0);
    if (p.config.mode != ModelMode::kGraphOnly) {
      for (const auto& pair : ex.segment_inputs) {
        std::vector<double> o = conv_forward(p.conv, pair[ex.graph.nodes[i].segment_id]);
        for (int k = 0; k < d_obs; ++k) obs[k] += o[k] / ex.segment_inputs.size();
      }
    }
    h.insert(h.end(), obs.begin(), obs.end());
    out.push_back(predict_token(h, p.cls_w, p.cls_b));
  }
  return out;
}

TEST(ModelTest, PredictMatchesManualComposition) {
  for (ModelMode m : {ModelMode::kFull, ModelMode::kContextOnly, ModelMode::kGraphOnly}) {
    ModelParams p = random_params(tiny_config(m), 5);
    for (const Example& ex : small_batch(true)) {
      auto got = predict_nodes(p, ex), want = manual_predict(p, ex);
      ASSERT_EQ(got.size(), want.size());
      for (size_t i = 0; i < got.size(); ++i) {
        for (size_t v = 0; v < got[i].size(); ++v) {
          EXPECT_NEAR(got[i][v], want[i][v], 1e-12);
        }
      }
    }
  }
}

TEST(ModelTest, LossMatchesNestedAverageOracle) {
  ModelParams p = random_params(tiny_config(ModelMode::kFull), 7);
  std::vector<Example> batch = small_batch();
  // -1/N sum_i 1/T_i sum_t 1/L_t sum_{s in t} log p(target_s)
  double want = 0;
  for (const Example& ex : batch) {
    auto probs = manual_predict(p, ex);
    double per_example = 0;
    for (const auto& nodes : ex.segment_nodes) {
      double seg = 0;
      for (int s : nodes) seg += std::log(probs[s][ex.targets[s]]);
      per_example += seg / nodes.size();
    }
    want -= per_example / ex.segment_nodes.size();
  }
  want /= batch.size();
  EXPECT_NEAR(batch_loss(p, batch), want, 1e-10);
  std::vector<const Example*> ptrs;
  for (const Example& ex : batch) ptrs.push_back(&ex);
  EXPECT_NEAR(batch_loss(p, ptrs), want, 1e-10);
}

TEST(ModelTest, OwnTokenIsMasked) {
  ModelParams p = random_params(tiny_config(ModelMode::kFull), 9);
  Program gold = parse_source("DEF run m( moveForward turnLeft interact m)");
  std::vector<IOPair> spec = spec_for(gold, 1, 2);
  Program other = parse_source("DEF run m( moveForward strafeRight interact m)");
  Example a = make_example(gold, spec, {}), b = make_example(other, spec, {});
  // Same contexts for the comparison: only the token at node 1 differs.
  b.segment_inputs = a.segment_inputs;
  EXPECT_EQ(predict_nodes(p, a)[1], predict_nodes(p, b)[1]);
  EXPECT_NE(predict_nodes(p, a)[0], predict_nodes(p, b)[0]);
}

TEST(ModelTest, AblationsIgnoreTheirInputs) {
  std::vector<Example> batch = small_batch();
  Example scrambled = batch[0];
  for (auto& pair : scrambled.segment_inputs) {
    for (FeatureMap& fm : pair) std::fill(fm.data.begin(), fm.data.end(), 0.5);
  }
  ModelParams s = random_params(tiny_config(ModelMode::kGraphOnly), 11);
  EXPECT_EQ(predict_nodes(s, batch[0]), predict_nodes(s, scrambled));
  ModelParams full = random_params(tiny_config(ModelMode::kFull), 11);
  EXPECT_NE(predict_nodes(full, batch[0]), predict_nodes(full, scrambled));

  Example rewired = batch[0];
  for (auto& nb : rewired.graph.neighbors) nb.clear();
  ModelParams o = random_params(tiny_config(ModelMode::kContextOnly), 11);
  EXPECT_EQ(predict_nodes(o, batch[0]), predict_nodes(o, rewired));

  instrumentation().reset();
  predict_nodes(o, batch[0]);
  EXPECT_EQ(instrumentation().edge_reads, 0);
  EXPECT_GT(instrumentation().observation_reads, 0);
  instrumentation().reset();
  predict_nodes(s, batch[0]);
  EXPECT_EQ(instrumentation().observation_reads, 0);
  EXPECT_GT(instrumentation().edge_reads, 0);
}

TEST(ModelTest, GradientsMatchFiniteDifferencesInEveryMode) {
  for (ModelMode m : {ModelMode::kFull, ModelMode::kContextOnly, ModelMode::kGraphOnly}) {
    ModelParams p = random_params(tiny_config(m), 13);
    std::vector<Example> batch = small_batch(true);
    EXPECT_LT(grad_check_model(p, batch), 1e-6) << mode_name(m);
  }
}

TEST(ModelTest, ZeroGradientForUnusedParameters) {
  ModelParams p = random_params(tiny_config(ModelMode::kGraphOnly), 17);
  ModelParams g = zeros_like(p);
  batch_loss(p, small_batch(), &g);
  for (const ConvLayer& l : g.conv) {
    for (double v : l.kernel.data) EXPECT_EQ(v, 0.0);
  }
}

TEST(OptimizerTest, AdamMatchesClosedForm) {
  ModelParams p = init_params(tiny_config(ModelMode::kFull), 1);
  ModelParams g = zeros_like(p);
  g.cls_b.data[0] = 2.0;
  g.cls_b.data[1] = -0.5;
  AdamState st = adam_init(p);
  AdamConfig cfg;
  ModelParams before = p;
  adam_update(p, g, st, cfg);
  // First bias-corrected step is -lr * sign(g) up to eps.
  EXPECT_NEAR(p.cls_b.data[0], before.cls_b.data[0] - cfg.lr, 1e-9);
  EXPECT_NEAR(p.cls_b.data[1], before.cls_b.data[1] + cfg.lr, 1e-9);
  EXPECT_EQ(p.cls_b.data[2], before.cls_b.data[2]);
  EXPECT_EQ(st.step, 1);
}

TEST(OptimizerTest, TrainStepLowersLossAndDetectsDivergence) {
  ModelParams p = init_params(tiny_config(ModelMode::kFull), 1);
  std::vector<Example> batch = small_batch();
  AdamState st = adam_init(p);
  AdamConfig cfg;
  cfg.lr = 0.05;
  double first = train_step(batch, p, st, cfg), last = first;
  for (int i = 0; i < 30; ++i) last = train_step(batch, p, st, cfg);
  EXPECT_LT(last, 0.5 * first);
  p.gat.w.data[0] = std::nan("");
  EXPECT_THROW(train_step(batch, p, st, cfg), DivergenceDetected);
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  ModelParams p = random_params(tiny_config(ModelMode::kContextOnly), 19);
  const std::string path = ::testing::TempDir() + "/ckpt.json";
  save_checkpoint(p, path, R"({"note": 1})");
  ModelParams q = load_checkpoint(path);
  EXPECT_EQ(q.config.mode, ModelMode::kContextOnly);
  EXPECT_EQ(q.config.d, 4);
  auto a = p.tensors();
  auto b = q.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(*a[i].second, *b[i].second) << a[i].first;
  }
  std::vector<Example> batch = small_batch();
  EXPECT_EQ(batch_loss(p, batch), batch_loss(q, batch));
}

TEST(CheckpointTest, RejectsForeignFiles) {
  const std::string path = ::testing::TempDir() + "/bad.json";
  FILE* f = std::fopen(path.c_str(), "w");
  std::fputs(R"({"format": "something-else", "version": 1})", f);
  std::fclose(f);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  EXPECT_THROW(load_checkpoint(path + ".missing"), std::runtime_error);
}

}  // namespace
}  // namespace ctxrepair
