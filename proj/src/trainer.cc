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


#include "ctxrepair/trainer.h"

#include <algorithm>
#include <numeric>

namespace ctxrepair {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.min_edits < 0 ||
      cfg.max_edits < cfg.min_edits) {
    throw std::invalid_argument("invalid training config");
  }
}

Example training_example(const Sample& sample, int edits, Rng& rng,
                         const ContextOptions& opts) {
  const int positions = static_cast<int>(repairable_positions(sample.gold).size());
  Candidate c = corrupt(sample.gold, std::min(edits, positions), rng);
  return make_example(c.program, sample.spec_io, opts, &sample.gold);
}

std::vector<Candidate> draw_corruptions(const std::vector<Sample>& samples,
                                        const TrainConfig& cfg, uint64_t seed) {
  std::vector<Candidate> out;
  out.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    uint64_t state = seed ^ (0x632be59bd9b4e019ull * (i + 1));
    Rng rng(splitmix64(state));
    std::uniform_int_distribution<int> edits(cfg.min_edits, cfg.max_edits);
    const int budget = edits(rng);
    const int positions = static_cast<int>(repairable_positions(samples[i].gold).size());
    Candidate c = corrupt(samples[i].gold, std::min(budget, positions), rng);
    for (int tries = 1; cfg.spec_failing && tries < 20 &&
                        io_pass_count(c.program, samples[i].spec_io, cfg.context.limits) ==
                            static_cast<int>(samples[i].spec_io.size());
         ++tries) {
      c = corrupt(samples[i].gold, std::min(budget, positions), rng);
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::vector<Example> to_examples(const std::vector<Sample>& samples,
                                 const std::vector<Candidate>& cands,
                                 const ContextOptions& opts) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    out.push_back(make_example(cands[i].program, samples[i].spec_io, opts, &samples[i].gold));
  }
  return out;
}

double mean_loss(const ModelParams& params, const std::vector<Example>& exs) {
  return batch_loss(params, exs);
}

}  // namespace

TrainResult train(const std::vector<Sample>& samples, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
  validate(cfg);
  if (samples.empty()) throw std::invalid_argument("train: no samples");
  TrainResult result;
  ModelConfig mcfg = cfg.model;
  mcfg.view = cfg.context.view;
  result.params = init_params(mcfg, cfg.seed);
  AdamState opt = adam_init(result.params);

  uint64_t state = cfg.seed;
  result.corruptions = draw_corruptions(samples, cfg, splitmix64(state));
  std::vector<Example> examples = to_examples(samples, result.corruptions, cfg.context);
  result.initial_loss = mean_loss(result.params, examples);

  Rng shuffle_rng(splitmix64(state));
  std::vector<size_t> order(samples.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0 && !cfg.fixed_corruptions) {
      result.corruptions = draw_corruptions(samples, cfg, splitmix64(state));
      examples = to_examples(samples, result.corruptions, cfg.context);
    }
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::vector<const Example*> batch;
      for (size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i) {
        batch.push_back(&examples[order[i]]);
      }
      total += train_step(batch, result.params, opt, cfg.adam) *
               static_cast<double>(batch.size());
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
    if (on_epoch) on_epoch(epoch, result.epoch_loss.back());
  }
  return result;
}

}  // namespace ctxrepair
