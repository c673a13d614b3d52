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


#ifndef CTXREPAIR_TRAINER_H_
#define CTXREPAIR_TRAINER_H_

#include <functional>
#include <vector>

#include "ctxrepair/dataset.h"
#include "ctxrepair/optimizer.h"

namespace ctxrepair {

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  ContextOptions context;
  int epochs = 30;
  int batch_size = 16;
  int min_edits = 1;
  int max_edits = 2;
  // Corrupt each sample once up front and reuse the same pairs every epoch.
  bool fixed_corruptions = false;
  // Redraw corruptions that still pass every spec pair (at most 20 tries).
  // Such candidates are not bugs as far as the spec can tell.
  bool spec_failing = false;
  uint64_t seed = 1;
};

void validate(const TrainConfig& cfg);

struct TrainResult {
  ModelParams params;
  double initial_loss = 0.0;       // mean loss before the first update
  std::vector<double> epoch_loss;  // mean training loss of each epoch
  std::vector<Candidate> corruptions;  // candidates of the last epoch
};

// One corrupted training pair per sample: the candidate's contexts with the
// gold tokens as targets.
Example training_example(const Sample& sample, int edits, Rng& rng,
                         const ContextOptions& opts);

// One corrupted candidate per sample with min_edits..max_edits substitutions
// (capped by the repairable positions), reproducible from `seed`.
std::vector<Candidate> draw_corruptions(const std::vector<Sample>& samples,
                                        const TrainConfig& cfg, uint64_t seed);

// Trains the repairer on corruption pairs. `on_epoch` is called after each
// epoch with (epoch index, mean loss).
TrainResult train(const std::vector<Sample>& samples, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch = {});

}  // namespace ctxrepair

#endif  // CTXREPAIR_TRAINER_H_
