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


#ifndef CTXREPAIR_EXPERIMENT_H_
#define CTXREPAIR_EXPERIMENT_H_

#include <vector>

#include "ctxrepair/metrics.h"

namespace ctxrepair {

// Controlled benchmark: one corrupted candidate per sample.
struct BenchmarkConfig {
  int num_samples = 200;
  int min_edits = 1;
  int max_edits = 2;
  uint64_t seed = 7;
};

std::vector<Candidate> make_benchmark(const std::vector<Sample>& samples,
                                      const BenchmarkConfig& cfg);

struct EvalConfig {
  RepairConfig repair;
  ContextOptions context;
  std::vector<int> ks = {1, 5, 20};
};

struct EvalOutcome {
  EvalReport repaired;
  EvalReport unrepaired;  // each candidate alone, as its own Top-K list
  std::vector<RepairResult> results;
};

// Repairs every candidate against its sample's spec and scores both the
// repaired rankings and the untouched candidates.
EvalOutcome evaluate(const ModelParams& params,
                     const std::vector<Sample>& samples,
                     const std::vector<Candidate>& candidates,
                     const EvalConfig& cfg);

struct NoiseSweep {
  std::vector<double> fractions;
  std::vector<EvalReport> reports;  // repaired, one per fraction
  // delta[f][metric][k] = rate at fraction f minus rate at the first fraction.
  std::vector<std::array<std::vector<double>, kNumMetrics>> deltas;
};

// Re-runs evaluate() with observation noise at each fraction. Noise draws are
// seeded from `seed`, so the sweep is reproducible.
NoiseSweep noise_sweep(const ModelParams& params,
                       const std::vector<Sample>& samples,
                       const std::vector<Candidate>& candidates,
                       const EvalConfig& cfg,
                       const std::vector<double>& fractions = {0.0, 0.05, 0.10,
                                                               0.15, 0.20},
                       uint64_t seed = 11);

}  // namespace ctxrepair

#endif  // CTXREPAIR_EXPERIMENT_H_
