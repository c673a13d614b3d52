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


#include "ctxrepair/experiment.h"

#include <algorithm>

namespace ctxrepair {

std::vector<Candidate> make_benchmark(const std::vector<Sample>& samples,
                                      const BenchmarkConfig& cfg) {
  if (cfg.min_edits < 0 || cfg.max_edits < cfg.min_edits) {
    throw std::invalid_argument("benchmark: bad edit range");
  }
  std::vector<Candidate> out;
  const size_t n = std::min<size_t>(samples.size(), cfg.num_samples);
  for (size_t i = 0; i < n; ++i) {
    uint64_t state = cfg.seed + 0x2545f4914f6cdd1dull * (i + 1);
    Rng rng(splitmix64(state));
    std::uniform_int_distribution<int> edits(cfg.min_edits, cfg.max_edits);
    const int budget = edits(rng);
    const int positions = static_cast<int>(repairable_positions(samples[i].gold).size());
    out.push_back(corrupt(samples[i].gold, std::min(budget, positions), rng));
  }
  return out;
}

EvalOutcome evaluate(const ModelParams& params,
                     const std::vector<Sample>& samples,
                     const std::vector<Candidate>& candidates,
                     const EvalConfig& cfg) {
  if (candidates.size() > samples.size()) {
    throw std::invalid_argument("evaluate: more candidates than samples");
  }
  std::vector<Sample> used(samples.begin(), samples.begin() + candidates.size());
  NeuralScorer scorer(params, cfg.context);
  EvalOutcome out;
  std::vector<std::vector<Program>> repaired, unrepaired;
  for (size_t i = 0; i < candidates.size(); ++i) {
    RepairResult r = repair(candidates[i], used[i].spec_io, scorer, cfg.repair);
    std::vector<Program> ranked;
    for (const Candidate& c : r.ranked) ranked.push_back(c.program);
    repaired.push_back(std::move(ranked));
    unrepaired.push_back({candidates[i].program});
    out.results.push_back(std::move(r));
  }
  out.repaired = topk_report(repaired, used, cfg.ks, cfg.repair.limits);
  out.unrepaired = topk_report(unrepaired, used, cfg.ks, cfg.repair.limits);
  out.repaired.noise = out.unrepaired.noise = cfg.context.noise;
  return out;
}

NoiseSweep noise_sweep(const ModelParams& params,
                       const std::vector<Sample>& samples,
                       const std::vector<Candidate>& candidates,
                       const EvalConfig& cfg,
                       const std::vector<double>& fractions, uint64_t seed) {
  NoiseSweep sweep;
  sweep.fractions = fractions;
  for (double f : fractions) {
    EvalConfig c = cfg;
    c.context.noise = f;
    c.context.noise_seed = seed;
    sweep.reports.push_back(evaluate(params, samples, candidates, c).repaired);
  }
  for (const EvalReport& r : sweep.reports) {
    std::array<std::vector<double>, kNumMetrics> d;
    for (int m = 0; m < kNumMetrics; ++m) {
      for (size_t k = 0; k < r.ks.size(); ++k) {
        d[m].push_back(r.rate(m, k) - sweep.reports.front().rate(m, k));
      }
    }
    sweep.deltas.push_back(std::move(d));
  }
  return sweep;
}

}  // namespace ctxrepair
