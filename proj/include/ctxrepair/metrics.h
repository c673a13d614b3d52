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


#ifndef CTXREPAIR_METRICS_H_
#define CTXREPAIR_METRICS_H_

#include <array>
#include <string>
#include <vector>

#include "ctxrepair/dataset.h"

namespace ctxrepair {

// Token-for-token identity.
bool exact_match(const Program& p, const Program& gold);
// Reproduces every spec output. Timeouts count as mismatches.
bool semantic_match(const Program& p, const Sample& s, const ExecLimits& limits = {});
// Reproduces every spec output and the held-out test output.
bool generalization_match(const Program& p, const Sample& s,
                          const ExecLimits& limits = {});

enum Metric { kExact = 0, kSemantic = 1, kGeneralization = 2 };
inline constexpr int kNumMetrics = 3;
std::string metric_name(int metric);

struct MetricHits {
  // hits[metric][i] counts samples with a hit among the first ks[i] programs.
  std::array<std::vector<int>, kNumMetrics> hits;
};

struct EvalReport {
  std::vector<int> ks;
  int count = 0;
  double noise = 0.0;
  MetricHits total;
  std::array<int, kNumBuckets> bucket_count{};
  std::array<MetricHits, kNumBuckets> buckets;

  double rate(int metric, int k_index) const;
  double bucket_rate(int bucket_index, int metric, int k_index) const;
  bool operator==(const EvalReport&) const;
};

// A sample is a hit at level k when any of its first k programs satisfies
// the metric.
EvalReport topk_report(const std::vector<std::vector<Program>>& ranked,
                       const std::vector<Sample>& samples,
                       const std::vector<int>& ks = {1, 5, 20},
                       const ExecLimits& limits = {});

}  // namespace ctxrepair

#endif  // CTXREPAIR_METRICS_H_
