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


#include "ctxrepair/metrics.h"

#include <stdexcept>

namespace ctxrepair {

bool exact_match(const Program& p, const Program& gold) {
  return token_ids(p) == token_ids(gold);
}

namespace {

bool reproduces(const Program& p, const IOPair& io, const ExecLimits& limits) {
  ExecResult r = execute(p, io.input, limits);
  return r.status == ExecStatus::kOk && r.final_state == io.output;
}

}  // namespace

bool semantic_match(const Program& p, const Sample& s, const ExecLimits& limits) {
  for (const IOPair& io : s.spec_io) {
    if (!reproduces(p, io, limits)) return false;
  }
  return true;
}

bool generalization_match(const Program& p, const Sample& s,
                          const ExecLimits& limits) {
  return semantic_match(p, s, limits) && reproduces(p, s.test_io, limits);
}

std::string metric_name(int metric) {
  switch (metric) {
    case kExact: return "exact";
    case kSemantic: return "semantic";
    case kGeneralization: return "generalization";
  }
  throw std::invalid_argument("unknown metric");
}

double EvalReport::rate(int metric, int k_index) const {
  return count == 0 ? 0.0 : static_cast<double>(total.hits[metric][k_index]) / count;
}

double EvalReport::bucket_rate(int b, int metric, int k_index) const {
  return bucket_count[b] == 0
             ? 0.0
             : static_cast<double>(buckets[b].hits[metric][k_index]) / bucket_count[b];
}

bool EvalReport::operator==(const EvalReport& o) const {
  if (ks != o.ks || count != o.count || noise != o.noise ||
      bucket_count != o.bucket_count) {
    return false;
  }
  for (int m = 0; m < kNumMetrics; ++m) {
    if (total.hits[m] != o.total.hits[m]) return false;
    for (int b = 0; b < kNumBuckets; ++b) {
      if (buckets[b].hits[m] != o.buckets[b].hits[m]) return false;
    }
  }
  return true;
}

EvalReport topk_report(const std::vector<std::vector<Program>>& ranked,
                       const std::vector<Sample>& samples,
                       const std::vector<int>& ks, const ExecLimits& limits) {
  if (ranked.size() != samples.size()) {
    throw std::invalid_argument("topk_report: one ranking per sample required");
  }
  EvalReport rep;
  rep.ks = ks;
  rep.count = static_cast<int>(samples.size());
  const size_t nk = ks.size();
  for (int m = 0; m < kNumMetrics; ++m) {
    rep.total.hits[m].assign(nk, 0);
    for (MetricHits& b : rep.buckets) b.hits[m].assign(nk, 0);
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const int b = s.complexity() - kMinBucket;
    ++rep.bucket_count[b];
    // Rank of the first program satisfying each metric.
    std::array<int, kNumMetrics> first;
    first.fill(-1);
    for (size_t r = 0; r < ranked[i].size(); ++r) {
      const Program& p = ranked[i][r];
      const bool sem = semantic_match(p, s, limits);
      const bool flags[kNumMetrics] = {
          exact_match(p, s.gold), sem,
          sem && generalization_match(p, s, limits)};
      for (int m = 0; m < kNumMetrics; ++m) {
        if (flags[m] && first[m] < 0) first[m] = static_cast<int>(r);
      }
    }
    for (int m = 0; m < kNumMetrics; ++m) {
      for (size_t k = 0; k < nk; ++k) {
        if (first[m] >= 0 && first[m] < ks[k]) {
          ++rep.total.hits[m][k];
          ++rep.buckets[b].hits[m][k];
        }
      }
    }
  }
  return rep;
}

}  // namespace ctxrepair
