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


#include "ctxrepair/dataset.h"

#include <cmath>
#include <unordered_set>

namespace ctxrepair {

std::string bucket_label(int bucket) {
  return bucket >= kMaxBucket ? std::to_string(kMaxBucket) + "+"
                              : std::to_string(bucket);
}

int bucket_of(int min_steps) {
  return std::clamp(min_steps, kMinBucket, kMaxBucket);
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

ProgramGenConfig dataset_program_config() {
  ProgramGenConfig p;
  p.min_top_len = 5;
  p.max_top_len = 8;
  p.max_body_len = 3;
  p.action_mix = {5.0, 0.3, 1.5, 1.5, 0.6, 0.6, 0.8};
  return p;
}

void validate(const DataConfig& cfg) {
  if (cfg.num_samples < 1 || cfg.spec_pairs < 1 || cfg.max_steps < 1 ||
      cfg.max_attempts < 1 || cfg.train_ratio < 0 || cfg.valid_ratio < 0 ||
      cfg.train_ratio + cfg.valid_ratio > 1.0) {
    throw std::invalid_argument("invalid data config");
  }
}

bool branch_coverage(const Program& program,
                     const std::vector<ExecResult>& runs) {
  std::set<std::pair<int, bool>> hit;
  for (const ExecResult& r : runs) hit.insert(r.branches_hit.begin(), r.branches_hit.end());
  for (const Segment& seg : extract_segments(program)) {
    switch (seg.head_token.vocab_id) {
      case vocab::kIf:
      case vocab::kIfElse:
      case vocab::kWhile:
        if (!hit.count({seg.id, true}) || !hit.count({seg.id, false})) return false;
        break;
      case vocab::kRepeat:
        if (!hit.count({seg.id, true})) return false;
        break;
      default:
        break;
    }
  }
  return true;
}

namespace {

// One attempt; returns false when the draw is rejected.
bool try_sample(Rng& rng, const DataConfig& cfg, Sample& out) {
  Program gold = random_program(rng, cfg.program);
  ExecLimits lim;
  lim.max_steps = cfg.max_steps;
  std::vector<ExecResult> runs;
  std::vector<IOPair> pairs;
  for (int k = 0; k <= cfg.spec_pairs; ++k) {
    WorldState in = init_world(cfg.world, rng);
    ExecResult r = execute(gold, in, lim);
    if (r.status != ExecStatus::kOk) return false;
    pairs.push_back({std::move(in), r.final_state});
    if (k < cfg.spec_pairs) runs.push_back(std::move(r));
  }
  if (!branch_coverage(gold, runs)) return false;
  std::optional<int> steps =
      min_steps(pairs.back().input, pairs.back().output, cfg.search_depth);
  if (!steps || *steps < cfg.min_test_steps) return false;
  out.gold = std::move(gold);
  out.test_io = pairs.back();
  pairs.pop_back();
  out.spec_io = std::move(pairs);
  out.min_steps = *steps;
  return true;
}

}  // namespace

Sample gen_sample(uint64_t seed, const DataConfig& cfg) {
  Rng rng(seed);
  Sample s;
  s.seed = seed;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    if (try_sample(rng, cfg, s)) return s;
  }
  throw GenerationBudgetExceeded("no valid sample after " +
                                 std::to_string(cfg.max_attempts) +
                                 " attempts (seed " + std::to_string(seed) + ")");
}

void verify_sample(const Sample& s, const DataConfig& cfg) {
  auto fail = [&](const std::string& why) {
    throw InvalidSample("sample " + std::to_string(s.seed) + ": " + why);
  };
  try {
    validate(s.gold);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (static_cast<int>(s.spec_io.size()) != cfg.spec_pairs) fail("wrong spec size");
  ExecLimits lim;
  lim.max_steps = cfg.max_steps;
  std::vector<ExecResult> runs;
  for (const IOPair& io : s.spec_io) {
    runs.push_back(execute(s.gold, io.input, lim));
    if (runs.back().status != ExecStatus::kOk || runs.back().final_state != io.output) {
      fail("gold does not reproduce a spec output");
    }
  }
  ExecResult t = execute(s.gold, s.test_io.input, lim);
  if (t.status != ExecStatus::kOk || t.final_state != s.test_io.output) {
    fail("gold does not reproduce the test output");
  }
  if (!branch_coverage(s.gold, runs)) fail("branch coverage incomplete");
  std::optional<int> steps = min_steps(s.test_io.input, s.test_io.output, cfg.search_depth);
  if (!steps || *steps != s.min_steps) fail("min_steps mismatch");
  if (s.min_steps < cfg.min_test_steps) fail("test task too short");
}

std::vector<Sample> generate_dataset(const DataConfig& cfg) {
  validate(cfg);
  uint64_t state = cfg.seed;
  std::vector<Sample> out;
  out.reserve(cfg.num_samples);
  std::unordered_set<std::string> programs;
  long draws = 0;
  const long max_draws = 20L * cfg.num_samples + 100;
  while (static_cast<int>(out.size()) < cfg.num_samples) {
    if (++draws > max_draws) {
      throw GenerationBudgetExceeded("too many duplicate programs");
    }
    Sample s = gen_sample(splitmix64(state), cfg);
    if (!programs.insert(unparse(s.gold)).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

Splits split_dataset(std::vector<Sample> samples, const DataConfig& cfg) {
  const size_t n = samples.size();
  const size_t n_train = static_cast<size_t>(std::floor(n * cfg.train_ratio + 1e-9));
  const size_t n_valid = static_cast<size_t>(std::floor(n * cfg.valid_ratio + 1e-9));
  Splits s;
  auto begin = std::make_move_iterator(samples.begin());
  s.train.assign(begin, begin + n_train);
  s.valid.assign(begin + n_train, begin + n_train + n_valid);
  s.test.assign(begin + n_train + n_valid, std::make_move_iterator(samples.end()));
  return s;
}

DatasetStats dataset_stats(const std::vector<Sample>& samples) {
  DatasetStats st;
  st.count = static_cast<int>(samples.size());
  if (samples.empty()) return st;
  long total = 0;
  int covered = 0;
  for (const Sample& s : samples) {
    ++st.buckets[s.complexity() - kMinBucket];
    total += s.min_steps;
    std::vector<ExecResult> runs;
    for (const IOPair& io : s.spec_io) runs.push_back(execute(s.gold, io.input));
    if (branch_coverage(s.gold, runs)) ++covered;
  }
  st.mean_min_steps = static_cast<double>(total) / st.count;
  st.coverage_rate = static_cast<double>(covered) / st.count;
  return st;
}

}  // namespace ctxrepair
