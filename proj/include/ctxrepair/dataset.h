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


#ifndef CTXREPAIR_DATASET_H_
#define CTXREPAIR_DATASET_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxrepair/repair.h"

namespace ctxrepair {

// Complexity buckets 2, 3, 4, 5, 6 and 7+ (stored as 7).
inline constexpr int kMinBucket = 2;
inline constexpr int kMaxBucket = 7;
inline constexpr int kNumBuckets = kMaxBucket - kMinBucket + 1;
std::string bucket_label(int bucket);
int bucket_of(int min_steps);

struct Sample {
  uint64_t seed = 0;
  Program gold;
  std::vector<IOPair> spec_io;
  IOPair test_io;
  int min_steps = 0;  // of the test task
  int complexity() const { return bucket_of(min_steps); }
};

// Program distribution used for datasets: longer top levels and a forward
// bias so that tasks average between four and five steps.
ProgramGenConfig dataset_program_config();

struct DataConfig {
  int num_samples = 2000;
  int spec_pairs = 5;
  WorldSpec world{12, 12, 0.08, 3, 1};
  ProgramGenConfig program = dataset_program_config();
  int max_steps = 100;
  int min_test_steps = 2;
  int search_depth = 16;  // min_steps BFS bound; deeper tasks are rejected
  int max_attempts = 5000;  // per sample
  double train_ratio = 0.7;
  double valid_ratio = 0.2;
  uint64_t seed = 1;
};

void validate(const DataConfig& cfg);

class GenerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a stored sample fails re-validation.
class InvalidSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every if/ifelse/while observed both true and false, every repeat entered.
bool branch_coverage(const Program& program,
                     const std::vector<ExecResult>& runs);

// Rejection-samples one sample from `seed`.
Sample gen_sample(uint64_t seed, const DataConfig& cfg);

// Checks outputs, coverage and complexity; throws InvalidSample.
void verify_sample(const Sample& s, const DataConfig& cfg);

// num_samples distinct programs; per-sample seeds come from cfg.seed.
std::vector<Sample> generate_dataset(const DataConfig& cfg);

struct Splits {
  std::vector<Sample> train;
  std::vector<Sample> valid;
  std::vector<Sample> test;
};

// Contiguous split; train = floor(N * train_ratio), valid = floor(N *
// valid_ratio), test = the rest.
Splits split_dataset(std::vector<Sample> samples, const DataConfig& cfg);

struct DatasetStats {
  int count = 0;
  std::array<int, kNumBuckets> buckets{};
  double mean_min_steps = 0.0;
  double coverage_rate = 0.0;
};

DatasetStats dataset_stats(const std::vector<Sample>& samples);

uint64_t splitmix64(uint64_t& state);

}  // namespace ctxrepair

#endif  // CTXREPAIR_DATASET_H_
