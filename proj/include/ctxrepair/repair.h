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


#ifndef CTXREPAIR_REPAIR_H_
#define CTXREPAIR_REPAIR_H_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctxrepair/model.h"

namespace ctxrepair {

struct IOPair {
  WorldState input;
  WorldState output;

  bool operator==(const IOPair&) const = default;
};

// Number of pairs the program maps correctly. Timeouts count as failures.
int io_pass_count(const Program& program, const std::vector<IOPair>& pairs,
                  const ExecLimits& limits = {});

// ---------------------------------------------------------------------------
// Model inputs

struct ContextOptions {
  ViewSpec view;
  ExecLimits limits;
  // Capture contexts on every spec pair and average their embeddings instead
  // of using the first pair only.
  bool all_pairs = false;
  // Fraction of valid cells dropped from every observation (0 disables).
  double noise = 0.0;
  uint64_t noise_seed = 0;
};

// Captures the candidate's contexts on the spec and packs them for the model.
Example make_example(const Program& candidate, const std::vector<IOPair>& spec,
                     const ContextOptions& opts, const Program* gold = nullptr);

// ---------------------------------------------------------------------------
// Candidates

enum class Origin { kGiven, kCorrupted, kSynthesized, kRepaired };
std::string origin_name(Origin o);

struct Candidate {
  Program program;
  Origin origin = Origin::kGiven;
  int edit_count = 0;  // substitutions relative to the program it came from
  int beam_rank = 0;   // rank within the synthesizer's beam
  int io_pass = 0;
  double mean_log_prob = 0.0;
};

class NotEnoughPositions : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token indices (in token_sequence order) that may be substituted: actions,
// perceptions, repeat counts and the if/while keywords.
std::vector<int> repairable_positions(const Program& program);

// Vocabulary ids that may replace `vocab_id` without changing the program's
// shape. Empty for tokens that are not repairable.
std::vector<int> substitutes(int vocab_id);

// Replaces the token at `pos` with `id` (which must be in substitutes()). An
// if <-> while swap also renames the body's bracket pair.
void apply_substitution(std::vector<int>& ids, int pos, int id);

// Exactly `budget` substitutions at distinct repairable positions, each to a
// different token of the same class.
Candidate corrupt(const Program& gold, int budget, Rng& rng);

struct SynthConfig {
  int max_tokens = 20;  // including DEF run m( m)
  long max_expansions = 100000;
  ExecLimits limits;
};

// Uniform-cost enumeration of statement sequences, pruned by the states they
// reach on the spec inputs. Returns up to `beam_k` programs ranked by
// (io_pass desc, token length asc, source asc).
std::vector<Candidate> synthesize_candidates(const std::vector<IOPair>& spec,
                                             int beam_k,
                                             const SynthConfig& cfg = {});

// ---------------------------------------------------------------------------
// Repair

// Per-node substitution distributions for a candidate: pairs of
// (token index, distribution over the vocabulary).
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::vector<std::pair<int, std::vector<double>>> score(
      const Program& candidate, const std::vector<IOPair>& spec) = 0;
};

class NeuralScorer : public TokenScorer {
 public:
  NeuralScorer(const ModelParams& params, ContextOptions opts)
      : params_(params), opts_(std::move(opts)) {}
  std::vector<std::pair<int, std::vector<double>>> score(
      const Program& candidate, const std::vector<IOPair>& spec) override;

 private:
  const ModelParams& params_;
  ContextOptions opts_;
};

struct RepairConfig {
  int max_rounds = 5;
  double tau = 0.5;
  int edits_per_round = 2;
  int beam_k = 20;
  ExecLimits limits;
};

void validate(const RepairConfig& cfg);

struct RepairResult {
  std::vector<Candidate> ranked;  // best first, at most beam_k
  int rounds = 0;
  bool no_edit_applied = false;
};

RepairResult repair(const Candidate& candidate, const std::vector<IOPair>& spec,
                    TokenScorer& scorer, const RepairConfig& cfg);

// Synthesizes candidates (unless `supplied` is given), repairs each and
// merges the results into one ranking.
RepairResult trail_eval_repair(const std::vector<IOPair>& spec,
                               TokenScorer& scorer, const RepairConfig& cfg,
                               const SynthConfig& synth = {},
                               const std::vector<Candidate>* supplied = nullptr);

}  // namespace ctxrepair

#endif  // CTXREPAIR_REPAIR_H_
