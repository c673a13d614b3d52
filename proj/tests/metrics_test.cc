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

#include <gtest/gtest.h>

namespace ctxrepair {
namespace {

Program P(const char* src) { return parse_source(src); }

Sample make_sample(const Program& gold, uint64_t seed, int pairs = 5) {
  Rng rng(seed);
  Sample s;
  s.seed = seed;
  s.gold = gold;
  for (int i = 0; i <= pairs; ++i) {
    WorldState in = init_world({8, 8, 0.1, 2, 1}, rng);
    IOPair io{in, execute(gold, in).final_state};
    if (i < pairs) {
      s.spec_io.push_back(io);
    } else {
      s.test_io = io;
    }
  }
  s.min_steps = min_steps(s.test_io.input, s.test_io.output).value_or(0);
  return s;
}

TEST(MetricsTest, AliasingFixture) {
  Program gold = P("DEF run m( turnRight m)");
  Program alias = P("DEF run m( repeat(R=3) r( turnLeft r) m)");
  Sample s = make_sample(gold, 1);
  EXPECT_FALSE(exact_match(alias, gold));
  EXPECT_TRUE(semantic_match(alias, s));
  EXPECT_TRUE(generalization_match(alias, s));
  EXPECT_TRUE(exact_match(gold, gold));
  EXPECT_FALSE(exact_match(P("DEF run m( turnRight turnRight m)"), gold));
}

TEST(MetricsTest, SemanticWithoutGeneralization) {
  // The spec worlds never have an item under the robot at the start; the
  // test world does, so the overfit program differs only there.
  Program gold = P("DEF run m( interact moveForward m)");
  Program overfit = P("DEF run m( moveForward m)");
  WorldState a = open_room(6, 6, {2, 3, Heading::kNorth});
  WorldState b = open_room(6, 6, {3, 4, Heading::kEast});
  WorldState t = open_room(6, 6, {2, 3, Heading::kNorth});
  t.at(2, 3) = Cell::kItem;
  Sample s;
  s.gold = gold;
  s.spec_io = {{a, execute(gold, a).final_state}, {b, execute(gold, b).final_state}};
  s.test_io = {t, execute(gold, t).final_state};
  s.min_steps = 2;
  EXPECT_TRUE(semantic_match(overfit, s));
  EXPECT_FALSE(generalization_match(overfit, s));
}

TEST(MetricsTest, PartialPassAndTimeoutAreMismatches) {
  Program gold = P("DEF run m( while(frontIsClear) w( moveForward w) m)");
  Sample s = make_sample(gold, 2);
  EXPECT_FALSE(semantic_match(P("DEF run m( moveForward m)"), s));
  EXPECT_FALSE(semantic_match(P("DEF run m( while(frontIsClear) w( turnLeft w) m)"), s));
}

TEST(MetricsTest, ImplicationsOnRandomPrograms) {
  Rng rng(3);
  ProgramGenConfig cfg;
  cfg.max_depth = 1;
  for (int i = 0; i < 200; ++i) {
    Program gold = random_program(rng, cfg);
    Sample s = make_sample(gold, 100 + i);
    if (!semantic_match(gold, s)) continue;  // the gold timed out somewhere
    Program other = random_program(rng, cfg);
    for (const Program& p : {gold, other}) {
      bool ex = exact_match(p, gold), sem = semantic_match(p, s),
           gen = generalization_match(p, s);
      if (ex) {
        EXPECT_TRUE(sem);
      }
      if (gen) {
        EXPECT_TRUE(sem);
      }
    }
  }
}

TEST(TopKTest, FirstHitDeterminesLevels) {
  Program gold = P("DEF run m( turnRight moveForward m)");
  Sample s = make_sample(gold, 4);
  std::vector<Program> ranked = {
      P("DEF run m( turnLeft m)"), P("DEF run m( turnLeft m)"),
      P("DEF run m( repeat(R=3) r( turnLeft r) moveForward m)"),
      P("DEF run m( turnLeft m)"), P("DEF run m( turnLeft m)"), gold};
  EvalReport r = topk_report({ranked}, {s}, {1, 3, 5, 6});
  EXPECT_EQ(r.count, 1);
  EXPECT_EQ(r.total.hits[kSemantic], (std::vector<int>{0, 1, 1, 1}));
  EXPECT_EQ(r.total.hits[kExact], (std::vector<int>{0, 0, 0, 1}));
  EXPECT_EQ(r.rate(kGeneralization, 1), 1.0);
  EXPECT_EQ(r.bucket_count[s.complexity() - kMinBucket], 1);
  EXPECT_THROW(topk_report({ranked}, {}, {1}), std::invalid_argument);
}

TEST(TopKTest, RatesMonotoneInK) {
  Rng rng(5);
  ProgramGenConfig cfg;
  cfg.max_depth = 1;
  std::vector<Sample> samples;
  std::vector<std::vector<Program>> ranked;
  for (int draw = 0; samples.size() < 60; ++draw) {
    Program gold = random_program(rng, cfg);
    Sample s = make_sample(gold, 500 + draw);
    if (!semantic_match(gold, s)) continue;
    samples.push_back(s);
    std::vector<Program> list;
    for (int j = 0; j < 25; ++j) {
      list.push_back(j == static_cast<int>(rng() % 25) ? gold : random_program(rng, cfg));
    }
    ranked.push_back(std::move(list));
  }
  EvalReport r = topk_report(ranked, samples, {1, 5, 20});
  for (int m = 0; m < kNumMetrics; ++m) {
    EXPECT_LE(r.rate(m, 0), r.rate(m, 1));
    EXPECT_LE(r.rate(m, 1), r.rate(m, 2));
  }
  EXPECT_LE(r.rate(kExact, 2), r.rate(kSemantic, 2));
  EXPECT_LE(r.rate(kGeneralization, 2), r.rate(kSemantic, 2));
  EXPECT_EQ(r, topk_report(ranked, samples, {1, 5, 20}));
}

TEST(BucketTest, Labels) {
  EXPECT_EQ(bucket_of(0), 2);
  EXPECT_EQ(bucket_of(4), 4);
  EXPECT_EQ(bucket_of(12), 7);
  EXPECT_EQ(bucket_label(7), "7+");
  EXPECT_EQ(bucket_label(3), "3");
  EXPECT_EQ(metric_name(kGeneralization), "generalization");
}

}  // namespace
}  // namespace ctxrepair
