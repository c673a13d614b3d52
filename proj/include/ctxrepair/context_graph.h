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

#ifndef CTXREPAIR_CONTEXT_GRAPH_H_
#define CTXREPAIR_CONTEXT_GRAPH_H_

#include <optional>
#include <utility>
#include <vector>

#include "ctxrepair/dsl.h"
#include "ctxrepair/world.h"

namespace ctxrepair {

inline constexpr int kNoSegment = -1;

// <cond, head, body> for a control statement; <null, action, null> for an
// action. Ids are pre-order statement indices.
struct Segment {
  int id = 0;
  int parent = kNoSegment;
  std::optional<Condition> cond;
  Token head_token{};
  std::vector<int> body;  // child segment ids, then-branch first
  int else_begin = -1;    // index into `body` where the else branch starts
  int token_begin = 0;    // [token_begin, token_end) over token_sequence
  int token_end = 0;
  // Token indices owned by this segment rather than a child: the head plus
  // `not`, the perception and the repeat count. Never delimiters.
  std::vector<int> own_tokens;
};

std::vector<Segment> extract_segments(const Program& program);

// Innermost segment of every token in token_sequence order. Tokens of the
// DEF run m( ... m) wrapper map to kNoSegment.
std::vector<int> token_segment_map(const Program& program);

struct EnvContext {
  int segment_id = 0;
  Observation pre;
  Observation post;
  // Goal overlays (render_goal) in the pre and post frames. Empty when no
  // target state was supplied.
  std::vector<double> goal_pre;
  std::vector<double> goal_post;
  // residual_features of the whole run's final state in the pre frame. Empty
  // without a target.
  std::vector<double> residual;
  // residual_features(pre pose, pre state, post state): what the segment did.
  std::vector<double> motion;
  bool unreached = false;
};

struct ContextCapture {
  std::vector<EnvContext> contexts;  // indexed by segment id
  ExecResult exec;
};

// Executes `program` on `input` and renders the environment before the first
// dynamic occurrence of every segment and after it completes. Segments that
// never run reuse the pre observation of their nearest executed ancestor (the
// program start for top-level segments) and are flagged unreached. On
// timeout, exec.status is kTimeout and open segments end at the cutoff.
ContextCapture capture_contexts(const Program& program, const WorldState& input,
                                const ExecLimits& limits, const ViewSpec& view,
                                const WorldState* target = nullptr);

struct GraphNode {
  Token token{};
  TokenKind type_tag = TokenKind::kAction;
  int segment_id = 0;
  int token_index = 0;  // position in token_sequence
};

// Token graph over the non-delimiter tokens of a program. Condition edges
// point from a control keyword to its condition (keyword -> not ->
// perception, repeat -> count); successor edges chain statement heads and
// enter bodies from their keyword.
struct ProgramGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> cond_edges;
  std::vector<std::pair<int, int>> succ_edges;
  std::vector<std::vector<int>> neighbors;  // undirected, sorted, no self

  int size() const { return static_cast<int>(nodes.size()); }
};

ProgramGraph build_graph(const Program& program);

// Rebuilds `neighbors` from the edge lists.
void derive_neighbors(ProgramGraph& graph);

}  // namespace ctxrepair

#endif  // CTXREPAIR_CONTEXT_GRAPH_H_
