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

#include "ctxrepair/context_graph.h"

#include <algorithm>

namespace ctxrepair {

namespace {

// Walks the AST in the same order token_sequence emits tokens.
class SegmentWalker {
 public:
  explicit SegmentWalker(const Program& program) {
    pos_ = 3;  // DEF run m(
    walk_block(program.body, kNoSegment);
  }

  std::vector<Segment> take() { return std::move(segments_); }

 private:
  void own(Segment& s) { s.own_tokens.push_back(pos_++); }

  void walk_cond(Segment& s) {
    ++pos_;  // (
    if (s.cond->negated) own(s);
    own(s);  // perception
    ++pos_;  // )
  }

  std::vector<int> walk_block(const std::vector<Stmt>& body, int parent) {
    std::vector<int> ids;
    for (const Stmt& st : body) ids.push_back(walk_stmt(st, parent));
    return ids;
  }

  int walk_stmt(const Stmt& st, int parent) {
    const int id = static_cast<int>(segments_.size());
    segments_.emplace_back();
    segments_[id].id = id;
    segments_[id].parent = parent;
    segments_[id].token_begin = pos_;
    // segments_ may reallocate during recursion; index, don't hold refs.
    auto seg = [&]() -> Segment& { return segments_[id]; };
    switch (st.kind) {
      case StmtKind::kAction:
        seg().head_token = vocab::token(vocab::action_id(st.action));
        own(seg());
        break;
      case StmtKind::kIf:
      case StmtKind::kWhile: {
        bool is_if = st.kind == StmtKind::kIf;
        seg().head_token = vocab::token(is_if ? vocab::kIf : vocab::kWhile);
        seg().cond = st.cond;
        own(seg());
        walk_cond(seg());
        ++pos_;  // i( / w(
        auto body = walk_block(st.body, id);
        seg().body = std::move(body);
        ++pos_;  // i) / w)
        break;
      }
      case StmtKind::kIfElse: {
        seg().head_token = vocab::token(vocab::kIfElse);
        seg().cond = st.cond;
        own(seg());
        walk_cond(seg());
        ++pos_;  // i(
        auto body = walk_block(st.body, id);
        ++pos_;  // i)
        ++pos_;  // e(
        auto else_body = walk_block(st.else_body, id);
        ++pos_;  // e)
        seg().else_begin = static_cast<int>(body.size());
        body.insert(body.end(), else_body.begin(), else_body.end());
        seg().body = std::move(body);
        break;
      }
      case StmtKind::kRepeat: {
        seg().head_token = vocab::token(vocab::kRepeat);
        own(seg());
        ++pos_;  // (
        own(seg());  // count
        ++pos_;  // )
        ++pos_;  // r(
        auto body = walk_block(st.body, id);
        seg().body = std::move(body);
        ++pos_;  // r)
        break;
      }
    }
    seg().token_end = pos_;
    return id;
  }

  int pos_ = 0;
  std::vector<Segment> segments_;
};

}  // namespace

std::vector<Segment> extract_segments(const Program& program) {
  return SegmentWalker(program).take();
}

std::vector<int> token_segment_map(const Program& program) {
  const int n = static_cast<int>(token_sequence(program).size());
  std::vector<int> map(n, kNoSegment);
  // Pre-order: children come after parents, so later writes are innermost.
  for (const Segment& s : extract_segments(program)) {
    for (int t = s.token_begin; t < s.token_end; ++t) map[t] = s.id;
  }
  return map;
}

ContextCapture capture_contexts(const Program& program, const WorldState& input,
                                const ExecLimits& limits, const ViewSpec& view,
                                const WorldState* target) {
  ExecLimits lim = limits;
  lim.record_contexts = true;
  ContextCapture cap;
  cap.exec = execute(program, input, lim);

  const std::vector<Segment> segments = extract_segments(program);
  const int T = static_cast<int>(segments.size());
  cap.contexts.resize(T);

  auto render = [&](const WorldState& s, Observation& obs,
                    std::vector<double>& goal) {
    obs = render_observation(s, view);
    if (target) goal = render_goal(s, *target, obs);
  };

  std::vector<uint8_t> reached(T, 0);
  for (const StmtSnapshot& snap : cap.exec.context_trace) {
    EnvContext& ctx = cap.contexts[snap.stmt_id];
    ctx.segment_id = snap.stmt_id;
    render(snap.pre, ctx.pre, ctx.goal_pre);
    render(snap.post, ctx.post, ctx.goal_post);
    ctx.motion = residual_features(snap.pre.robot, snap.pre, snap.post);
    if (target) {
      ctx.residual = residual_features(snap.pre.robot, cap.exec.final_state, *target);
    }
    reached[snap.stmt_id] = 1;
  }

  EnvContext start;
  render(input, start.pre, start.goal_pre);
  start.motion.assign(kResidualFeatures, 0.0);
  start.motion[2] = 1.0;  // same heading
  if (target) start.residual = residual_features(input.robot, cap.exec.final_state, *target);
  // Parents precede children in pre-order, so each ancestor is resolved first.
  for (int t = 0; t < T; ++t) {
    if (reached[t]) continue;
    const int parent = segments[t].parent;
    const EnvContext& anchor =
        parent == kNoSegment ? start : cap.contexts[parent];
    EnvContext& ctx = cap.contexts[t];
    ctx.segment_id = t;
    ctx.pre = anchor.pre;
    ctx.post = anchor.pre;
    ctx.goal_pre = anchor.goal_pre;
    ctx.goal_post = anchor.goal_pre;
    ctx.motion = start.motion;
    ctx.residual = anchor.residual;
    ctx.unreached = true;
  }
  return cap;
}

void derive_neighbors(ProgramGraph& g) {
  g.neighbors.assign(g.nodes.size(), {});
  auto link = [&](int a, int b) {
    if (a == b) return;
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  };
  for (auto [a, b] : g.cond_edges) link(a, b);
  for (auto [a, b] : g.succ_edges) link(a, b);
  for (auto& n : g.neighbors) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
}

ProgramGraph build_graph(const Program& program) {
  const std::vector<Token> toks = token_sequence(program);
  const std::vector<Segment> segments = extract_segments(program);

  ProgramGraph g;
  std::vector<int> node_of_token(toks.size(), -1);
  for (size_t t = 0; t < toks.size(); ++t) {
    if (toks[t].kind == TokenKind::kDelimiter) continue;
    node_of_token[t] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({toks[t], toks[t].kind, kNoSegment, static_cast<int>(t)});
  }
  std::vector<int> head_node(segments.size());
  for (const Segment& s : segments) {
    for (int t : s.own_tokens) g.nodes[node_of_token[t]].segment_id = s.id;
    head_node[s.id] = node_of_token[s.own_tokens.front()];
    // keyword -> [not ->] perception, repeat -> count
    for (size_t k = 1; k < s.own_tokens.size(); ++k) {
      g.cond_edges.emplace_back(node_of_token[s.own_tokens[k - 1]],
                                node_of_token[s.own_tokens[k]]);
    }
  }
  auto chain = [&](const std::vector<int>& ids, size_t begin, size_t end,
                   int from) {
    for (size_t k = begin; k < end; ++k) {
      int to = head_node[ids[k]];
      if (from >= 0) g.succ_edges.emplace_back(from, to);
      from = to;
    }
  };
  std::vector<int> top;
  for (const Segment& s : segments) {
    if (s.parent == kNoSegment) top.push_back(s.id);
  }
  chain(top, 0, top.size(), -1);
  for (const Segment& s : segments) {
    if (s.body.empty()) continue;
    size_t split = s.else_begin >= 0 ? static_cast<size_t>(s.else_begin)
                                     : s.body.size();
    chain(s.body, 0, split, head_node[s.id]);
    chain(s.body, split, s.body.size(), head_node[s.id]);
  }
  derive_neighbors(g);
  return g;
}

}  // namespace ctxrepair
