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

#include "ctxrepair/world.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace ctxrepair {

namespace {

constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {-1, 0, 1, 0};

int hidx(Heading h) { return static_cast<int>(h); }

bool free_cells_connected(const WorldState& w) {
  int total = 0;
  int start = -1;
  for (int i = 0; i < w.rows * w.cols; ++i) {
    if (w.cells[i] != Cell::kWall) {
      ++total;
      if (start < 0) start = i;
    }
  }
  if (total == 0) return false;
  std::vector<uint8_t> seen(w.cells.size(), 0);
  std::vector<int> stack = {start};
  seen[start] = 1;
  int reached = 0;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    ++reached;
    int x = i % w.cols, y = i / w.cols;
    for (int d = 0; d < 4; ++d) {
      int nx = x + kDx[d], ny = y + kDy[d];
      if (w.blocked(nx, ny)) continue;
      int j = ny * w.cols + nx;
      if (!seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return reached == total;
}

WorldState bordered(int rows, int cols) {
  WorldState w;
  w.rows = rows;
  w.cols = cols;
  w.cells.assign(rows * cols, Cell::kFree);
  w.interacted.assign(rows * cols, 0);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (x == 0 || y == 0 || x == cols - 1 || y == rows - 1) {
        w.at(x, y) = Cell::kWall;
      }
    }
  }
  return w;
}

}  // namespace

Heading turn_left(Heading h) {
  return static_cast<Heading>((hidx(h) + 3) % 4);
}

Heading turn_right(Heading h) {
  return static_cast<Heading>((hidx(h) + 1) % 4);
}

char heading_char(Heading h) { return "NESW"[hidx(h)]; }

WorldState open_room(int rows, int cols, Pose robot) {
  WorldState w = bordered(rows, cols);
  w.robot = robot;
  return w;
}

WorldState init_world(const WorldSpec& spec, Rng& rng) {
  if (spec.rows < 3 || spec.cols < 3 || spec.wall_density < 0 ||
      spec.wall_density >= 1 || spec.item_count < 0 || spec.target_count < 0) {
    throw InfeasibleSpec("init_world: invalid spec");
  }
  const int interior = (spec.rows - 2) * (spec.cols - 2);
  const int walls =
      static_cast<int>(std::lround(spec.wall_density * interior));
  const int needed = spec.item_count + spec.target_count + 1;
  if (interior - walls < needed) {
    throw InfeasibleSpec("init_world: not enough free cells");
  }
  std::vector<int> interior_cells;
  for (int y = 1; y < spec.rows - 1; ++y) {
    for (int x = 1; x < spec.cols - 1; ++x) {
      interior_cells.push_back(y * spec.cols + x);
    }
  }
  constexpr int kMaxAttempts = 500;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    WorldState w = bordered(spec.rows, spec.cols);
    std::vector<int> order = interior_cells;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < walls; ++i) w.cells[order[i]] = Cell::kWall;
    if (!free_cells_connected(w)) continue;
    std::vector<int> free(order.begin() + walls, order.end());
    std::shuffle(free.begin(), free.end(), rng);
    int k = 0;
    for (int i = 0; i < spec.item_count; ++i) w.cells[free[k++]] = Cell::kItem;
    for (int i = 0; i < spec.target_count; ++i)
      w.cells[free[k++]] = Cell::kTarget;
    int r = free[k];
    std::uniform_int_distribution<int> heading(0, 3);
    w.robot = {r % spec.cols, r / spec.cols,
               static_cast<Heading>(heading(rng))};
    return w;
  }
  throw InfeasibleSpec("init_world: could not sample a connected world");
}

// ---------------------------------------------------------------------------
// Observation

int Observation::valid_count() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), 1));
}

void Observation::invalidate(int r, int c) {
  int i = r * n_w + c;
  valid[i] = 0;
  depth[i] = 0.0;
  for (int ch = 0; ch < n_c; ++ch) appearance[i * n_c + ch] = 0.0;
}

std::pair<int, int> window_cell(const Pose& pose, const ViewSpec& view, int r,
                                int c) {
  int ahead = view.n_h - 1 - r;
  int lateral = c - view.n_w / 2;
  int f = hidx(pose.heading);
  int rt = (f + 1) % 4;
  return {pose.x + ahead * kDx[f] + lateral * kDx[rt],
          pose.y + ahead * kDy[f] + lateral * kDy[rt]};
}

Observation render_observation(const WorldState& state, const ViewSpec& view) {
  if (view.n_h <= 0 || view.n_w <= 0 || view.n_c != kNumCellTypes) {
    throw std::invalid_argument("render_observation: bad view spec");
  }
  Observation obs;
  obs.n_h = view.n_h;
  obs.n_w = view.n_w;
  obs.n_c = view.n_c;
  obs.appearance.assign(view.n_h * view.n_w * view.n_c, 0.0);
  obs.depth.assign(view.n_h * view.n_w, 0.0);
  obs.valid.assign(view.n_h * view.n_w, 0);
  // One ray per column, from the robot's row forward.
  for (int c = 0; c < view.n_w; ++c) {
    for (int r = view.n_h - 1; r >= 0; --r) {
      auto [x, y] = window_cell(state.robot, view, r, c);
      if (!state.in_bounds(x, y)) break;
      Cell cell = state.at(x, y);
      int i = r * view.n_w + c;
      obs.valid[i] = 1;
      obs.appearance[i * view.n_c + static_cast<int>(cell)] = 1.0;
      obs.depth[i] = static_cast<double>(view.n_h - 1 - r) / view.n_h;
      if (cell == Cell::kWall) break;
    }
  }
  return obs;
}

std::vector<double> render_goal(const WorldState& state,
                                const WorldState& target,
                                const Observation& visible) {
  const int n_h = visible.n_h, n_w = visible.n_w;
  std::vector<double> out(n_h * n_w * kGoalChannels, 0.0);
  if (state.rows != target.rows || state.cols != target.cols) {
    throw std::invalid_argument("render_goal: grid size mismatch");
  }
  ViewSpec view{n_h, n_w, visible.n_c};
  int rel = (hidx(target.robot.heading) - hidx(state.robot.heading) + 4) % 4;
  for (int r = 0; r < n_h; ++r) {
    for (int c = 0; c < n_w; ++c) {
      int i = r * n_w + c;
      if (!visible.valid[i]) continue;
      auto [x, y] = window_cell(state.robot, view, r, c);
      if (x == target.robot.x && y == target.robot.y) {
        out[i * kGoalChannels + rel] = 1.0;
      }
      int k = y * state.cols + x;
      if (state.cells[k] != target.cells[k] ||
          state.interacted[k] != target.interacted[k]) {
        out[i * kGoalChannels + 4] = 1.0;
      }
    }
  }
  return out;
}

std::vector<double> residual_features(const Pose& frame,
                                      const WorldState& reached,
                                      const WorldState& target) {
  if (reached.rows != target.rows || reached.cols != target.cols) {
    throw std::invalid_argument("residual_features: grid size mismatch");
  }
  std::vector<double> out(kResidualFeatures, 0.0);
  const int dx = target.robot.x - reached.robot.x;
  const int dy = target.robot.y - reached.robot.y;
  const int f = hidx(frame.heading), rt = (f + 1) % 4;
  out[0] = std::clamp(dx * kDx[f] + dy * kDy[f], -4, 4) / 2.0;
  out[1] = std::clamp(dx * kDx[rt] + dy * kDy[rt], -4, 4) / 2.0;
  out[2 + (hidx(target.robot.heading) - hidx(reached.robot.heading) + 4) % 4] = 1.0;
  out[6] = (target.inventory - reached.inventory) / 4.0;
  int changed = 0;
  for (size_t i = 0; i < target.cells.size(); ++i) {
    changed += target.cells[i] != reached.cells[i] ||
               target.interacted[i] != reached.interacted[i];
  }
  out[7] = changed / 4.0;
  return out;
}

// ---------------------------------------------------------------------------
// Dynamics

WorldState step_action(const WorldState& state, Action action) {
  WorldState next = state;
  Pose& p = next.robot;
  int f = hidx(p.heading);
  int dir = -1;
  switch (action) {
    case Action::kMoveForward: dir = f; break;
    case Action::kMoveBackward: dir = (f + 2) % 4; break;
    case Action::kStrafeLeft: dir = (f + 3) % 4; break;
    case Action::kStrafeRight: dir = (f + 1) % 4; break;
    case Action::kTurnLeft:
      p.heading = turn_left(p.heading);
      return next;
    case Action::kTurnRight:
      p.heading = turn_right(p.heading);
      return next;
    case Action::kInteract: {
      Cell& cell = next.at(p.x, p.y);
      if (cell == Cell::kItem) {
        cell = Cell::kFree;
        ++next.inventory;
      } else if (cell == Cell::kTarget) {
        auto& flag = next.interacted[p.y * next.cols + p.x];
        flag = flag ? 0 : 1;
      }
      return next;
    }
  }
  int nx = p.x + kDx[dir], ny = p.y + kDy[dir];
  if (!next.blocked(nx, ny)) {
    p.x = nx;
    p.y = ny;
  }
  return next;
}

bool eval_perception(const WorldState& s, Condition cond) {
  const Pose& p = s.robot;
  int f = hidx(p.heading);
  bool v = false;
  switch (cond.perception) {
    case Perception::kFrontIsClear:
      v = !s.blocked(p.x + kDx[f], p.y + kDy[f]);
      break;
    case Perception::kLeftIsClear: {
      int d = (f + 3) % 4;
      v = !s.blocked(p.x + kDx[d], p.y + kDy[d]);
      break;
    }
    case Perception::kRightIsClear: {
      int d = (f + 1) % 4;
      v = !s.blocked(p.x + kDx[d], p.y + kDy[d]);
      break;
    }
    case Perception::kTargetInSight: {
      int x = p.x + kDx[f], y = p.y + kDy[f];
      while (!s.blocked(x, y)) {
        if (s.at(x, y) == Cell::kTarget) {
          v = true;
          break;
        }
        x += kDx[f];
        y += kDy[f];
      }
      break;
    }
    case Perception::kOnTarget:
      v = s.at(p.x, p.y) == Cell::kTarget;
      break;
    case Perception::kItemPresent:
      v = s.at(p.x, p.y) == Cell::kItem;
      break;
  }
  return cond.negated ? !v : v;
}

namespace {

class Interpreter {
 public:
  Interpreter(const Program& program, const WorldState& input,
              const ExecLimits& limits)
      : limits_(limits) {
    number(program.body);
    result_.final_state = input;
    entered_.assign(ids_.size(), 0);
  }

  ExecResult run(const Program& program) {
    if (!run_block(program.body)) result_.status = ExecStatus::kTimeout;
    result_.steps = static_cast<int>(result_.action_trace.size());
    return std::move(result_);
  }

 private:
  void number(const std::vector<Stmt>& body) {
    for (const Stmt& s : body) {
      ids_.emplace(&s, static_cast<int>(ids_.size()));
      number(s.body);
      number(s.else_body);
    }
  }

  WorldState& state() { return result_.final_state; }

  bool run_block(const std::vector<Stmt>& body) {
    for (const Stmt& s : body) {
      if (!run_stmt(s)) return false;
    }
    return true;
  }

  bool run_stmt(const Stmt& s) {
    const int id = ids_.at(&s);
    int snap = -1;
    if (limits_.record_contexts && !entered_[id]) {
      entered_[id] = 1;
      snap = static_cast<int>(result_.context_trace.size());
      result_.context_trace.push_back({id, state(), state()});
    }
    bool ok = dispatch(s, id);
    if (snap >= 0) result_.context_trace[snap].post = state();
    return ok;
  }

  bool dispatch(const Stmt& s, int id) {
    switch (s.kind) {
      case StmtKind::kAction:
        if (static_cast<int>(result_.action_trace.size()) >= limits_.max_steps)
          return false;
        state() = step_action(state(), s.action);
        result_.action_trace.push_back(s.action);
        return true;
      case StmtKind::kIf: {
        bool taken = eval_perception(state(), s.cond);
        result_.branches_hit.insert({id, taken});
        return taken ? run_block(s.body) : true;
      }
      case StmtKind::kIfElse: {
        bool taken = eval_perception(state(), s.cond);
        result_.branches_hit.insert({id, taken});
        return run_block(taken ? s.body : s.else_body);
      }
      case StmtKind::kWhile:
        for (;;) {
          bool taken = eval_perception(state(), s.cond);
          result_.branches_hit.insert({id, taken});
          if (!taken) return true;
          // Bodies without reachable actions would otherwise spin forever.
          if (++loop_iterations_ > limits_.max_steps) return false;
          if (!run_block(s.body)) return false;
        }
      case StmtKind::kRepeat:
        result_.branches_hit.insert({id, true});
        for (int i = 0; i < s.count; ++i) {
          if (!run_block(s.body)) return false;
        }
        return true;
    }
    return true;
  }

  const ExecLimits& limits_;
  std::unordered_map<const Stmt*, int> ids_;
  std::vector<uint8_t> entered_;
  ExecResult result_;
  int loop_iterations_ = 0;
};

}  // namespace

ExecResult execute(const Program& program, const WorldState& input,
                   const ExecLimits& limits) {
  if (limits.max_steps < 1) {
    throw std::invalid_argument("execute: max_steps must be >= 1");
  }
  Interpreter interp(program, input, limits);
  return interp.run(program);
}

// ---------------------------------------------------------------------------

Observation apply_noise(const Observation& obs, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("apply_noise: fraction must be in [0, 1]");
  }
  Observation out = obs;
  const int cells = obs.n_h * obs.n_w;
  int count = static_cast<int>(std::floor(fraction * cells + 1e-9));
  if (count == 0) return out;
  std::vector<int> valid;
  for (int i = 0; i < cells; ++i) {
    if (obs.valid[i]) valid.push_back(i);
  }
  count = std::min<int>(count, static_cast<int>(valid.size()));
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(valid.size()) - 1);
    std::swap(valid[i], valid[pick(rng)]);
    out.invalidate(valid[i] / obs.n_w, valid[i] % obs.n_w);
  }
  return out;
}

std::string state_key(const WorldState& s) {
  std::string key;
  key.reserve(s.cells.size() * 2 + 8);
  for (size_t i = 0; i < s.cells.size(); ++i) {
    key.push_back(static_cast<char>(static_cast<int>(s.cells[i]) |
                                    (s.interacted[i] << 3)));
  }
  key.push_back(static_cast<char>(s.robot.x));
  key.push_back(static_cast<char>(s.robot.y));
  key.push_back(static_cast<char>(s.robot.heading));
  key.append(std::to_string(s.inventory));
  return key;
}

std::optional<int> min_steps(const WorldState& input, const WorldState& output,
                             int max_depth) {
  if (input.rows != output.rows || input.cols != output.cols) {
    throw std::invalid_argument("min_steps: grid size mismatch");
  }
  if (input == output) return 0;
  std::unordered_set<std::string> seen = {state_key(input)};
  std::deque<std::pair<WorldState, int>> queue;
  queue.emplace_back(input, 0);
  while (!queue.empty()) {
    auto [s, d] = std::move(queue.front());
    queue.pop_front();
    if (d >= max_depth) continue;
    for (int a = 0; a < kNumActions; ++a) {
      WorldState n = step_action(s, static_cast<Action>(a));
      // Picking up an item cannot be undone.
      if (n.inventory > output.inventory) continue;
      if (n == output) return d + 1;
      if (seen.insert(state_key(n)).second) queue.emplace_back(std::move(n), d + 1);
    }
  }
  return std::nullopt;
}

std::string render_ascii(const WorldState& s) {
  std::string out;
  for (int y = 0; y < s.rows; ++y) {
    for (int x = 0; x < s.cols; ++x) {
      if (s.robot.x == x && s.robot.y == y) {
        out += "^>v<"[hidx(s.robot.heading)];
        continue;
      }
      switch (s.at(x, y)) {
        case Cell::kFree: out += '.'; break;
        case Cell::kWall: out += '#'; break;
        case Cell::kItem: out += 'o'; break;
        case Cell::kTarget:
          out += s.interacted[y * s.cols + x] ? 'X' : 'T';
          break;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace ctxrepair
