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

#ifndef CTXREPAIR_WORLD_H_
#define CTXREPAIR_WORLD_H_

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctxrepair/dsl.h"

namespace ctxrepair {

enum class Cell : uint8_t { kFree, kWall, kItem, kTarget };
inline constexpr int kNumCellTypes = 4;

enum class Heading : uint8_t { kNorth, kEast, kSouth, kWest };

struct Pose {
  int x = 0;  // column
  int y = 0;  // row, north is y - 1
  Heading heading = Heading::kNorth;

  bool operator==(const Pose&) const = default;
};

struct WorldState {
  int rows = 0;
  int cols = 0;
  std::vector<Cell> cells;         // row-major
  std::vector<uint8_t> interacted;  // per cell, meaningful on targets
  Pose robot;
  int inventory = 0;

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < cols && y < rows;
  }
  Cell at(int x, int y) const { return cells[y * cols + x]; }
  Cell& at(int x, int y) { return cells[y * cols + x]; }
  bool blocked(int x, int y) const {
    return !in_bounds(x, y) || at(x, y) == Cell::kWall;
  }

  // Grid contents, pose, inventory and interacted flags.
  bool operator==(const WorldState&) const = default;
};

struct WorldSpec {
  int rows = 8;
  int cols = 8;
  double wall_density = 0.12;  // fraction of interior cells
  int item_count = 2;
  int target_count = 1;
};

class InfeasibleSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Border walls, random interior walls with all free cells connected, then
// items, targets and the robot on distinct free cells.
WorldState init_world(const WorldSpec& spec, Rng& rng);

// Empty bordered room, used by fixtures.
WorldState open_room(int rows, int cols, Pose robot);

// ---------------------------------------------------------------------------
// Observation

struct ViewSpec {
  int n_h = 5;
  int n_w = 5;
  int n_c = kNumCellTypes;

  bool operator==(const ViewSpec&) const = default;
};

// Egocentric window: row n_h-1 is the robot's own row with the robot in the
// centre column; row 0 is farthest ahead. Appearance is n_h x n_w x n_c
// (HWC, one-hot cell types), depth is n_h x n_w.
struct Observation {
  int n_h = 0;
  int n_w = 0;
  int n_c = 0;
  std::vector<double> appearance;
  std::vector<double> depth;
  std::vector<uint8_t> valid;

  double& app(int r, int c, int ch) { return appearance[(r * n_w + c) * n_c + ch]; }
  double app(int r, int c, int ch) const {
    return appearance[(r * n_w + c) * n_c + ch];
  }
  int valid_count() const;
  void invalidate(int r, int c);

  bool operator==(const Observation&) const = default;
};

// World cell seen at window position (r, c).
std::pair<int, int> window_cell(const Pose& pose, const ViewSpec& view, int r,
                                int c);

Observation render_observation(const WorldState& state, const ViewSpec& view);

// Where the task wants the robot to end up, drawn in the current egocentric
// frame: channels 0..3 one-hot relative heading of the target pose at its cell,
// channel 4 marks cells whose content differs between `state` and `target`.
// Only cells valid in `visible` are drawn.
inline constexpr int kGoalChannels = 5;
std::vector<double> render_goal(const WorldState& state,
                                const WorldState& target,
                                const Observation& visible);

// How far a run ended from its target, seen from `frame`: target minus
// reached position projected on frame's forward and right axes (clamped to
// [-4, 4], halved), one-hot relative heading of target vs reached,
// inventory difference / 4 and number of differing cells / 4.
inline constexpr int kResidualFeatures = 8;
std::vector<double> residual_features(const Pose& frame,
                                      const WorldState& reached,
                                      const WorldState& target);

// ---------------------------------------------------------------------------
// Dynamics

WorldState step_action(const WorldState& state, Action action);
bool eval_perception(const WorldState& state, Condition cond);

enum class ExecStatus { kOk, kTimeout };

struct ExecLimits {
  int max_steps = 100;
  // Record the world state at entry and exit of each statement's first
  // dynamic occurrence.
  bool record_contexts = false;
};

// State snapshot around the first dynamic occurrence of a statement. Statement
// ids are pre-order indices (the same numbering as extract_segments). `post`
// is the state at cutoff when execution timed out inside the statement.
struct StmtSnapshot {
  int stmt_id = 0;
  WorldState pre;
  WorldState post;
};

struct ExecResult {
  WorldState final_state;
  std::vector<Action> action_trace;
  std::vector<StmtSnapshot> context_trace;  // ordered by first entry
  std::set<std::pair<int, bool>> branches_hit;
  int steps = 0;
  ExecStatus status = ExecStatus::kOk;
};

ExecResult execute(const Program& program, const WorldState& input,
                   const ExecLimits& limits = {});

// ---------------------------------------------------------------------------

Observation apply_noise(const Observation& obs, double fraction, Rng& rng);

// Compact byte key identifying a state (grid, flags, pose, inventory).
std::string state_key(const WorldState& s);

// Shortest action sequence from `input` to `output` (breadth-first search).
std::optional<int> min_steps(const WorldState& input, const WorldState& output,
                             int max_depth = 16);

Heading turn_left(Heading h);
Heading turn_right(Heading h);
char heading_char(Heading h);
std::string render_ascii(const WorldState& state);

}  // namespace ctxrepair

#endif  // CTXREPAIR_WORLD_H_
