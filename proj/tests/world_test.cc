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

#include <gtest/gtest.h>

namespace ctxrepair {
namespace {

Program P(const char* src) { return parse_source(src); }

TEST(InitWorldTest, RespectsSpecAndIsConnected) {
  WorldSpec spec{10, 9, 0.15, 3, 2};
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    WorldState w = init_world(spec, rng);
    ASSERT_EQ(w.rows, 10);
    ASSERT_EQ(w.cols, 9);
    int items = 0, targets = 0, walls = 0;
    for (int y = 0; y < w.rows; ++y) {
      for (int x = 0; x < w.cols; ++x) {
        bool border = x == 0 || y == 0 || x == w.cols - 1 || y == w.rows - 1;
        if (border) {
          EXPECT_EQ(w.at(x, y), Cell::kWall);
        }
        items += w.at(x, y) == Cell::kItem;
        targets += w.at(x, y) == Cell::kTarget;
        walls += !border && w.at(x, y) == Cell::kWall;
      }
    }
    EXPECT_EQ(items, 3);
    EXPECT_EQ(targets, 2);
    EXPECT_EQ(walls, 8);  // round(0.15 * 56)
    EXPECT_EQ(w.at(w.robot.x, w.robot.y), Cell::kFree);
  }
}

TEST(InitWorldTest, InfeasibleSpecThrows) {
  Rng rng(1);
  EXPECT_THROW(init_world({4, 4, 0.0, 3, 2}, rng), InfeasibleSpec);
  EXPECT_THROW(init_world({2, 8, 0.0, 0, 0}, rng), InfeasibleSpec);
}

TEST(DynamicsTest, MovesAreRelativeToHeading) {
  WorldState w = open_room(7, 7, {3, 3, Heading::kEast});
  EXPECT_EQ(step_action(w, Action::kMoveForward).robot, (Pose{4, 3, Heading::kEast}));
  EXPECT_EQ(step_action(w, Action::kMoveBackward).robot, (Pose{2, 3, Heading::kEast}));
  EXPECT_EQ(step_action(w, Action::kStrafeLeft).robot, (Pose{3, 2, Heading::kEast}));
  EXPECT_EQ(step_action(w, Action::kStrafeRight).robot, (Pose{3, 4, Heading::kEast}));
  EXPECT_EQ(step_action(w, Action::kTurnLeft).robot.heading, Heading::kNorth);
  EXPECT_EQ(step_action(w, Action::kTurnRight).robot.heading, Heading::kSouth);
}

TEST(DynamicsTest, WallsBlockAndInteractChangesCells) {
  WorldState w = open_room(5, 5, {1, 1, Heading::kNorth});
  EXPECT_EQ(step_action(w, Action::kMoveForward), w);  // into the border
  w.at(1, 1) = Cell::kItem;
  WorldState picked = step_action(w, Action::kInteract);
  EXPECT_EQ(picked.inventory, 1);
  EXPECT_EQ(picked.at(1, 1), Cell::kFree);
  w.at(1, 1) = Cell::kTarget;
  WorldState toggled = step_action(w, Action::kInteract);
  EXPECT_EQ(toggled.interacted[1 * 5 + 1], 1);
  EXPECT_EQ(step_action(toggled, Action::kInteract), w);
  w.at(1, 1) = Cell::kFree;
  EXPECT_EQ(step_action(w, Action::kInteract), w);
}

TEST(PerceptionTest, AllPredicates) {
  WorldState w = open_room(7, 7, {1, 3, Heading::kEast});
  w.at(1, 2) = Cell::kWall;   // left of the robot (north)
  w.at(5, 3) = Cell::kTarget;
  EXPECT_TRUE(eval_perception(w, {Perception::kFrontIsClear, false}));
  EXPECT_FALSE(eval_perception(w, {Perception::kLeftIsClear, false}));
  EXPECT_TRUE(eval_perception(w, {Perception::kLeftIsClear, true}));
  EXPECT_TRUE(eval_perception(w, {Perception::kRightIsClear, false}));
  EXPECT_TRUE(eval_perception(w, {Perception::kTargetInSight, false}));
  w.at(3, 3) = Cell::kWall;  // now occluded
  EXPECT_FALSE(eval_perception(w, {Perception::kTargetInSight, false}));
  EXPECT_FALSE(eval_perception(w, {Perception::kOnTarget, false}));
  EXPECT_FALSE(eval_perception(w, {Perception::kItemPresent, false}));
  w.at(1, 3) = Cell::kItem;
  EXPECT_TRUE(eval_perception(w, {Perception::kItemPresent, false}));
}

TEST(ObservationTest, EgocentricWindowFacingNorth) {
  // Oracle: facing north, window row r is (n_h - 1 - r) cells ahead and
  // column c is (c - n_w / 2) cells to the right.
  WorldState w = open_room(9, 9, {4, 6, Heading::kNorth});
  w.at(3, 5) = Cell::kItem;
  w.at(5, 2) = Cell::kTarget;
  ViewSpec view;
  Observation o = render_observation(w, view);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      int x = 4 + (c - 2), y = 6 - (4 - r);
      ASSERT_TRUE(o.valid[r * 5 + c]) << r << "," << c;
      int cell = static_cast<int>(w.at(x, y));
      for (int ch = 0; ch < 4; ++ch) EXPECT_EQ(o.app(r, c, ch), ch == cell ? 1.0 : 0.0);
      EXPECT_DOUBLE_EQ(o.depth[r * 5 + c], (4 - r) / 5.0);
    }
  }
  EXPECT_EQ(o.app(3, 1, static_cast<int>(Cell::kItem)), 1.0);
  EXPECT_EQ(o.app(0, 3, static_cast<int>(Cell::kTarget)), 1.0);
}

TEST(ObservationTest, WallsOccludeAlongColumns) {
  WorldState w = open_room(9, 9, {4, 6, Heading::kNorth});
  w.at(4, 4) = Cell::kWall;  // two ahead in the centre column
  Observation o = render_observation(w, ViewSpec{});
  EXPECT_TRUE(o.valid[2 * 5 + 2]);
  EXPECT_EQ(o.app(2, 2, static_cast<int>(Cell::kWall)), 1.0);
  EXPECT_FALSE(o.valid[1 * 5 + 2]);
  EXPECT_FALSE(o.valid[0 * 5 + 2]);
  EXPECT_EQ(o.depth[0 * 5 + 2], 0.0);
  EXPECT_TRUE(o.valid[0 * 5 + 1]);
  EXPECT_EQ(o.valid_count(), 23);
}

TEST(ObservationTest, RotationMatchesWindowCell) {
  WorldState w = open_room(9, 9, {4, 4, Heading::kWest});
  ViewSpec view;
  // West: ahead is x - 1, right is north (y - 1).
  EXPECT_EQ(window_cell(w.robot, view, 3, 2), (std::pair<int, int>{3, 4}));
  EXPECT_EQ(window_cell(w.robot, view, 4, 3), (std::pair<int, int>{4, 3}));
  EXPECT_EQ(window_cell(w.robot, view, 4, 0), (std::pair<int, int>{4, 6}));
}

TEST(ObservationTest, NoiseHidesExactlyTheRequestedFraction) {
  WorldState w = open_room(9, 9, {4, 6, Heading::kNorth});
  Observation o = render_observation(w, ViewSpec{});
  Rng a(3), b(3);
  Observation n1 = apply_noise(o, 0.2, a);
  Observation n2 = apply_noise(o, 0.2, b);
  EXPECT_EQ(n1, n2);
  EXPECT_EQ(o.valid_count() - n1.valid_count(), 5);
  Rng c(3);
  EXPECT_EQ(apply_noise(o, 0.0, c), o);
  EXPECT_THROW(apply_noise(o, 1.5, c), std::invalid_argument);
}

TEST(GoalTest, MarksTargetPoseAndChangedCells) {
  WorldState s = open_room(9, 9, {4, 6, Heading::kNorth});
  WorldState t = s;
  t.robot = {4, 4, Heading::kEast};
  t.at(5, 5) = Cell::kItem;
  Observation o = render_observation(s, ViewSpec{});
  std::vector<double> g = render_goal(s, t, o);
  ASSERT_EQ(g.size(), 25u * kGoalChannels);
  int cell = 2 * 5 + 2;  // two ahead
  EXPECT_EQ(g[cell * kGoalChannels + 1], 1.0);  // target faces right of us
  int changed = 3 * 5 + 3;
  EXPECT_EQ(g[changed * kGoalChannels + 4], 1.0);
  double total = 0;
  for (double v : g) total += v;
  EXPECT_EQ(total, 2.0);
}

TEST(ResidualTest, FrameRelativeOffsets) {
  WorldState reached = open_room(9, 9, {2, 2, Heading::kSouth});
  WorldState target = reached;
  target.robot = {3, 6, Heading::kNorth};
  target.inventory = 1;
  std::vector<double> r = residual_features({0, 0, Heading::kSouth}, reached, target);
  // Facing south, forward is +y and right is -x.
  EXPECT_DOUBLE_EQ(r[0], 2.0);   // 4 ahead / 2
  EXPECT_DOUBLE_EQ(r[1], -0.5);  // one to the left
  EXPECT_EQ(r[2 + 2], 1.0);      // opposite heading
  EXPECT_DOUBLE_EQ(r[6], 0.25);
  EXPECT_DOUBLE_EQ(r[7], 0.0);
}

TEST(ExecuteTest, DeterministicWithTraces) {
  Program p = P("DEF run m( while(frontIsClear) w( moveForward w) turnRight "
                "repeat(R=2) r( moveForward r) m)");
  WorldState w = open_room(8, 8, {2, 5, Heading::kNorth});
  ExecLimits lim;
  lim.record_contexts = true;
  ExecResult a = execute(p, w, lim), b = execute(p, w, lim);
  EXPECT_EQ(a.final_state, b.final_state);
  EXPECT_EQ(a.action_trace, b.action_trace);
  EXPECT_EQ(a.status, ExecStatus::kOk);
  EXPECT_EQ(a.final_state.robot, (Pose{4, 1, Heading::kEast}));
  EXPECT_EQ(a.steps, 7);
  // Statements 0 (while), 1 (moveForward), 2, 3 (repeat), 4.
  ASSERT_EQ(a.context_trace.size(), 5u);
  EXPECT_EQ(a.context_trace[0].post.robot, (Pose{2, 1, Heading::kNorth}));
  EXPECT_EQ(a.context_trace[1].post.robot, (Pose{2, 4, Heading::kNorth}));
  EXPECT_TRUE(a.branches_hit.count({0, true}));
  EXPECT_TRUE(a.branches_hit.count({0, false}));
}

TEST(ExecuteTest, TimeoutOnRunawayLoops) {
  WorldState w = open_room(8, 8, {2, 5, Heading::kNorth});
  ExecLimits lim;
  lim.max_steps = 20;
  ExecResult spin = execute(P("DEF run m( while(frontIsClear) w( turnLeft w) m)"), w, lim);
  EXPECT_EQ(spin.status, ExecStatus::kTimeout);
  EXPECT_EQ(spin.steps, 20);
  ExecResult idle = execute(
      P("DEF run m( while(not onTarget) w( if(onTarget) i( turnLeft i) w) m)"), w, lim);
  EXPECT_EQ(idle.status, ExecStatus::kTimeout);
  EXPECT_EQ(idle.steps, 0);
}

TEST(MinStepsTest, ShortestPathAndLowerBound) {
  WorldState a = open_room(8, 8, {2, 5, Heading::kNorth});
  WorldState b = a;
  b.robot = {4, 5, Heading::kNorth};
  EXPECT_EQ(min_steps(a, b), 2);  // two strafes
  EXPECT_EQ(min_steps(a, a), 0);
  b.robot.heading = Heading::kSouth;
  EXPECT_EQ(min_steps(a, b), 4);
  EXPECT_FALSE(min_steps(a, b, 3).has_value());

  Rng rng(9);
  ProgramGenConfig cfg;
  cfg.max_depth = 1;
  WorldSpec spec{8, 8, 0.1, 2, 1};
  int checked = 0;
  for (int i = 0; checked < 200 && i < 2000; ++i) {
    WorldState in = init_world(spec, rng);
    Program p = random_program(rng, cfg);
    ExecResult r = execute(p, in);
    if (r.status != ExecStatus::kOk) continue;
    std::optional<int> m = min_steps(in, r.final_state, 16);
    if (!m) continue;
    EXPECT_LE(*m, r.steps);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(StateKeyTest, DistinguishesStates) {
  WorldState a = open_room(6, 6, {2, 2, Heading::kNorth});
  WorldState b = a;
  EXPECT_EQ(state_key(a), state_key(b));
  b.robot.heading = Heading::kEast;
  EXPECT_NE(state_key(a), state_key(b));
  b = a;
  b.inventory = 1;
  EXPECT_NE(state_key(a), state_key(b));
}

TEST(RenderTest, Ascii) {
  WorldState w = open_room(3, 4, {1, 1, Heading::kEast});
  w.at(2, 1) = Cell::kTarget;
  EXPECT_EQ(render_ascii(w), "####\n#>T#\n####\n");
}

}  // namespace
}  // namespace ctxrepair
