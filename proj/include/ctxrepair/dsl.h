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

#ifndef CTXREPAIR_DSL_H_
#define CTXREPAIR_DSL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// The robot language. Programs look like
//
//   DEF run m( while(frontIsClear) w( moveForward w) turnLeft m)
//
// See docs/grammar.md for the full EBNF.

namespace ctxrepair {

using Rng = std::mt19937_64;

enum class TokenKind : uint8_t {
  kAction,
  kPerception,
  kKeyword,
  kDelimiter,
  kRepeatCount,
};
inline constexpr int kNumTokenKinds = 5;

enum class Action : uint8_t {
  kMoveForward,
  kMoveBackward,
  kStrafeLeft,
  kStrafeRight,
  kTurnLeft,
  kTurnRight,
  kInteract,
};
inline constexpr int kNumActions = 7;

enum class Perception : uint8_t {
  kFrontIsClear,
  kLeftIsClear,
  kRightIsClear,
  kTargetInSight,
  kOnTarget,
  kItemPresent,
};
inline constexpr int kNumPerceptions = 6;

inline constexpr int kMinRepeat = 2;
inline constexpr int kMaxRepeat = 5;

struct Token {
  TokenKind kind;
  std::string_view lexeme;  // points into the static vocabulary table
  int vocab_id;

  bool operator==(const Token& o) const { return vocab_id == o.vocab_id; }
};

// Fixed vocabulary ids. The table order is the total order of the vocabulary.
namespace vocab {
inline constexpr int kDef = 0;
inline constexpr int kRun = 1;
inline constexpr int kProgOpen = 2;   // m(
inline constexpr int kProgClose = 3;  // m)
inline constexpr int kIfOpen = 4;     // i(
inline constexpr int kIfClose = 5;
inline constexpr int kElseOpen = 6;   // e(
inline constexpr int kElseClose = 7;
inline constexpr int kWhileOpen = 8;  // w(
inline constexpr int kWhileClose = 9;
inline constexpr int kRepeatOpen = 10;  // r(
inline constexpr int kRepeatClose = 11;
inline constexpr int kLParen = 12;
inline constexpr int kRParen = 13;
inline constexpr int kIf = 14;
inline constexpr int kIfElse = 15;
inline constexpr int kWhile = 16;
inline constexpr int kRepeat = 17;
inline constexpr int kNot = 18;
inline constexpr int kFirstAction = 19;
inline constexpr int kFirstPerception = kFirstAction + kNumActions;        // 26
inline constexpr int kFirstCount = kFirstPerception + kNumPerceptions;     // 32
inline constexpr int kSize = kFirstCount + (kMaxRepeat - kMinRepeat + 1);  // 36

int size();
const Token& token(int vocab_id);
std::optional<int> lookup(std::string_view lexeme);

inline int action_id(Action a) { return kFirstAction + static_cast<int>(a); }
inline int perception_id(Perception p) {
  return kFirstPerception + static_cast<int>(p);
}
inline int count_id(int count) { return kFirstCount + count - kMinRepeat; }
}  // namespace vocab

std::string_view action_name(Action a);
std::string_view perception_name(Perception p);

// ---------------------------------------------------------------------------
// AST

struct Condition {
  Perception perception = Perception::kFrontIsClear;
  bool negated = false;

  bool operator==(const Condition&) const = default;
};

enum class StmtKind : uint8_t { kAction, kIf, kIfElse, kWhile, kRepeat };

// A statement. Fields not used by `kind` keep their default values so that
// defaulted equality is structural equality.
struct Stmt {
  StmtKind kind = StmtKind::kAction;
  Action action = Action::kMoveForward;
  Condition cond;
  int count = 0;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;

  bool operator==(const Stmt&) const = default;

  static Stmt make_action(Action a);
  static Stmt make_if(Condition c, std::vector<Stmt> body);
  static Stmt make_ifelse(Condition c, std::vector<Stmt> body,
                          std::vector<Stmt> else_body);
  static Stmt make_while(Condition c, std::vector<Stmt> body);
  static Stmt make_repeat(int count, std::vector<Stmt> body);

  bool is_control() const { return kind != StmtKind::kAction; }
};

struct Program {
  std::vector<Stmt> body;

  bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Errors. Positions are token indices; `tokens.size()` denotes end of input.

class DslError : public std::runtime_error {
 public:
  DslError(const std::string& what, int position)
      : std::runtime_error(what), position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

class UnknownLexeme : public DslError {
 public:
  UnknownLexeme(int position, std::string lexeme);
  const std::string& lexeme() const { return lexeme_; }

 private:
  std::string lexeme_;
};

class ParseError : public DslError {
 public:
  ParseError(int position, std::vector<TokenKind> expected,
             std::optional<Token> found, const std::string& detail = "");
  const std::vector<TokenKind>& expected() const { return expected_; }
  const std::optional<Token>& found() const { return found_; }

 private:
  std::vector<TokenKind> expected_;
  std::optional<Token> found_;
};

// An action token in a condition slot.
class TypeError : public ParseError {
 public:
  TypeError(int position, Token found);
};

std::string_view kind_name(TokenKind k);

// ---------------------------------------------------------------------------
// Front end

std::vector<Token> tokenize(std::string_view source);
Program parse(const std::vector<Token>& tokens);
Program parse_ids(const std::vector<int>& vocab_ids);
Program parse_source(std::string_view source);

std::string unparse(const Program& program);
std::string join_tokens(const std::vector<Token>& tokens);

std::vector<Token> token_sequence(const Program& program);
std::vector<int> token_ids(const Program& program);

// Checks the invariants a parsed program always satisfies. Throws
// std::invalid_argument on a hand-built AST that violates them.
void validate(const Program& program);

// Nesting depth of control statements (0 for straight-line programs).
int control_depth(const Program& program);

int statement_count(const Program& program);

// ---------------------------------------------------------------------------
// Random programs

struct ProgramGenConfig {
  int max_depth = 3;
  int max_body_len = 4;   // statements per body
  int min_top_len = 1;    // statements at the top level
  int max_top_len = 5;
  int max_tokens = 48;
  double action_weight = 6.0;
  double if_weight = 1.0;
  double ifelse_weight = 0.6;
  double while_weight = 1.0;
  double repeat_weight = 1.0;
  // Relative frequency of each action, in Action order.
  std::array<double, kNumActions> action_mix = {1, 1, 1, 1, 1, 1, 1};
  double negate_prob = 0.3;
  // Each nesting level multiplies control weights by this factor.
  double nested_control_decay = 0.5;
};

Program random_program(Rng& rng, const ProgramGenConfig& cfg = {});

}  // namespace ctxrepair

#endif  // CTXREPAIR_DSL_H_
