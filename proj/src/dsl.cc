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

#include "ctxrepair/dsl.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace ctxrepair {

namespace {

constexpr std::array<std::pair<TokenKind, std::string_view>, vocab::kSize>
    kVocabTable = {{
        {TokenKind::kDelimiter, "DEF"},
        {TokenKind::kDelimiter, "run"},
        {TokenKind::kDelimiter, "m("},
        {TokenKind::kDelimiter, "m)"},
        {TokenKind::kDelimiter, "i("},
        {TokenKind::kDelimiter, "i)"},
        {TokenKind::kDelimiter, "e("},
        {TokenKind::kDelimiter, "e)"},
        {TokenKind::kDelimiter, "w("},
        {TokenKind::kDelimiter, "w)"},
        {TokenKind::kDelimiter, "r("},
        {TokenKind::kDelimiter, "r)"},
        {TokenKind::kDelimiter, "("},
        {TokenKind::kDelimiter, ")"},
        {TokenKind::kKeyword, "if"},
        {TokenKind::kKeyword, "ifelse"},
        {TokenKind::kKeyword, "while"},
        {TokenKind::kKeyword, "repeat"},
        {TokenKind::kKeyword, "not"},
        {TokenKind::kAction, "moveForward"},
        {TokenKind::kAction, "moveBackward"},
        {TokenKind::kAction, "strafeLeft"},
        {TokenKind::kAction, "strafeRight"},
        {TokenKind::kAction, "turnLeft"},
        {TokenKind::kAction, "turnRight"},
        {TokenKind::kAction, "interact"},
        {TokenKind::kPerception, "frontIsClear"},
        {TokenKind::kPerception, "leftIsClear"},
        {TokenKind::kPerception, "rightIsClear"},
        {TokenKind::kPerception, "targetInSight"},
        {TokenKind::kPerception, "onTarget"},
        {TokenKind::kPerception, "itemPresent"},
        {TokenKind::kRepeatCount, "R=2"},
        {TokenKind::kRepeatCount, "R=3"},
        {TokenKind::kRepeatCount, "R=4"},
        {TokenKind::kRepeatCount, "R=5"},
    }};

const std::vector<Token>& token_table() {
  static const std::vector<Token> table = [] {
    std::vector<Token> t;
    t.reserve(kVocabTable.size());
    for (size_t i = 0; i < kVocabTable.size(); ++i) {
      t.push_back({kVocabTable[i].first, kVocabTable[i].second,
                   static_cast<int>(i)});
    }
    return t;
  }();
  return table;
}

const std::unordered_map<std::string_view, int>& lexeme_index() {
  static const std::unordered_map<std::string_view, int> index = [] {
    std::unordered_map<std::string_view, int> m;
    for (const Token& t : token_table()) m.emplace(t.lexeme, t.vocab_id);
    return m;
  }();
  return index;
}

std::string describe_kinds(const std::vector<TokenKind>& kinds) {
  std::string s;
  for (size_t i = 0; i < kinds.size(); ++i) {
    if (i) s += "|";
    s += kind_name(kinds[i]);
  }
  return s;
}

std::string parse_error_message(int position,
                                const std::vector<TokenKind>& expected,
                                const std::optional<Token>& found,
                                const std::string& detail) {
  std::ostringstream os;
  os << "parse error at token " << position << ": ";
  if (!detail.empty()) {
    os << detail;
  } else {
    os << "expected " << describe_kinds(expected);
  }
  os << ", found ";
  if (found) {
    os << "'" << found->lexeme << "'";
  } else {
    os << "end of input";
  }
  return os.str();
}

}  // namespace

namespace vocab {

int size() { return kSize; }

const Token& token(int vocab_id) {
  const auto& table = token_table();
  if (vocab_id < 0 || vocab_id >= static_cast<int>(table.size())) {
    throw std::out_of_range("vocab id out of range");
  }
  return table[vocab_id];
}

std::optional<int> lookup(std::string_view lexeme) {
  const auto& idx = lexeme_index();
  auto it = idx.find(lexeme);
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

}  // namespace vocab

std::string_view action_name(Action a) {
  return vocab::token(vocab::action_id(a)).lexeme;
}

std::string_view perception_name(Perception p) {
  return vocab::token(vocab::perception_id(p)).lexeme;
}

std::string_view kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::kAction: return "Action";
    case TokenKind::kPerception: return "Perception";
    case TokenKind::kKeyword: return "Keyword";
    case TokenKind::kDelimiter: return "Delimiter";
    case TokenKind::kRepeatCount: return "RepeatCount";
  }
  return "?";
}

UnknownLexeme::UnknownLexeme(int position, std::string lexeme)
    : DslError("unknown lexeme '" + lexeme + "' at token " +
                   std::to_string(position),
               position),
      lexeme_(std::move(lexeme)) {}

ParseError::ParseError(int position, std::vector<TokenKind> expected,
                       std::optional<Token> found, const std::string& detail)
    : DslError(parse_error_message(position, expected, found, detail),
               position),
      expected_(std::move(expected)),
      found_(found) {}

TypeError::TypeError(int position, Token found)
    : ParseError(position, {TokenKind::kPerception}, found,
                 "type error: action used as a condition") {}

Stmt Stmt::make_action(Action a) {
  Stmt s;
  s.kind = StmtKind::kAction;
  s.action = a;
  return s;
}

Stmt Stmt::make_if(Condition c, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::kIf;
  s.cond = c;
  s.body = std::move(body);
  return s;
}

Stmt Stmt::make_ifelse(Condition c, std::vector<Stmt> body,
                       std::vector<Stmt> else_body) {
  Stmt s;
  s.kind = StmtKind::kIfElse;
  s.cond = c;
  s.body = std::move(body);
  s.else_body = std::move(else_body);
  return s;
}

Stmt Stmt::make_while(Condition c, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::kWhile;
  s.cond = c;
  s.body = std::move(body);
  return s;
}

Stmt Stmt::make_repeat(int count, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::kRepeat;
  s.count = count;
  s.body = std::move(body);
  return s;
}

// ---------------------------------------------------------------------------
// Lexer

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  auto emit = [&](std::string_view lexeme) {
    auto id = vocab::lookup(lexeme);
    if (!id) {
      throw UnknownLexeme(static_cast<int>(out.size()), std::string(lexeme));
    }
    out.push_back(vocab::token(*id));
  };
  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '(' || c == ')') {
      emit(src.substr(i, 1));
      ++i;
      continue;
    }
    if (std::isalpha(c)) {
      size_t j = i + 1;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) ||
              src[j] == '_')) {
        ++j;
      }
      std::string_view word = src.substr(i, j - i);
      if (word == "R" && j < src.size() && src[j] == '=') {
        size_t k = j + 1;
        while (k < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[k]))) {
          ++k;
        }
        emit(src.substr(i, k - i));
        i = k;
        continue;
      }
      // Block delimiters such as "m(" and "w)" are a single lexeme.
      if (j < src.size() && (src[j] == '(' || src[j] == ')')) {
        std::string_view with_paren = src.substr(i, j - i + 1);
        if (vocab::lookup(with_paren)) {
          emit(with_paren);
          i = j + 1;
          continue;
        }
      }
      emit(word);
      i = j;
      continue;
    }
    // Any other run of non-space characters is a single unknown lexeme.
    size_t j = i;
    while (j < src.size() && !std::isspace(static_cast<unsigned char>(src[j])))
      ++j;
    throw UnknownLexeme(static_cast<int>(out.size()),
                        std::string(src.substr(i, j - i)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Program parse_program() {
    expect(vocab::kDef);
    expect(vocab::kRun);
    expect(vocab::kProgOpen);
    Program p;
    p.body = parse_block(vocab::kProgClose);
    if (pos_ != static_cast<int>(toks_.size())) {
      throw ParseError(pos_, {}, toks_[pos_], "expected end of input");
    }
    return p;
  }

 private:
  const Token* peek() const {
    return pos_ < static_cast<int>(toks_.size()) ? &toks_[pos_] : nullptr;
  }

  std::optional<Token> found() const {
    const Token* t = peek();
    return t ? std::optional<Token>(*t) : std::nullopt;
  }

  void expect(int vocab_id) {
    const Token* t = peek();
    if (!t || t->vocab_id != vocab_id) {
      const Token& want = vocab::token(vocab_id);
      throw ParseError(pos_, {want.kind}, found(),
                       "expected '" + std::string(want.lexeme) + "'");
    }
    ++pos_;
  }

  // Statements up to and including `close`. Bodies are non-empty.
  std::vector<Stmt> parse_block(int close) {
    std::vector<Stmt> body;
    for (;;) {
      const Token* t = peek();
      if (t && t->vocab_id == close) {
        if (body.empty()) {
          throw ParseError(pos_, {TokenKind::kAction, TokenKind::kKeyword},
                           *t, "empty body");
        }
        ++pos_;
        return body;
      }
      body.push_back(parse_stmt());
    }
  }

  Condition parse_cond() {
    expect(vocab::kLParen);
    Condition c;
    const Token* t = peek();
    if (t && t->vocab_id == vocab::kNot) {
      c.negated = true;
      ++pos_;
      t = peek();
    }
    if (!t) throw ParseError(pos_, {TokenKind::kPerception}, std::nullopt);
    if (t->kind == TokenKind::kAction) throw TypeError(pos_, *t);
    if (t->kind != TokenKind::kPerception) {
      throw ParseError(pos_, {TokenKind::kPerception}, *t);
    }
    c.perception =
        static_cast<Perception>(t->vocab_id - vocab::kFirstPerception);
    ++pos_;
    expect(vocab::kRParen);
    return c;
  }

  Stmt parse_stmt() {
    const Token* t = peek();
    if (!t) {
      throw ParseError(pos_, {TokenKind::kAction, TokenKind::kKeyword},
                       std::nullopt);
    }
    if (t->kind == TokenKind::kAction) {
      ++pos_;
      return Stmt::make_action(
          static_cast<Action>(t->vocab_id - vocab::kFirstAction));
    }
    switch (t->vocab_id) {
      case vocab::kIf: {
        ++pos_;
        Condition c = parse_cond();
        expect(vocab::kIfOpen);
        return Stmt::make_if(c, parse_block(vocab::kIfClose));
      }
      case vocab::kIfElse: {
        ++pos_;
        Condition c = parse_cond();
        expect(vocab::kIfOpen);
        auto body = parse_block(vocab::kIfClose);
        expect(vocab::kElseOpen);
        auto else_body = parse_block(vocab::kElseClose);
        return Stmt::make_ifelse(c, std::move(body), std::move(else_body));
      }
      case vocab::kWhile: {
        ++pos_;
        Condition c = parse_cond();
        expect(vocab::kWhileOpen);
        return Stmt::make_while(c, parse_block(vocab::kWhileClose));
      }
      case vocab::kRepeat: {
        ++pos_;
        expect(vocab::kLParen);
        const Token* n = peek();
        if (!n || n->kind != TokenKind::kRepeatCount) {
          throw ParseError(pos_, {TokenKind::kRepeatCount}, found());
        }
        int count = n->vocab_id - vocab::kFirstCount + kMinRepeat;
        ++pos_;
        expect(vocab::kRParen);
        expect(vocab::kRepeatOpen);
        return Stmt::make_repeat(count, parse_block(vocab::kRepeatClose));
      }
      default:
        throw ParseError(pos_, {TokenKind::kAction, TokenKind::kKeyword}, *t);
    }
  }

  const std::vector<Token>& toks_;
  int pos_ = 0;
};

void emit_cond(const Condition& c, std::vector<Token>& out) {
  out.push_back(vocab::token(vocab::kLParen));
  if (c.negated) out.push_back(vocab::token(vocab::kNot));
  out.push_back(vocab::token(vocab::perception_id(c.perception)));
  out.push_back(vocab::token(vocab::kRParen));
}

void emit_block(const std::vector<Stmt>& body, std::vector<Token>& out);

void emit_stmt(const Stmt& s, std::vector<Token>& out) {
  auto tok = [&](int id) { out.push_back(vocab::token(id)); };
  switch (s.kind) {
    case StmtKind::kAction:
      tok(vocab::action_id(s.action));
      return;
    case StmtKind::kIf:
      tok(vocab::kIf);
      emit_cond(s.cond, out);
      tok(vocab::kIfOpen);
      emit_block(s.body, out);
      tok(vocab::kIfClose);
      return;
    case StmtKind::kIfElse:
      tok(vocab::kIfElse);
      emit_cond(s.cond, out);
      tok(vocab::kIfOpen);
      emit_block(s.body, out);
      tok(vocab::kIfClose);
      tok(vocab::kElseOpen);
      emit_block(s.else_body, out);
      tok(vocab::kElseClose);
      return;
    case StmtKind::kWhile:
      tok(vocab::kWhile);
      emit_cond(s.cond, out);
      tok(vocab::kWhileOpen);
      emit_block(s.body, out);
      tok(vocab::kWhileClose);
      return;
    case StmtKind::kRepeat:
      tok(vocab::kRepeat);
      tok(vocab::kLParen);
      tok(vocab::count_id(s.count));
      tok(vocab::kRParen);
      tok(vocab::kRepeatOpen);
      emit_block(s.body, out);
      tok(vocab::kRepeatClose);
      return;
  }
}

void emit_block(const std::vector<Stmt>& body, std::vector<Token>& out) {
  for (const Stmt& s : body) emit_stmt(s, out);
}

void validate_block(const std::vector<Stmt>& body) {
  if (body.empty()) throw std::invalid_argument("empty statement body");
  for (const Stmt& s : body) {
    switch (s.kind) {
      case StmtKind::kAction:
        if (static_cast<int>(s.action) >= kNumActions)
          throw std::invalid_argument("bad action");
        break;
      case StmtKind::kRepeat:
        if (s.count < kMinRepeat || s.count > kMaxRepeat)
          throw std::invalid_argument("repeat count out of range");
        validate_block(s.body);
        break;
      case StmtKind::kIfElse:
        validate_block(s.else_body);
        [[fallthrough]];
      case StmtKind::kIf:
      case StmtKind::kWhile:
        if (static_cast<int>(s.cond.perception) >= kNumPerceptions)
          throw std::invalid_argument("bad perception");
        validate_block(s.body);
        break;
    }
  }
}

int block_depth(const std::vector<Stmt>& body) {
  int d = 0;
  for (const Stmt& s : body) {
    if (!s.is_control()) continue;
    int inner = std::max(block_depth(s.body), block_depth(s.else_body));
    d = std::max(d, 1 + inner);
  }
  return d;
}

int block_count(const std::vector<Stmt>& body) {
  int n = 0;
  for (const Stmt& s : body) {
    n += 1 + block_count(s.body) + block_count(s.else_body);
  }
  return n;
}

}  // namespace

Program parse(const std::vector<Token>& tokens) {
  return Parser(tokens).parse_program();
}

Program parse_ids(const std::vector<int>& ids) {
  std::vector<Token> toks;
  toks.reserve(ids.size());
  for (int id : ids) toks.push_back(vocab::token(id));
  return parse(toks);
}

Program parse_source(std::string_view source) {
  return parse(tokenize(source));
}

std::vector<Token> token_sequence(const Program& program) {
  std::vector<Token> out;
  out.push_back(vocab::token(vocab::kDef));
  out.push_back(vocab::token(vocab::kRun));
  out.push_back(vocab::token(vocab::kProgOpen));
  emit_block(program.body, out);
  out.push_back(vocab::token(vocab::kProgClose));
  return out;
}

std::vector<int> token_ids(const Program& program) {
  std::vector<int> ids;
  for (const Token& t : token_sequence(program)) ids.push_back(t.vocab_id);
  return ids;
}

std::string join_tokens(const std::vector<Token>& toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i > 0) {
      bool tight = toks[i].vocab_id == vocab::kLParen ||
                   toks[i].vocab_id == vocab::kRParen ||
                   toks[i - 1].vocab_id == vocab::kLParen;
      if (!tight) out += ' ';
    }
    out += toks[i].lexeme;
  }
  return out;
}

std::string unparse(const Program& program) {
  return join_tokens(token_sequence(program));
}

void validate(const Program& program) { validate_block(program.body); }

int control_depth(const Program& program) { return block_depth(program.body); }

int statement_count(const Program& program) {
  return block_count(program.body);
}

// ---------------------------------------------------------------------------
// Random programs

namespace {

class ProgramSampler {
 public:
  ProgramSampler(Rng& rng, const ProgramGenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  std::vector<Stmt> block(int level, int max_len, int min_len = 1) {
    std::uniform_int_distribution<int> len(min_len, std::max(min_len, max_len));
    int n = len(rng_);
    std::vector<Stmt> body;
    body.reserve(n);
    for (int i = 0; i < n; ++i) body.push_back(stmt(level));
    return body;
  }

 private:
  Condition cond() {
    std::uniform_int_distribution<int> p(0, kNumPerceptions - 1);
    std::bernoulli_distribution neg(cfg_.negate_prob);
    Condition c;
    c.perception = static_cast<Perception>(p(rng_));
    c.negated = neg(rng_);
    return c;
  }

  Action action() {
    std::discrete_distribution<int> a(cfg_.action_mix.begin(), cfg_.action_mix.end());
    return static_cast<Action>(a(rng_));
  }

  Stmt stmt(int level) {
    if (level >= cfg_.max_depth) return Stmt::make_action(action());
    double decay = 1.0;
    for (int i = 0; i < level; ++i) decay *= cfg_.nested_control_decay;
    std::discrete_distribution<int> pick({
        cfg_.action_weight,
        cfg_.if_weight * decay,
        cfg_.ifelse_weight * decay,
        cfg_.while_weight * decay,
        cfg_.repeat_weight * decay,
    });
    int inner_len = std::max(1, cfg_.max_body_len - level);
    switch (pick(rng_)) {
      case 0:
        return Stmt::make_action(action());
      case 1: {
        Condition c = cond();
        return Stmt::make_if(c, block(level + 1, inner_len));
      }
      case 2: {
        Condition c = cond();
        auto b = block(level + 1, inner_len);
        auto e = block(level + 1, inner_len);
        return Stmt::make_ifelse(c, std::move(b), std::move(e));
      }
      case 3: {
        Condition c = cond();
        return Stmt::make_while(c, block(level + 1, inner_len));
      }
      default: {
        std::uniform_int_distribution<int> r(kMinRepeat, kMaxRepeat);
        int count = r(rng_);
        return Stmt::make_repeat(count, block(level + 1, inner_len));
      }
    }
  }

  Rng& rng_;
  const ProgramGenConfig& cfg_;
};

}  // namespace

Program random_program(Rng& rng, const ProgramGenConfig& cfg) {
  if (cfg.max_depth < 1 || cfg.max_body_len < 1 || cfg.max_top_len < 1 || cfg.min_top_len < 1 ||
      cfg.max_tokens < 5) {
    throw std::invalid_argument("random_program: bounds must be positive");
  }
  ProgramSampler sampler(rng, cfg);
  for (;;) {
    Program p;
    p.body = sampler.block(0, cfg.max_top_len, cfg.min_top_len);
    if (static_cast<int>(token_sequence(p).size()) <= cfg.max_tokens) return p;
  }
}

}  // namespace ctxrepair
