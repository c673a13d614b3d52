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


#include "ctxrepair/repair.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <unordered_set>

namespace ctxrepair {

int io_pass_count(const Program& program, const std::vector<IOPair>& pairs,
                  const ExecLimits& limits) {
  ExecLimits lim = limits;
  lim.record_contexts = false;
  int pass = 0;
  for (const IOPair& io : pairs) {
    ExecResult r = execute(program, io.input, lim);
    if (r.status == ExecStatus::kOk && r.final_state == io.output) ++pass;
  }
  return pass;
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Example make_example(const Program& candidate, const std::vector<IOPair>& spec,
                     const ContextOptions& opts, const Program* gold) {
  if (spec.empty()) throw std::invalid_argument("make_example: empty spec");
  const size_t pairs = opts.all_pairs ? spec.size() : 1;
  std::vector<ContextCapture> caps;
  caps.reserve(pairs);
  for (size_t k = 0; k < pairs; ++k) {
    caps.push_back(capture_contexts(candidate, spec[k].input, opts.limits,
                                    opts.view, &spec[k].output));
  }
  if (opts.noise > 0.0) {
    const uint64_t base = opts.noise_seed ^ fnv1a(unparse(candidate));
    for (size_t k = 0; k < pairs; ++k) {
      Rng rng(base + 0x9e3779b97f4a7c15ull * (k + 1));
      for (EnvContext& ctx : caps[k].contexts) {
        ctx.pre = apply_noise(ctx.pre, opts.noise, rng);
        ctx.post = apply_noise(ctx.post, opts.noise, rng);
      }
    }
  }
  std::vector<const ContextCapture*> ptrs;
  for (const ContextCapture& c : caps) ptrs.push_back(&c);
  return build_example(candidate, ptrs, gold);
}

std::string origin_name(Origin o) {
  switch (o) {
    case Origin::kGiven: return "given";
    case Origin::kCorrupted: return "corrupted";
    case Origin::kSynthesized: return "synthesized";
    case Origin::kRepaired: return "repaired";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Corruption

std::vector<int> substitutes(int id) {
  std::vector<int> out;
  auto range = [&](int begin, int n) {
    for (int v = begin; v < begin + n; ++v) {
      if (v != id) out.push_back(v);
    }
  };
  const TokenKind kind = vocab::token(id).kind;
  if (kind == TokenKind::kAction) {
    range(vocab::kFirstAction, kNumActions);
  } else if (kind == TokenKind::kPerception) {
    range(vocab::kFirstPerception, kNumPerceptions);
  } else if (kind == TokenKind::kRepeatCount) {
    range(vocab::kFirstCount, kMaxRepeat - kMinRepeat + 1);
  } else if (id == vocab::kIf) {
    out.push_back(vocab::kWhile);
  } else if (id == vocab::kWhile) {
    out.push_back(vocab::kIf);
  }
  return out;
}

std::vector<int> repairable_positions(const Program& program) {
  std::vector<int> out;
  const std::vector<int> ids = token_ids(program);
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!substitutes(ids[i]).empty()) out.push_back(static_cast<int>(i));
  }
  return out;
}

void apply_substitution(std::vector<int>& ids, int pos, int id) {
  const int old = ids.at(pos);
  const std::vector<int> subs = substitutes(old);
  if (std::find(subs.begin(), subs.end(), id) == subs.end()) {
    throw std::invalid_argument("apply_substitution: not a valid substitute");
  }
  ids[pos] = id;
  if (old != vocab::kIf && old != vocab::kWhile) return;
  const int open_old = old == vocab::kIf ? vocab::kIfOpen : vocab::kWhileOpen;
  const int open_new = id == vocab::kIf ? vocab::kIfOpen : vocab::kWhileOpen;
  size_t i = pos + 1;
  while (i < ids.size() && ids[i] != open_old) ++i;
  int depth = 0;
  for (; i < ids.size(); ++i) {
    if (ids[i] == open_old) {
      if (depth++ == 0) ids[i] = open_new;
    } else if (ids[i] == open_old + 1) {
      if (--depth == 0) {
        ids[i] = open_new + 1;
        return;
      }
    }
  }
  throw std::invalid_argument("apply_substitution: unbalanced body");
}

Candidate corrupt(const Program& gold, int budget, Rng& rng) {
  if (budget < 0) throw std::invalid_argument("corrupt: negative budget");
  std::vector<int> positions = repairable_positions(gold);
  if (budget > static_cast<int>(positions.size())) {
    throw NotEnoughPositions("corrupt: budget " + std::to_string(budget) +
                             " exceeds " + std::to_string(positions.size()) +
                             " repairable positions");
  }
  std::vector<int> ids = token_ids(gold);
  for (int i = 0; i < budget; ++i) {
    std::uniform_int_distribution<size_t> pick(i, positions.size() - 1);
    std::swap(positions[i], positions[pick(rng)]);
    const int pos = positions[i];
    const std::vector<int> subs = substitutes(ids[pos]);
    std::uniform_int_distribution<size_t> sub(0, subs.size() - 1);
    apply_substitution(ids, pos, subs[sub(rng)]);
  }
  Candidate c;
  c.program = parse_ids(ids);
  c.origin = Origin::kCorrupted;
  c.edit_count = budget;
  return c;
}

// ---------------------------------------------------------------------------
// Enumerative synthesis

namespace {

std::vector<Stmt> synth_alphabet() {
  std::vector<Stmt> out;
  std::vector<Stmt> actions;
  for (int a = 0; a < kNumActions; ++a) {
    actions.push_back(Stmt::make_action(static_cast<Action>(a)));
  }
  out = actions;
  for (int r = kMinRepeat; r <= kMaxRepeat; ++r) {
    for (const Stmt& a : actions) out.push_back(Stmt::make_repeat(r, {a}));
  }
  for (int neg = 0; neg < 2; ++neg) {
    for (int p = 0; p < kNumPerceptions; ++p) {
      Condition c{static_cast<Perception>(p), neg == 1};
      for (const Stmt& a : actions) {
        out.push_back(Stmt::make_if(c, {a}));
        out.push_back(Stmt::make_while(c, {a}));
      }
    }
  }
  return out;
}

int stmt_tokens(const Stmt& s) {
  return static_cast<int>(token_ids(Program{{s}}).size()) - 4;
}

struct SynthNode {
  std::vector<Stmt> body;
  std::vector<WorldState> states;
  std::vector<int> steps;
  int cost = 0;
  int pass = 0;
};

bool rank_less(const Candidate& a, const Candidate& b, const std::string& sa,
               const std::string& sb) {
  if (a.io_pass != b.io_pass) return a.io_pass > b.io_pass;
  if (a.mean_log_prob != b.mean_log_prob) return a.mean_log_prob > b.mean_log_prob;
  return sa < sb;
}

}  // namespace

std::vector<Candidate> synthesize_candidates(const std::vector<IOPair>& spec,
                                             int beam_k,
                                             const SynthConfig& cfg) {
  if (spec.empty()) throw std::invalid_argument("synthesize: empty spec");
  if (beam_k < 1) throw std::invalid_argument("synthesize: beam_k < 1");
  const std::vector<Stmt> alphabet = synth_alphabet();
  std::vector<int> costs;
  for (const Stmt& s : alphabet) costs.push_back(stmt_tokens(s));
  const int budget = cfg.max_tokens - 4;

  auto key_of = [](const std::vector<WorldState>& states) {
    std::string k;
    for (const WorldState& s : states) {
      k += state_key(s);
      k.push_back('|');
    }
    return k;
  };

  std::vector<SynthNode> nodes;
  SynthNode root;
  for (const IOPair& io : spec) root.states.push_back(io.input);
  root.steps.assign(spec.size(), 0);
  nodes.push_back(root);
  std::unordered_set<std::string> seen = {key_of(root.states)};
  using Entry = std::pair<int, size_t>;  // cost, node index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> frontier;
  frontier.push({0, 0});

  ExecLimits lim = cfg.limits;
  lim.record_contexts = false;
  long generated = 0;
  while (!frontier.empty() && generated < cfg.max_expansions) {
    const size_t idx = frontier.top().second;
    frontier.pop();
    for (size_t a = 0; a < alphabet.size() && generated < cfg.max_expansions; ++a) {
      const int cost = nodes[idx].cost + costs[a];
      if (cost > budget) continue;
      ++generated;
      SynthNode child;
      child.cost = cost;
      bool ok = true;
      const Program step{{alphabet[a]}};
      for (size_t k = 0; k < spec.size() && ok; ++k) {
        ExecLimits l = lim;
        l.max_steps = lim.max_steps - nodes[idx].steps[k];
        ExecResult r = execute(step, nodes[idx].states[k], l);
        ok = r.status == ExecStatus::kOk;
        child.states.push_back(std::move(r.final_state));
        child.steps.push_back(nodes[idx].steps[k] + r.steps);
      }
      if (!ok || !seen.insert(key_of(child.states)).second) continue;
      for (size_t k = 0; k < spec.size(); ++k) {
        if (child.states[k] == spec[k].output) ++child.pass;
      }
      child.body = nodes[idx].body;
      child.body.push_back(alphabet[a]);
      nodes.push_back(std::move(child));
      frontier.push({cost, nodes.size() - 1});
    }
  }

  std::vector<size_t> order;
  for (size_t i = 1; i < nodes.size(); ++i) order.push_back(i);
  std::vector<std::string> src(nodes.size());
  for (size_t i : order) src[i] = unparse(Program{nodes[i].body});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (nodes[a].pass != nodes[b].pass) return nodes[a].pass > nodes[b].pass;
    if (nodes[a].cost != nodes[b].cost) return nodes[a].cost < nodes[b].cost;
    return src[a] < src[b];
  });
  if (order.empty() || nodes[order[0]].pass == 0) {
    throw SearchExhausted("no program within " + std::to_string(cfg.max_tokens) +
                          " tokens satisfies any spec pair");
  }
  std::vector<Candidate> out;
  for (size_t i = 0; i < order.size() && static_cast<int>(out.size()) < beam_k; ++i) {
    Candidate c;
    c.program = Program{nodes[order[i]].body};
    c.origin = Origin::kSynthesized;
    c.beam_rank = static_cast<int>(out.size());
    c.io_pass = io_pass_count(c.program, spec, cfg.limits);
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Repair

std::vector<std::pair<int, std::vector<double>>> NeuralScorer::score(
    const Program& candidate, const std::vector<IOPair>& spec) {
  Example ex = make_example(candidate, spec, opts_);
  std::vector<std::vector<double>> dists = predict_nodes(params_, ex);
  std::vector<std::pair<int, std::vector<double>>> out;
  out.reserve(dists.size());
  for (int i = 0; i < ex.graph.size(); ++i) {
    out.emplace_back(ex.graph.nodes[i].token_index, std::move(dists[i]));
  }
  return out;
}

void validate(const RepairConfig& cfg) {
  if (cfg.max_rounds < 1 || cfg.edits_per_round < 1 || cfg.beam_k < 1 ||
      !(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw std::invalid_argument(
        "repair config: rounds, edits and beam must be positive and tau in (0, 1)");
  }
}

namespace {

struct Variant {
  Candidate cand;
  std::string src;
  std::vector<int> ids;
  std::vector<std::pair<int, std::vector<double>>> dists;
};

Variant evaluate_variant(Candidate c, const std::vector<IOPair>& spec,
                         TokenScorer& scorer, const RepairConfig& cfg) {
  Variant v;
  v.ids = token_ids(c.program);
  v.src = unparse(c.program);
  v.dists = scorer.score(c.program, spec);
  double total = 0.0;
  for (const auto& [pos, p] : v.dists) total += std::log(std::max(p[v.ids[pos]], 1e-300));
  c.mean_log_prob = v.dists.empty() ? 0.0 : total / static_cast<double>(v.dists.size());
  c.io_pass = io_pass_count(c.program, spec, cfg.limits);
  v.cand = std::move(c);
  return v;
}

struct Proposal {
  double p;
  int pos;
  int id;
};

std::vector<Proposal> proposals(const Variant& v, const RepairConfig& cfg) {
  std::vector<Proposal> out;
  for (const auto& [pos, p] : v.dists) {
    const int best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (best == v.ids[pos] || p[best] < cfg.tau) continue;
    const std::vector<int> subs = substitutes(v.ids[pos]);
    if (std::find(subs.begin(), subs.end(), best) == subs.end()) continue;
    out.push_back({p[best], pos, best});
  }
  std::sort(out.begin(), out.end(), [](const Proposal& a, const Proposal& b) {
    if (a.p != b.p) return a.p > b.p;
    return a.pos < b.pos;
  });
  if (static_cast<int>(out.size()) > cfg.edits_per_round) out.resize(cfg.edits_per_round);
  return out;
}

void sort_variants(std::vector<Variant>& vs) {
  std::stable_sort(vs.begin(), vs.end(), [](const Variant& a, const Variant& b) {
    return rank_less(a.cand, b.cand, a.src, b.src);
  });
}

}  // namespace

RepairResult repair(const Candidate& candidate, const std::vector<IOPair>& spec,
                    TokenScorer& scorer, const RepairConfig& cfg) {
  validate(cfg);
  if (spec.empty()) throw std::invalid_argument("repair: empty spec");
  validate(candidate.program);
  const int K = static_cast<int>(spec.size());
  RepairResult result;
  std::vector<Variant> beam = {evaluate_variant(candidate, spec, scorer, cfg)};
  std::set<std::string> seen = {beam[0].src};
  std::set<std::string> expanded;
  bool edited = false;
  while (beam[0].cand.io_pass < K && result.rounds < cfg.max_rounds) {
    std::vector<Variant> pool;
    for (const Variant& v : beam) {
      if (!expanded.insert(v.src).second) continue;
      const std::vector<Proposal> props = proposals(v, cfg);
      std::vector<std::vector<Proposal>> edit_sets;
      for (const Proposal& p : props) edit_sets.push_back({p});
      if (props.size() > 1) edit_sets.push_back(props);
      for (const auto& edits : edit_sets) {
        std::vector<int> ids = v.ids;
        for (const Proposal& p : edits) apply_substitution(ids, p.pos, p.id);
        Candidate c;
        try {
          c.program = parse_ids(ids);
        } catch (const DslError&) {
          continue;
        }
        c.origin = Origin::kRepaired;
        c.edit_count = v.cand.edit_count + static_cast<int>(edits.size());
        if (!seen.insert(unparse(c.program)).second) continue;
        pool.push_back(evaluate_variant(std::move(c), spec, scorer, cfg));
      }
    }
    if (pool.empty()) break;
    edited = true;
    ++result.rounds;
    for (Variant& v : beam) pool.push_back(std::move(v));
    sort_variants(pool);
    if (static_cast<int>(pool.size()) > cfg.beam_k) pool.resize(cfg.beam_k);
    beam = std::move(pool);
  }
  result.no_edit_applied = !edited;
  for (Variant& v : beam) result.ranked.push_back(std::move(v.cand));
  return result;
}

RepairResult trail_eval_repair(const std::vector<IOPair>& spec,
                               TokenScorer& scorer, const RepairConfig& cfg,
                               const SynthConfig& synth,
                               const std::vector<Candidate>* supplied) {
  validate(cfg);
  std::vector<Candidate> cands =
      supplied ? *supplied : synthesize_candidates(spec, cfg.beam_k, synth);
  RepairResult merged;
  merged.no_edit_applied = true;
  std::map<std::string, Candidate> best;
  for (const Candidate& c : cands) {
    RepairResult r = repair(c, spec, scorer, cfg);
    merged.rounds = std::max(merged.rounds, r.rounds);
    merged.no_edit_applied = merged.no_edit_applied && r.no_edit_applied;
    for (Candidate& rc : r.ranked) {
      std::string src = unparse(rc.program);
      auto it = best.find(src);
      if (it == best.end()) best.emplace(std::move(src), std::move(rc));
    }
  }
  std::vector<std::pair<std::string, Candidate>> all(best.begin(), best.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return rank_less(a.second, b.second, a.first, b.first);
  });
  for (auto& [src, c] : all) {
    if (static_cast<int>(merged.ranked.size()) == cfg.beam_k) break;
    merged.ranked.push_back(std::move(c));
  }
  return merged;
}

}  // namespace ctxrepair
