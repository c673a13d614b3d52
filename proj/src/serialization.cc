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


#include "ctxrepair/serialization.h"

#include <fstream>
#include <sstream>

namespace ctxrepair {

namespace {

char cell_code(Cell c, bool interacted) {
  switch (c) {
    case Cell::kFree: return '.';
    case Cell::kWall: return '#';
    case Cell::kItem: return 'o';
    case Cell::kTarget: return interacted ? 'X' : 'T';
  }
  return '?';
}

Heading heading_from_char(char c) {
  switch (c) {
    case 'N': return Heading::kNorth;
    case 'E': return Heading::kEast;
    case 'S': return Heading::kSouth;
    case 'W': return Heading::kWest;
  }
  throw FormatError(std::string("bad heading '") + c + "'");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Json world_to_json(const WorldState& w) {
  std::string cells;
  cells.reserve(w.cells.size());
  for (size_t i = 0; i < w.cells.size(); ++i) {
    cells.push_back(cell_code(w.cells[i], w.interacted[i]));
  }
  return {{"rows", w.rows},
          {"cols", w.cols},
          {"cells", cells},
          {"robot",
           {{"x", w.robot.x},
            {"y", w.robot.y},
            {"heading", std::string(1, heading_char(w.robot.heading))}}},
          {"inventory", w.inventory}};
}

WorldState world_from_json(const Json& j) {
  WorldState w;
  w.rows = j.at("rows");
  w.cols = j.at("cols");
  const std::string cells = j.at("cells");
  if (w.rows <= 0 || w.cols <= 0 ||
      cells.size() != static_cast<size_t>(w.rows) * w.cols) {
    throw FormatError("world: cell string does not match rows x cols");
  }
  w.cells.resize(cells.size());
  w.interacted.assign(cells.size(), 0);
  for (size_t i = 0; i < cells.size(); ++i) {
    switch (cells[i]) {
      case '.': w.cells[i] = Cell::kFree; break;
      case '#': w.cells[i] = Cell::kWall; break;
      case 'o': w.cells[i] = Cell::kItem; break;
      case 'T': w.cells[i] = Cell::kTarget; break;
      case 'X':
        w.cells[i] = Cell::kTarget;
        w.interacted[i] = 1;
        break;
      default:
        throw FormatError(std::string("world: bad cell code '") + cells[i] + "'");
    }
  }
  const Json& r = j.at("robot");
  w.robot.x = r.at("x");
  w.robot.y = r.at("y");
  const std::string h = r.at("heading");
  if (h.size() != 1) throw FormatError("world: bad heading");
  w.robot.heading = heading_from_char(h[0]);
  w.inventory = j.at("inventory");
  if (!w.in_bounds(w.robot.x, w.robot.y) || w.at(w.robot.x, w.robot.y) == Cell::kWall) {
    throw FormatError("world: robot is not on a free cell");
  }
  return w;
}

namespace {

Json io_to_json(const IOPair& io) {
  return {{"input_world", world_to_json(io.input)},
          {"output_world", world_to_json(io.output)}};
}

IOPair io_from_json(const Json& j) {
  return {world_from_json(j.at("input_world")), world_from_json(j.at("output_world"))};
}

}  // namespace

Json sample_to_json(const Sample& s) {
  Json spec = Json::array();
  for (const IOPair& io : s.spec_io) spec.push_back(io_to_json(io));
  return {{"seed", s.seed},
          {"program_src", unparse(s.gold)},
          {"spec_io", spec},
          {"test_io", io_to_json(s.test_io)},
          {"complexity", bucket_label(s.complexity())},
          {"min_steps", s.min_steps}};
}

Sample sample_from_json(const Json& j) {
  Sample s;
  s.seed = j.at("seed");
  s.gold = parse_source(j.at("program_src").get<std::string>());
  for (const Json& io : j.at("spec_io")) s.spec_io.push_back(io_from_json(io));
  s.test_io = io_from_json(j.at("test_io"));
  s.min_steps = j.at("min_steps");
  if (j.at("complexity") != bucket_label(s.complexity())) {
    throw FormatError("sample: complexity does not match min_steps");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Configs

Json to_json(const WorldSpec& c) {
  return {{"rows", c.rows},
          {"cols", c.cols},
          {"wall_density", c.wall_density},
          {"item_count", c.item_count},
          {"target_count", c.target_count}};
}

void from_json(const Json& j, WorldSpec& c) {
  read_opt(j, "rows", c.rows);
  read_opt(j, "cols", c.cols);
  read_opt(j, "wall_density", c.wall_density);
  read_opt(j, "item_count", c.item_count);
  read_opt(j, "target_count", c.target_count);
}

Json to_json(const ProgramGenConfig& c) {
  return {{"max_depth", c.max_depth},
          {"max_body_len", c.max_body_len},
          {"min_top_len", c.min_top_len},
          {"max_top_len", c.max_top_len},
          {"max_tokens", c.max_tokens},
          {"action_weight", c.action_weight},
          {"if_weight", c.if_weight},
          {"ifelse_weight", c.ifelse_weight},
          {"while_weight", c.while_weight},
          {"repeat_weight", c.repeat_weight},
          {"action_mix", c.action_mix},
          {"negate_prob", c.negate_prob},
          {"nested_control_decay", c.nested_control_decay}};
}

void from_json(const Json& j, ProgramGenConfig& c) {
  read_opt(j, "max_depth", c.max_depth);
  read_opt(j, "max_body_len", c.max_body_len);
  read_opt(j, "min_top_len", c.min_top_len);
  read_opt(j, "max_top_len", c.max_top_len);
  read_opt(j, "max_tokens", c.max_tokens);
  read_opt(j, "action_weight", c.action_weight);
  read_opt(j, "if_weight", c.if_weight);
  read_opt(j, "ifelse_weight", c.ifelse_weight);
  read_opt(j, "while_weight", c.while_weight);
  read_opt(j, "repeat_weight", c.repeat_weight);
  read_opt(j, "action_mix", c.action_mix);
  read_opt(j, "negate_prob", c.negate_prob);
  read_opt(j, "nested_control_decay", c.nested_control_decay);
}

Json to_json(const DataConfig& c) {
  return {{"num_samples", c.num_samples},
          {"spec_pairs", c.spec_pairs},
          {"world", to_json(c.world)},
          {"program", to_json(c.program)},
          {"max_steps", c.max_steps},
          {"min_test_steps", c.min_test_steps},
          {"search_depth", c.search_depth},
          {"max_attempts", c.max_attempts},
          {"train_ratio", c.train_ratio},
          {"valid_ratio", c.valid_ratio},
          {"seed", c.seed}};
}

void from_json(const Json& j, DataConfig& c) {
  read_opt(j, "num_samples", c.num_samples);
  read_opt(j, "spec_pairs", c.spec_pairs);
  if (j.contains("world")) from_json(j.at("world"), c.world);
  if (j.contains("program")) from_json(j.at("program"), c.program);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "min_test_steps", c.min_test_steps);
  read_opt(j, "search_depth", c.search_depth);
  read_opt(j, "max_attempts", c.max_attempts);
  read_opt(j, "train_ratio", c.train_ratio);
  read_opt(j, "valid_ratio", c.valid_ratio);
  read_opt(j, "seed", c.seed);
}

Json to_json(const ModelConfig& c) {
  Json conv = Json::array();
  for (const ConvSpec& s : c.conv) {
    conv.push_back({{"kernel", s.kernel},
                    {"channels", s.channels},
                    {"activation", s.activation == Activation::kRelu ? "relu" : "linear"}});
  }
  return {{"vocab_size", c.vocab_size},
          {"d", c.d},
          {"view", {{"n_h", c.view.n_h}, {"n_w", c.view.n_w}, {"n_c", c.view.n_c}}},
          {"conv", conv},
          {"leaky_slope", c.leaky_slope},
          {"mode", mode_name(c.mode)}};
}

void from_json(const Json& j, ModelConfig& c) {
  read_opt(j, "vocab_size", c.vocab_size);
  read_opt(j, "d", c.d);
  if (j.contains("view")) {
    const Json& v = j.at("view");
    read_opt(v, "n_h", c.view.n_h);
    read_opt(v, "n_w", c.view.n_w);
    read_opt(v, "n_c", c.view.n_c);
  }
  if (j.contains("conv")) {
    c.conv.clear();
    for (const Json& s : j.at("conv")) {
      const std::string act = s.value("activation", "relu");
      if (act != "relu" && act != "linear") throw FormatError("bad activation " + act);
      c.conv.push_back({s.value("kernel", 3), s.at("channels").get<int>(),
                        act == "relu" ? Activation::kRelu : Activation::kLinear});
    }
  }
  read_opt(j, "leaky_slope", c.leaky_slope);
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode"));
}

Json to_json(const AdamConfig& c) {
  return {{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
}

void from_json(const Json& j, AdamConfig& c) {
  read_opt(j, "lr", c.lr);
  read_opt(j, "beta1", c.beta1);
  read_opt(j, "beta2", c.beta2);
  read_opt(j, "eps", c.eps);
}

Json to_json(const ContextOptions& c) {
  return {{"max_steps", c.limits.max_steps},
          {"all_pairs", c.all_pairs},
          {"noise", c.noise},
          {"noise_seed", c.noise_seed}};
}

void from_json(const Json& j, ContextOptions& c) {
  read_opt(j, "max_steps", c.limits.max_steps);
  read_opt(j, "all_pairs", c.all_pairs);
  read_opt(j, "noise", c.noise);
  read_opt(j, "noise_seed", c.noise_seed);
}

Json to_json(const TrainConfig& c) {
  return {{"model", to_json(c.model)},
          {"adam", to_json(c.adam)},
          {"context", to_json(c.context)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"min_edits", c.min_edits},
          {"max_edits", c.max_edits},
          {"fixed_corruptions", c.fixed_corruptions},
          {"spec_failing", c.spec_failing},
          {"seed", c.seed}};
}

void from_json(const Json& j, TrainConfig& c) {
  if (j.contains("model")) from_json(j.at("model"), c.model);
  if (j.contains("adam")) from_json(j.at("adam"), c.adam);
  if (j.contains("context")) from_json(j.at("context"), c.context);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "min_edits", c.min_edits);
  read_opt(j, "max_edits", c.max_edits);
  read_opt(j, "fixed_corruptions", c.fixed_corruptions);
  read_opt(j, "spec_failing", c.spec_failing);
  read_opt(j, "seed", c.seed);
}

Json to_json(const RepairConfig& c) {
  return {{"max_rounds", c.max_rounds},
          {"tau", c.tau},
          {"edits_per_round", c.edits_per_round},
          {"beam_k", c.beam_k},
          {"max_steps", c.limits.max_steps}};
}

void from_json(const Json& j, RepairConfig& c) {
  read_opt(j, "max_rounds", c.max_rounds);
  read_opt(j, "tau", c.tau);
  read_opt(j, "edits_per_round", c.edits_per_round);
  read_opt(j, "beam_k", c.beam_k);
  read_opt(j, "max_steps", c.limits.max_steps);
}

Json to_json(const BenchmarkConfig& c) {
  return {{"num_samples", c.num_samples},
          {"min_edits", c.min_edits},
          {"max_edits", c.max_edits},
          {"seed", c.seed}};
}

void from_json(const Json& j, BenchmarkConfig& c) {
  read_opt(j, "num_samples", c.num_samples);
  read_opt(j, "min_edits", c.min_edits);
  read_opt(j, "max_edits", c.max_edits);
  read_opt(j, "seed", c.seed);
}

Json to_json(const EvalConfig& c) {
  return {{"repair", to_json(c.repair)}, {"context", to_json(c.context)}, {"ks", c.ks}};
}

void from_json(const Json& j, EvalConfig& c) {
  if (j.contains("repair")) from_json(j.at("repair"), c.repair);
  if (j.contains("context")) from_json(j.at("context"), c.context);
  read_opt(j, "ks", c.ks);
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const DatasetStats& s) {
  Json hist = Json::object();
  for (int b = 0; b < kNumBuckets; ++b) hist[bucket_label(b + kMinBucket)] = s.buckets[b];
  return {{"count", s.count},
          {"mean_min_steps", s.mean_min_steps},
          {"coverage_rate", s.coverage_rate},
          {"buckets", hist}};
}

namespace {

Json hits_to_json(const MetricHits& h, const std::vector<int>& ks, int count) {
  Json out = Json::object();
  for (int m = 0; m < kNumMetrics; ++m) {
    Json cells = Json::object();
    for (size_t k = 0; k < ks.size(); ++k) {
      cells["top" + std::to_string(ks[k])] = {
          {"hits", h.hits[m][k]},
          {"rate", count == 0 ? 0.0 : static_cast<double>(h.hits[m][k]) / count}};
    }
    out[metric_name(m)] = cells;
  }
  return out;
}

}  // namespace

Json to_json(const EvalReport& r) {
  Json buckets = Json::array();
  for (int b = 0; b < kNumBuckets; ++b) {
    buckets.push_back({{"bucket", bucket_label(b + kMinBucket)},
                       {"count", r.bucket_count[b]},
                       {"metrics", hits_to_json(r.buckets[b], r.ks, r.bucket_count[b])}});
  }
  return {{"count", r.count},
          {"noise", r.noise},
          {"ks", r.ks},
          {"metrics", hits_to_json(r.total, r.ks, r.count)},
          {"buckets", buckets}};
}

Json to_json(const NoiseSweep& s) {
  Json rows = Json::array();
  for (size_t f = 0; f < s.fractions.size(); ++f) {
    Json deltas = Json::object();
    for (int m = 0; m < kNumMetrics; ++m) {
      Json d = Json::object();
      for (size_t k = 0; k < s.reports[f].ks.size(); ++k) {
        d["top" + std::to_string(s.reports[f].ks[k])] = s.deltas[f][m][k];
      }
      deltas[metric_name(m)] = d;
    }
    rows.push_back({{"fraction", s.fractions[f]},
                    {"report", to_json(s.reports[f])},
                    {"delta_vs_first", deltas}});
  }
  return rows;
}

Json to_json(const Candidate& c) {
  return {{"program", unparse(c.program)},
          {"origin", origin_name(c.origin)},
          {"edit_count", c.edit_count},
          {"io_pass", c.io_pass},
          {"mean_log_prob", c.mean_log_prob}};
}

// ---------------------------------------------------------------------------
// Files

void write_dataset(const std::string& path, const std::vector<Sample>& samples,
                   const Json& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  Json h = header;
  h["format"] = kDatasetFormat;
  h["version"] = kDatasetVersion;
  h["count"] = samples.size();
  out << h.dump() << "\n";
  for (const Sample& s : samples) out << sample_to_json(s).dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  DatasetFile f;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  try {
    f.header = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": bad header: " + e.what());
  }
  if (f.header.value("format", "") != kDatasetFormat ||
      f.header.value("version", 0) != kDatasetVersion) {
    throw FormatError(path + ": not a ctxrepair dataset (version " +
                      std::to_string(kDatasetVersion) + ")");
  }
  DataConfig cfg;
  if (f.header.contains("config")) from_json(f.header.at("config"), cfg);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      f.samples.push_back(sample_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DslError& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    verify_sample(f.samples.back(), cfg);
  }
  if (f.header.contains("count") && f.header.at("count") != f.samples.size()) {
    throw FormatError(path + ": sample count does not match header");
  }
  return f;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace ctxrepair
