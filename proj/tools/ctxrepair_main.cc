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

// ctxrepair: dataset generation, training, evaluation and repair.
//
//   ctxrepair gen-data --out data/ [--config run.json] [--seed N] [--num-samples N]
//   ctxrepair train --data data/train.jsonl --out model.json [--mode OS|O|S]
//   ctxrepair eval --checkpoint model.json --data data/test.jsonl [--noise-sweep]
//   ctxrepair repair --checkpoint model.json --spec task.json --program "DEF run m( ... m)"
//   ctxrepair inspect --data data/test.jsonl --index 0

#include <cstdio>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ctxrepair/serialization.h"

namespace {

using namespace ctxrepair;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

// Raised for bad flag combinations that CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The declarative run file. Every section is optional.
struct RunConfig {
  uint64_t seed = 1;
  DataConfig data;
  TrainConfig train;
  BenchmarkConfig benchmark;
  EvalConfig eval;
};

Json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"data", ctxrepair::to_json(c.data)},
          {"train", ctxrepair::to_json(c.train)},
          {"benchmark", ctxrepair::to_json(c.benchmark)},
          {"eval", ctxrepair::to_json(c.eval)}};
}

RunConfig load_run_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  Json j = read_json_file(path);
  if (j.contains("seed")) c.seed = j.at("seed");
  if (j.contains("data")) from_json(j.at("data"), c.data);
  if (j.contains("train")) from_json(j.at("train"), c.train);
  if (j.contains("benchmark")) from_json(j.at("benchmark"), c.benchmark);
  if (j.contains("eval")) from_json(j.at("eval"), c.eval);
  return c;
}

std::vector<int> parse_topk(const std::string& s) {
  std::vector<int> ks;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      int k = std::stoi(item, &used);
      if (used != item.size() || k < 1) throw std::invalid_argument(item);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw UsageError("--topk expects positive integers like 1,5,20");
    }
  }
  if (ks.empty() || !std::is_sorted(ks.begin(), ks.end())) {
    throw UsageError("--topk expects an increasing list like 1,5,20");
  }
  return ks;
}

// Points at the offending token of `src`.
std::string annotate(const std::string& src, const DslError& e) {
  // Rebuild offsets by scanning whitespace-separated words; good enough for
  // canonical and hand-written sources alike.
  std::ostringstream out;
  out << "error: " << e.what() << "\n";
  std::vector<std::pair<size_t, size_t>> spans;
  size_t i = 0;
  while (i < src.size()) {
    while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
    if (i >= src.size()) break;
    size_t start = i;
    if (src[i] == '(' || src[i] == ')') {
      ++i;
    } else {
      while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i])) &&
             src[i] != '(' && src[i] != ')') {
        ++i;
      }
      // Bracket tokens such as "m(" and "w)" carry their paren.
      if (i < src.size() && (src[i] == '(' || src[i] == ')') && i - start == 1 &&
          std::string("miewr").find(src[start]) != std::string::npos) {
        ++i;
      }
    }
    spans.emplace_back(start, i - start);
  }
  const size_t pos = static_cast<size_t>(e.position());
  size_t col = pos < spans.size() ? spans[pos].first : src.size();
  size_t len = pos < spans.size() ? spans[pos].second : 1;
  out << "  " << src << "\n  " << std::string(col, ' ') << std::string(len, '^')
      << "  (token " << e.position() << ")\n";
  return out.str();
}

void print_ranked(const std::vector<Candidate>& ranked, int k_pairs) {
  for (size_t i = 0; i < ranked.size(); ++i) {
    const Candidate& c = ranked[i];
    std::printf("%2zu  pass %d/%d  logp %+.3f  %s\n", i + 1, c.io_pass, k_pairs,
                c.mean_log_prob, unparse(c.program).c_str());
  }
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const RunConfig& run, const std::string& out_dir) {
  DataConfig cfg = run.data;
  cfg.seed = run.seed;
  validate(cfg);
  std::filesystem::create_directories(out_dir);
  std::vector<Sample> all = generate_dataset(cfg);
  DatasetStats stats = dataset_stats(all);
  Splits splits = split_dataset(std::move(all), cfg);
  Json header = {{"config", ctxrepair::to_json(cfg)}};
  const std::pair<const char*, const std::vector<Sample>*> parts[] = {
      {"train", &splits.train}, {"valid", &splits.valid}, {"test", &splits.test}};
  for (const auto& [name, samples] : parts) {
    header["split"] = name;
    write_dataset(out_dir + "/" + name + ".jsonl", *samples, header);
  }
  Json st = ctxrepair::to_json(stats);
  st["splits"] = {{"train", splits.train.size()},
                  {"valid", splits.valid.size()},
                  {"test", splits.test.size()}};
  st["config"] = to_json(run);
  write_text_file(out_dir + "/stats.json", st.dump(2) + "\n");
  std::printf("wrote %d samples (%zu/%zu/%zu) to %s, mean min_steps %.3f\n",
              stats.count, splits.train.size(), splits.valid.size(),
              splits.test.size(), out_dir.c_str(), stats.mean_min_steps);
  return kExitOk;
}

int cmd_train(const RunConfig& run, const std::string& data_path,
              const std::string& out_path, std::string loss_csv, int overfit) {
  TrainConfig cfg = run.train;
  cfg.seed = run.seed;
  std::vector<Sample> samples = read_dataset(data_path).samples;
  if (overfit > 0) {
    if (static_cast<int>(samples.size()) > overfit) samples.resize(overfit);
    cfg.fixed_corruptions = true;
    cfg.min_edits = cfg.max_edits = 1;
    cfg.spec_failing = true;
  }
  if (loss_csv.empty()) loss_csv = out_path + ".loss.csv";
  std::ostringstream csv;
  csv << "epoch,loss\n";
  instrumentation().reset();
  TrainResult r = train(samples, cfg, [&](int epoch, double loss) {
    csv << epoch + 1 << "," << loss << "\n";
    std::fprintf(stderr, "epoch %d  loss %.5f\n", epoch + 1, loss);
  });
  write_text_file(loss_csv, csv.str());
  Json extra = {{"run", to_json(run)},
                {"train", ctxrepair::to_json(cfg)},
                {"initial_loss", r.initial_loss},
                {"final_loss", r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back()},
                {"samples", samples.size()},
                {"edge_reads", instrumentation().edge_reads.load()},
                {"observation_reads", instrumentation().observation_reads.load()}};
  save_checkpoint(r.params, out_path, extra.dump());
  std::printf("mode %s  initial loss %.5f  final loss %.5f  edge reads %ld  observation reads %ld\n",
              mode_name(cfg.model.mode).c_str(), r.initial_loss,
              r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back(),
              instrumentation().edge_reads.load(),
              instrumentation().observation_reads.load());
  return kExitOk;
}

// Context options the checkpoint was trained with.
ContextOptions checkpoint_context(const std::string& path) {
  Json j = read_json_file(path);
  ContextOptions opts;
  if (j.contains("extra") && j["extra"].contains("train")) {
    from_json(j["extra"]["train"].value("context", Json::object()), opts);
  }
  opts.noise = 0.0;
  return opts;
}

int cmd_eval(const RunConfig& run, const std::string& ckpt,
             const std::string& data_path, const std::string& out_path,
             bool sweep, double noise, const std::vector<int>& ks) {
  ModelParams params = load_checkpoint(ckpt);
  std::vector<Sample> samples = read_dataset(data_path).samples;
  BenchmarkConfig bench = run.benchmark;
  EvalConfig cfg = run.eval;
  cfg.context = checkpoint_context(ckpt);
  cfg.context.noise = noise;
  cfg.context.noise_seed = run.seed;
  if (!ks.empty()) cfg.ks = ks;
  std::vector<Candidate> cands = make_benchmark(samples, bench);
  EvalOutcome res = evaluate(params, samples, cands, cfg);
  Json report = {{"config", to_json(run)},
                 {"checkpoint", ckpt},
                 {"mode", mode_name(params.config.mode)},
                 {"data", data_path},
                 {"repaired", ctxrepair::to_json(res.repaired)},
                 {"unrepaired", ctxrepair::to_json(res.unrepaired)}};
  if (sweep) {
    NoiseSweep s = noise_sweep(params, samples, cands, cfg, {0.0, 0.05, 0.10, 0.15, 0.20},
                               run.seed);
    report["noise_sweep"] = ctxrepair::to_json(s);
  }
  std::printf("%-15s %-6s %9s %11s\n", "metric", "k", "repaired", "unrepaired");
  for (int m = 0; m < kNumMetrics; ++m) {
    for (size_t k = 0; k < cfg.ks.size(); ++k) {
      std::printf("%-15s top%-3d %9.3f %11.3f\n", metric_name(m).c_str(), cfg.ks[k],
                  res.repaired.rate(m, k), res.unrepaired.rate(m, k));
    }
  }
  if (!out_path.empty()) {
    write_text_file(out_path, report.dump(2) + "\n");
    // Per-bucket curve as CSV next to the report.
    std::ostringstream csv;
    csv << "bucket,count";
    for (int m = 0; m < kNumMetrics; ++m) {
      for (int k : cfg.ks) csv << "," << metric_name(m) << "_top" << k;
    }
    csv << "\n";
    for (int b = 0; b < kNumBuckets; ++b) {
      csv << bucket_label(b + kMinBucket) << "," << res.repaired.bucket_count[b];
      for (int m = 0; m < kNumMetrics; ++m) {
        for (size_t k = 0; k < cfg.ks.size(); ++k) {
          csv << "," << res.repaired.bucket_rate(b, m, k);
        }
      }
      csv << "\n";
    }
    write_text_file(out_path + ".buckets.csv", csv.str());
  }
  return kExitOk;
}

// A task file is either a dataset sample object or {"spec_io": [...]}.
std::vector<IOPair> load_spec(const std::string& path) {
  Json j;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string first;
  std::getline(in, first);
  try {
    j = Json::parse(first);
    if (j.contains("format")) {  // dataset file: take the first sample
      std::string line;
      std::getline(in, line);
      j = Json::parse(line);
    }
  } catch (const Json::parse_error&) {
    j = read_json_file(path);
  }
  std::vector<IOPair> spec;
  for (const Json& io : j.at("spec_io")) {
    spec.push_back({world_from_json(io.at("input_world")),
                    world_from_json(io.at("output_world"))});
  }
  if (spec.empty()) throw FormatError(path + ": empty spec_io");
  return spec;
}

int cmd_repair(const RunConfig& run, const std::string& ckpt,
               const std::string& spec_path, const std::string& src,
               bool as_json) {
  std::vector<IOPair> spec = load_spec(spec_path);
  ModelParams params = load_checkpoint(ckpt);
  NeuralScorer scorer(params, checkpoint_context(ckpt));
  RepairConfig cfg = run.eval.repair;
  RepairResult r;
  if (src.empty()) {
    r = trail_eval_repair(spec, scorer, cfg);
  } else {
    Candidate c;
    try {
      c.program = parse_source(src);
    } catch (const DslError& e) {
      std::fputs(annotate(src, e).c_str(), stderr);
      return kExitData;
    }
    r = repair(c, spec, scorer, cfg);
  }
  if (as_json) {
    Json out = {{"rounds", r.rounds}, {"no_edit_applied", r.no_edit_applied},
                {"k", spec.size()}, {"ranked", Json::array()}};
    for (const Candidate& c : r.ranked) out["ranked"].push_back(ctxrepair::to_json(c));
    std::printf("%s\n", out.dump(2).c_str());
  } else {
    std::printf("rounds %d%s\n", r.rounds, r.no_edit_applied ? "  (no edit applied)" : "");
    print_ranked(r.ranked, static_cast<int>(spec.size()));
  }
  return kExitOk;
}

int cmd_inspect(const std::string& data_path, int index) {
  DatasetFile f = read_dataset(data_path);
  if (index < 0 || index >= static_cast<int>(f.samples.size())) {
    throw UsageError("--index out of range (dataset has " +
                     std::to_string(f.samples.size()) + " samples)");
  }
  const Sample& s = f.samples[index];
  std::printf("seed %llu  complexity %s  min_steps %d\n",
              static_cast<unsigned long long>(s.seed),
              bucket_label(s.complexity()).c_str(), s.min_steps);
  std::printf("program: %s\n\nsegments:\n", unparse(s.gold).c_str());
  const std::vector<Token> tokens = token_sequence(s.gold);
  for (const Segment& seg : extract_segments(s.gold)) {
    std::string text = join_tokens(std::vector<Token>(
        tokens.begin() + seg.token_begin, tokens.begin() + seg.token_end));
    std::printf("  [%d] parent %2d  %s\n", seg.id, seg.parent, text.c_str());
  }
  ProgramGraph g = build_graph(s.gold);
  std::printf("\ngraph: %d nodes\n", g.size());
  for (int i = 0; i < g.size(); ++i) {
    std::printf("  %2d %-14s seg %d  nbrs", i,
                std::string(g.nodes[i].token.lexeme).c_str(), g.nodes[i].segment_id);
    for (int j : g.neighbors[i]) std::printf(" %d", j);
    std::printf("\n");
  }
  for (const auto& [a, b] : g.cond_edges) std::printf("  cond %d -> %d\n", a, b);
  for (const auto& [a, b] : g.succ_edges) std::printf("  succ %d -> %d\n", a, b);
  auto show = [](const char* label, const IOPair& io) {
    std::printf("\n%s input:\n%s%s output:\n%s", label, render_ascii(io.input).c_str(),
                label, render_ascii(io.output).c_str());
  };
  for (size_t k = 0; k < s.spec_io.size(); ++k) {
    show(("spec " + std::to_string(k)).c_str(), s.spec_io[k]);
  }
  show("test", s.test_io);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-guided program repair for a grid-world robot language"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
  double noise = 0.0;
  std::string topk;
  app.add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option_function<uint64_t>("--seed", [&](const uint64_t& v) {
    seed = v;
    seed_set = true;
  }, "Global seed");
  app.add_option("--mode", mode, "Model mode: OS, O or S")
      ->check(CLI::IsMember({"OS", "O", "S"}));
  app.add_option("--noise", noise, "Observation noise fraction for eval")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--topk", topk, "Comma-separated Top-K levels, e.g. 1,5,20");

  std::string out, data, ckpt, spec, program, loss_csv;
  int num_samples = 0, overfit = 0, epochs = -1, index = 0;
  bool sweep = false, as_json = false;

  auto* gen = app.add_subcommand("gen-data", "Generate train/valid/test JSONL files");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--num-samples", num_samples, "Override the sample count")
      ->check(CLI::PositiveNumber);

  auto* tr = app.add_subcommand("train", "Train the repairer on corruption pairs");
  tr->add_option("--data", data, "Training JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Checkpoint path")->required();
  tr->add_option("--loss-csv", loss_csv, "Per-epoch loss CSV (default <out>.loss.csv)");
  tr->add_option("--epochs", epochs, "Override the epoch count")->check(CLI::NonNegativeNumber);
  tr->add_option("--overfit", overfit,
                 "Train on the first N samples with one fixed corruption each")
      ->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "Top-K evaluation on a corruption benchmark");
  ev->add_option("--checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data, "Evaluation JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", out, "Report JSON path");
  ev->add_flag("--noise-sweep", sweep, "Also run the 0..20% noise sweep");

  auto* rep = app.add_subcommand("repair", "Repair one program against a spec");
  rep->add_option("--checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  rep->add_option("--spec", spec, "Sample JSON or dataset file with spec_io")
      ->required()
      ->check(CLI::ExistingFile);
  rep->add_option("--program", program,
                  "Candidate source; omitted = synthesize candidates");
  rep->add_flag("--json", as_json, "Print the ranking as JSON");

  auto* ins = app.add_subcommand("inspect", "Pretty-print a dataset sample");
  ins->add_option("--data", data)->required()->check(CLI::ExistingFile);
  ins->add_option("--index", index, "Sample index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig run = load_run_config(config_path);
    if (seed_set) run.seed = seed;
    if (!mode.empty()) run.train.model.mode = parse_mode(mode);
    if (num_samples > 0) run.data.num_samples = num_samples;
    if (epochs >= 0) run.train.epochs = epochs;
    std::vector<int> ks = topk.empty() ? std::vector<int>{} : parse_topk(topk);

    if (*gen) return cmd_gen_data(run, out);
    if (*tr) return cmd_train(run, data, out, loss_csv, overfit);
    if (*ev) return cmd_eval(run, ckpt, data, out, sweep, noise, ks);
    if (*rep) return cmd_repair(run, ckpt, spec, program, as_json);
    if (*ins) return cmd_inspect(data, index);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const DivergenceDetected& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
