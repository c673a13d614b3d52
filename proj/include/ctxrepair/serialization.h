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


#ifndef CTXREPAIR_SERIALIZATION_H_
#define CTXREPAIR_SERIALIZATION_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "ctxrepair/experiment.h"
#include "ctxrepair/trainer.h"
#include "json.hpp"

// JSON forms of worlds, samples, configs and reports. Config readers accept
// partial objects: absent keys keep their defaults.

namespace ctxrepair {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cell codes: '.' free, '#' wall, 'o' item, 'T' target, 'X' interacted target.
Json world_to_json(const WorldState& w);
WorldState world_from_json(const Json& j);

Json sample_to_json(const Sample& s);
Sample sample_from_json(const Json& j);

Json to_json(const WorldSpec& c);
Json to_json(const ProgramGenConfig& c);
Json to_json(const DataConfig& c);
Json to_json(const ModelConfig& c);
Json to_json(const AdamConfig& c);
Json to_json(const ContextOptions& c);
Json to_json(const TrainConfig& c);
Json to_json(const RepairConfig& c);
Json to_json(const BenchmarkConfig& c);
Json to_json(const EvalConfig& c);

void from_json(const Json& j, WorldSpec& c);
void from_json(const Json& j, ProgramGenConfig& c);
void from_json(const Json& j, DataConfig& c);
void from_json(const Json& j, ModelConfig& c);
void from_json(const Json& j, AdamConfig& c);
void from_json(const Json& j, ContextOptions& c);
void from_json(const Json& j, TrainConfig& c);
void from_json(const Json& j, RepairConfig& c);
void from_json(const Json& j, BenchmarkConfig& c);
void from_json(const Json& j, EvalConfig& c);

Json to_json(const DatasetStats& s);
Json to_json(const EvalReport& r);
Json to_json(const NoiseSweep& s);
Json to_json(const Candidate& c);

// JSON-lines dataset: a header object on line 1, then one sample per line.
inline constexpr const char* kDatasetFormat = "ctxrepair-dataset";
inline constexpr int kDatasetVersion = 1;

struct DatasetFile {
  Json header;
  std::vector<Sample> samples;
};

void write_dataset(const std::string& path, const std::vector<Sample>& samples,
                   const Json& header);
// Checks the header and re-verifies every sample against the embedded data
// config (InvalidSample on failure).
DatasetFile read_dataset(const std::string& path);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ctxrepair

#endif  // CTXREPAIR_SERIALIZATION_H_
