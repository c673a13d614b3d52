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


#ifndef CTXREPAIR_OPTIMIZER_H_
#define CTXREPAIR_OPTIMIZER_H_

#include <stdexcept>
#include <vector>

#include "ctxrepair/model.h"

namespace ctxrepair {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  long step = 0;
};

class DivergenceDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AdamState adam_init(const ModelParams& params);

void adam_update(ModelParams& params, const ModelParams& grads,
                 AdamState& state, const AdamConfig& cfg);

// Forward, backward and one Adam update on `batch`. Returns the loss before
// the update. Throws DivergenceDetected on a non-finite loss or parameters.
double train_step(const std::vector<Example>& batch, ModelParams& params,
                  AdamState& state, const AdamConfig& cfg);
double train_step(const std::vector<const Example*>& batch, ModelParams& params,
                  AdamState& state, const AdamConfig& cfg);

}  // namespace ctxrepair

#endif  // CTXREPAIR_OPTIMIZER_H_
