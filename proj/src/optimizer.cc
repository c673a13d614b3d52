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


#include "ctxrepair/optimizer.h"

#include <cmath>

namespace ctxrepair {

AdamState adam_init(const ModelParams& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

void adam_update(ModelParams& params, const ModelParams& grads,
                 AdamState& state, const AdamConfig& cfg) {
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (size_t t = 0; t < p.size(); ++t) {
    double* pd = p[t].second->data.data();
    const double* gd = g[t].second->data.data();
    double* md = m[t].second->data.data();
    double* vd = v[t].second->data.data();
    const int n = p[t].second->numel();
    for (int i = 0; i < n; ++i) {
      md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * gd[i];
      vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * gd[i] * gd[i];
      pd[i] -= cfg.lr * (md[i] / c1) / (std::sqrt(vd[i] / c2) + cfg.eps);
    }
  }
}

double train_step(const std::vector<Example>& batch, ModelParams& params,
                  AdamState& state, const AdamConfig& cfg) {
  std::vector<const Example*> ptrs;
  for (const Example& ex : batch) ptrs.push_back(&ex);
  return train_step(ptrs, params, state, cfg);
}

double train_step(const std::vector<const Example*>& batch, ModelParams& params,
                  AdamState& state, const AdamConfig& cfg) {
  ModelParams grads = zeros_like(params);
  const double loss = batch_loss(params, batch, &grads);
  if (!std::isfinite(loss) || !grads.all_finite()) {
    throw DivergenceDetected("non-finite loss or gradient at step " +
                             std::to_string(state.step + 1));
  }
  adam_update(params, grads, state, cfg);
  if (!params.all_finite()) {
    throw DivergenceDetected("non-finite parameters after step " +
                             std::to_string(state.step));
  }
  return loss;
}

}  // namespace ctxrepair
