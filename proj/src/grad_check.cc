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


#include "ctxrepair/grad_check.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxrepair {

double grad_check(const std::function<double()>& loss, std::span<double> values,
                  std::span<const double> analytic, double eps) {
  if (values.size() != analytic.size()) {
    throw std::invalid_argument("grad_check: gradient size mismatch");
  }
  double worst = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = loss();
    values[i] = saved - eps;
    const double down = loss();
    values[i] = saved;
    const double fd = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

double grad_check_model(ModelParams& params, const std::vector<Example>& batch,
                        double eps) {
  ModelParams grads = zeros_like(params);
  batch_loss(params, batch, &grads);
  auto p = params.tensors();
  auto g = grads.tensors();
  double worst = 0.0;
  for (size_t t = 0; t < p.size(); ++t) {
    worst = std::max(worst, grad_check([&] { return batch_loss(params, batch); },
                                       p[t].second->data, g[t].second->data, eps));
  }
  return worst;
}

}  // namespace ctxrepair
