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


#ifndef CTXREPAIR_GRAD_CHECK_H_
#define CTXREPAIR_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "ctxrepair/model.h"

namespace ctxrepair {

// Central finite differences over every coordinate of `values`, which `loss`
// must read. `analytic` is the gradient to check, same length as `values`.
// Returns max_i |g_analytic - g_fd| / max(1, |g_fd|). Coordinates are
// restored after probing.
double grad_check(const std::function<double()>& loss, std::span<double> values,
                  std::span<const double> analytic, double eps = 1e-5);

// Checks batch_loss's backward pass over every model parameter.
double grad_check_model(ModelParams& params, const std::vector<Example>& batch,
                        double eps = 1e-5);

}  // namespace ctxrepair

#endif  // CTXREPAIR_GRAD_CHECK_H_
