/* Copyright 2026 The lencap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <functional>

#include "lencap/param_store.hpp"

namespace lencap {

// Central-difference check of the analytic gradients already accumulated in
// the store's grad slots against the pure loss closure. Probes at least
// min_coords coordinates overall, covering every named parameter (the
// largest-gradient coordinates of each), and returns the max relative error
// with denominator max(|analytic|, |numeric|, 1e-8). Throws
// std::invalid_argument when eps <= 0.
double grad_check(const std::function<double()>& loss_fn, ParamStore& store, double eps,
                  int min_coords = 256);

}  // namespace lencap
