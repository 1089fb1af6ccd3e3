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

#include "lencap/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lencap {

double grad_check(const std::function<double()>& loss_fn, ParamStore& store, double eps,
                  int min_coords) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  const int entries = store.entry_count();
  if (entries == 0) return 0.0;

  // Per parameter, probe the coordinates with the largest analytic gradient
  // magnitude. Central differences on a double-precision loss cannot resolve
  // coordinates whose gradient sits below the roundoff of the loss itself,
  // so those carry no information about backward-pass correctness.
  const int per_entry = (min_coords + entries - 1) / entries;
  double max_rel_err = 0.0;

  for (int e = 0; e < entries; ++e) {
    ParamStore::Flat f = store.flat(e);
    std::vector<double>& value = *f.value;
    const std::vector<double>& grad = *f.grad;
    const int n = static_cast<int>(value.size());

    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    const int probes = std::min(per_entry, n);
    std::partial_sort(idx.begin(), idx.begin() + probes, idx.end(), [&](int a, int b) {
      const double ga = std::fabs(grad[static_cast<size_t>(a)]);
      const double gb = std::fabs(grad[static_cast<size_t>(b)]);
      if (ga != gb) return ga > gb;
      return a < b;
    });

    for (int s = 0; s < probes; ++s) {
      const size_t k = static_cast<size_t>(idx[static_cast<size_t>(s)]);
      const double saved = value[k];
      value[k] = saved + eps;
      const double f_plus = loss_fn();
      value[k] = saved - eps;
      const double f_minus = loss_fn();
      value[k] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double analytic = grad[k];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      max_rel_err = std::max(max_rel_err, std::fabs(analytic - numeric) / denom);
    }
  }
  return max_rel_err;
}

}  // namespace lencap
