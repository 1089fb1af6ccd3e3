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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lencap {

// Dense 1-D array of doubles.
struct Tensor1 {
  std::vector<double> v;

  Tensor1() = default;
  explicit Tensor1(int n) : v(static_cast<size_t>(n), 0.0) {
    if (n < 0) throw std::invalid_argument("Tensor1: negative size");
  }

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  const double& operator[](int i) const { return v[static_cast<size_t>(i)]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

// Dense row-major 2-D array of doubles.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor2() = default;
  Tensor2(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative shape");
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  const double& at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return v.size(); }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline bool all_finite(const Tensor1& t) { return all_finite(t.v); }
inline bool all_finite(const Tensor2& t) { return all_finite(t.v); }

}  // namespace lencap
