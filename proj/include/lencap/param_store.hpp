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

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lencap/rng.hpp"
#include "lencap/tensor.hpp"

namespace lencap {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;

  void validate() const;  // throws std::invalid_argument
};

// Named collection of trainable arrays. Every parameter carries a gradient
// slot and two Adam moment slots of the same shape. Iteration order is
// registration order, which fixes initialization, update and serialization
// order for reproducibility.
class ParamStore {
 public:
  Tensor2& add_mat(const std::string& name, int rows, int cols);
  Tensor1& add_vec(const std::string& name, int len);

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Tensor2& mat(const std::string& name);
  const Tensor2& mat(const std::string& name) const;
  Tensor2& mat_grad(const std::string& name);
  const Tensor2& mat_grad(const std::string& name) const;
  Tensor1& vec(const std::string& name);
  const Tensor1& vec(const std::string& name) const;
  Tensor1& vec_grad(const std::string& name);
  const Tensor1& vec_grad(const std::string& name) const;

  // Flat view of one entry's storage, for generic passes (init, Adam,
  // gradient checking, checkpoints).
  struct Flat {
    const std::string* name;
    int rows;  // rows of a matrix, or length of a vector
    int cols;  // 0 for vectors
    std::vector<double>* value;
    std::vector<double>* grad;
    std::vector<double>* m;
    std::vector<double>* v;
  };

  struct ConstFlat {
    const std::string* name;
    int rows;
    int cols;
    const std::vector<double>* value;
  };

  int entry_count() const { return static_cast<int>(order_.size()); }
  Flat flat(int i);
  ConstFlat flat(int i) const;
  size_t total_size() const;

  void zero_grads();
  void init_uniform(double lo, double hi, Rng& rng);
  void copy_values_from(const ParamStore& other);  // shapes must match
  bool values_finite() const;
  bool grads_finite() const;

 private:
  struct MatEntry {
    std::string name;
    Tensor2 value, grad, m, v;
  };
  struct VecEntry {
    std::string name;
    Tensor1 value, grad, m, v;
  };
  struct Ref {
    bool is_mat;
    int idx;
  };

  MatEntry& mat_entry(const std::string& name);
  const MatEntry& mat_entry(const std::string& name) const;
  VecEntry& vec_entry(const std::string& name);
  const VecEntry& vec_entry(const std::string& name) const;

  std::vector<MatEntry> mats_;
  std::vector<VecEntry> vecs_;
  std::vector<Ref> order_;
  std::unordered_map<std::string, Ref> index_;
};

// Bias-corrected Adam over every entry, in place. Gradients are zeroed
// afterwards and hyper.step_count is incremented.
void adam_step(ParamStore& store, AdamHyper& hyper);

}  // namespace lencap
