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

#include "lencap/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace lencap {

void AdamHyper::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("AdamHyper: lr must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("AdamHyper: beta1 out of (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("AdamHyper: beta2 out of (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("AdamHyper: epsilon must be positive");
}

Tensor2& ParamStore::add_mat(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("ParamStore: non-positive shape for " + name);
  MatEntry e;
  e.name = name;
  e.value = Tensor2(rows, cols);
  e.grad = Tensor2(rows, cols);
  e.m = Tensor2(rows, cols);
  e.v = Tensor2(rows, cols);
  mats_.push_back(std::move(e));
  const Ref ref{true, static_cast<int>(mats_.size()) - 1};
  order_.push_back(ref);
  index_.emplace(name, ref);
  return mats_.back().value;
}

Tensor1& ParamStore::add_vec(const std::string& name, int len) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  if (len <= 0) throw std::invalid_argument("ParamStore: non-positive length for " + name);
  VecEntry e;
  e.name = name;
  e.value = Tensor1(len);
  e.grad = Tensor1(len);
  e.m = Tensor1(len);
  e.v = Tensor1(len);
  vecs_.push_back(std::move(e));
  const Ref ref{false, static_cast<int>(vecs_.size()) - 1};
  order_.push_back(ref);
  index_.emplace(name, ref);
  return vecs_.back().value;
}

ParamStore::MatEntry& ParamStore::mat_entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end() || !it->second.is_mat)
    throw std::invalid_argument("ParamStore: no matrix named " + name);
  return mats_[static_cast<size_t>(it->second.idx)];
}

const ParamStore::MatEntry& ParamStore::mat_entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end() || !it->second.is_mat)
    throw std::invalid_argument("ParamStore: no matrix named " + name);
  return mats_[static_cast<size_t>(it->second.idx)];
}

ParamStore::VecEntry& ParamStore::vec_entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end() || it->second.is_mat)
    throw std::invalid_argument("ParamStore: no vector named " + name);
  return vecs_[static_cast<size_t>(it->second.idx)];
}

const ParamStore::VecEntry& ParamStore::vec_entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end() || it->second.is_mat)
    throw std::invalid_argument("ParamStore: no vector named " + name);
  return vecs_[static_cast<size_t>(it->second.idx)];
}

Tensor2& ParamStore::mat(const std::string& name) { return mat_entry(name).value; }
const Tensor2& ParamStore::mat(const std::string& name) const { return mat_entry(name).value; }
Tensor2& ParamStore::mat_grad(const std::string& name) { return mat_entry(name).grad; }
const Tensor2& ParamStore::mat_grad(const std::string& name) const { return mat_entry(name).grad; }
Tensor1& ParamStore::vec(const std::string& name) { return vec_entry(name).value; }
const Tensor1& ParamStore::vec(const std::string& name) const { return vec_entry(name).value; }
Tensor1& ParamStore::vec_grad(const std::string& name) { return vec_entry(name).grad; }
const Tensor1& ParamStore::vec_grad(const std::string& name) const { return vec_entry(name).grad; }

ParamStore::Flat ParamStore::flat(int i) {
  const Ref ref = order_[static_cast<size_t>(i)];
  if (ref.is_mat) {
    MatEntry& e = mats_[static_cast<size_t>(ref.idx)];
    return Flat{&e.name, e.value.rows, e.value.cols, &e.value.v, &e.grad.v, &e.m.v, &e.v.v};
  }
  VecEntry& e = vecs_[static_cast<size_t>(ref.idx)];
  return Flat{&e.name, e.value.size(), 0, &e.value.v, &e.grad.v, &e.m.v, &e.v.v};
}

ParamStore::ConstFlat ParamStore::flat(int i) const {
  const Ref ref = order_[static_cast<size_t>(i)];
  if (ref.is_mat) {
    const MatEntry& e = mats_[static_cast<size_t>(ref.idx)];
    return ConstFlat{&e.name, e.value.rows, e.value.cols, &e.value.v};
  }
  const VecEntry& e = vecs_[static_cast<size_t>(ref.idx)];
  return ConstFlat{&e.name, e.value.size(), 0, &e.value.v};
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const auto& e : mats_) n += e.value.size();
  for (const auto& e : vecs_) n += e.value.v.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& e : mats_) e.grad.fill(0.0);
  for (auto& e : vecs_) e.grad.fill(0.0);
}

void ParamStore::init_uniform(double lo, double hi, Rng& rng) {
  for (int i = 0; i < entry_count(); ++i) {
    Flat f = flat(i);
    for (double& x : *f.value) x = rng.uniform(lo, hi);
    std::fill(f.grad->begin(), f.grad->end(), 0.0);
    std::fill(f.m->begin(), f.m->end(), 0.0);
    std::fill(f.v->begin(), f.v->end(), 0.0);
  }
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.mats_.size() != mats_.size() || other.vecs_.size() != vecs_.size())
    throw std::invalid_argument("ParamStore: copy between mismatched stores");
  for (size_t i = 0; i < mats_.size(); ++i) {
    if (other.mats_[i].name != mats_[i].name || other.mats_[i].value.size() != mats_[i].value.size())
      throw std::invalid_argument("ParamStore: copy between mismatched stores");
    mats_[i].value.v = other.mats_[i].value.v;
  }
  for (size_t i = 0; i < vecs_.size(); ++i) {
    if (other.vecs_[i].name != vecs_[i].name || other.vecs_[i].value.size() != vecs_[i].value.size())
      throw std::invalid_argument("ParamStore: copy between mismatched stores");
    vecs_[i].value.v = other.vecs_[i].value.v;
  }
}

bool ParamStore::values_finite() const {
  for (const auto& e : mats_)
    if (!all_finite(e.value)) return false;
  for (const auto& e : vecs_)
    if (!all_finite(e.value)) return false;
  return true;
}

bool ParamStore::grads_finite() const {
  for (const auto& e : mats_)
    if (!all_finite(e.grad)) return false;
  for (const auto& e : vecs_)
    if (!all_finite(e.grad)) return false;
  return true;
}

void adam_step(ParamStore& store, AdamHyper& hyper) {
  hyper.validate();
  hyper.step_count += 1;
  const double t = static_cast<double>(hyper.step_count);
  const double corr1 = 1.0 - std::pow(hyper.beta1, t);
  const double corr2 = 1.0 - std::pow(hyper.beta2, t);
  for (int i = 0; i < store.entry_count(); ++i) {
    ParamStore::Flat f = store.flat(i);
    std::vector<double>& value = *f.value;
    std::vector<double>& grad = *f.grad;
    std::vector<double>& m = *f.m;
    std::vector<double>& v = *f.v;
    for (size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = hyper.beta1 * m[k] + (1.0 - hyper.beta1) * g;
      v[k] = hyper.beta2 * v[k] + (1.0 - hyper.beta2) * g * g;
      const double m_hat = m[k] / corr1;
      const double v_hat = v[k] / corr2;
      value[k] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
      grad[k] = 0.0;
    }
  }
}

}  // namespace lencap
