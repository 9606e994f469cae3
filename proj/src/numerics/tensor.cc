// Copyright 2026 The ttst Authors
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

#include "ttst/numerics/tensor.h"

#include "ttst/common/errors.h"

namespace ttst {

template <typename T>
Param<T>& ParamStore<T>::create(std::string name, Index rows, Index cols) {
  if (index_.count(name)) {
    throw ConfigError("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Param<T>>();
  p->name = std::move(name);
  p->value = Mat<T>::Zero(rows, cols);
  p->grad = Mat<T>::Zero(rows, cols);
  Param<T>* raw = p.get();
  index_.emplace(raw->name, raw);
  params_.push_back(std::move(p));
  return *raw;
}

template <typename T>
Param<T>* ParamStore<T>::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

template <typename T>
const Param<T>* ParamStore<T>::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

template <typename T>
Param<T>& ParamStore<T>::at(std::string_view name) {
  Param<T>* p = find(name);
  if (p == nullptr) throw IndexError("no parameter named " + std::string(name));
  return *p;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

template <typename T>
Index ParamStore<T>::scalar_count() const {
  Index n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace ttst
