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

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ttst {

using Index = Eigen::Index;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A learnable weight with its gradient accumulator. Frozen params are kept
// out of the optimizer and out of gradient-check reports.
template <typename T>
struct Param {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
  bool frozen = false;

  Index size() const { return value.size(); }
};

// Owns every Param of a model. Addresses are stable for the lifetime of the
// store; names are unique.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Param<T>& create(std::string name, Index rows, Index cols);

  Param<T>* find(std::string_view name);
  const Param<T>* find(std::string_view name) const;
  Param<T>& at(std::string_view name);

  const std::vector<std::unique_ptr<Param<T>>>& params() const {
    return params_;
  }
  std::size_t size() const { return params_.size(); }

  void zero_grad();
  Index scalar_count() const;

 private:
  std::vector<std::unique_ptr<Param<T>>> params_;
  std::unordered_map<std::string, Param<T>*> index_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace ttst
