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

#include <cstdint>
#include <vector>

#include "ttst/numerics/tensor.h"

namespace ttst {

// Linear warmup to max_lr, cosine decay to min_lr at total_steps, then flat.
struct LrSchedule {
  std::int64_t warmup_steps = 2000;
  double max_lr = 1e-3;
  std::int64_t total_steps = 100000;
  double min_lr = 0.0;

  void validate() const;
};

double lr_at(const LrSchedule& schedule, std::int64_t step);

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled-weight-decay Adam. Moments are kept per Param, in the Param's
// order inside the store.
template <typename T>
class AdamW {
 public:
  AdamW(ParamStore<T>& params, AdamWOptions options);

  // Applies one update with learning rate `lr` and zeroes all gradients.
  // Throws NumericalError naming the first Param with a non-finite gradient;
  // in that case nothing is updated.
  void step(double lr);

  std::int64_t step_count() const { return step_; }
  const AdamWOptions& options() const { return options_; }

  // Moment access for checkpointing.
  std::vector<Mat<T>>& first_moments() { return m_; }
  std::vector<Mat<T>>& second_moments() { return v_; }
  const std::vector<Mat<T>>& first_moments() const { return m_; }
  const std::vector<Mat<T>>& second_moments() const { return v_; }
  void set_step_count(std::int64_t s) { step_ = s; }

 private:
  ParamStore<T>& params_;
  AdamWOptions options_;
  std::vector<Mat<T>> m_;
  std::vector<Mat<T>> v_;
  std::int64_t step_ = 0;
};

// Scales all gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
template <typename T>
double clip_grad_norm(ParamStore<T>& params, double max_norm);

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace ttst
