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

#include "ttst/numerics/optim.h"

#include <cmath>
#include <numbers>
#include <string>

#include "ttst/common/errors.h"

namespace ttst {

void LrSchedule::validate() const {
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw ConfigError("lr schedule: need 0 <= warmup_steps <= total_steps");
  }
  if (min_lr > max_lr) throw ConfigError("lr schedule: min_lr > max_lr");
}

double lr_at(const LrSchedule& s, std::int64_t step) {
  if (step <= 0) return s.warmup_steps == 0 ? s.max_lr : 0.0;
  if (step < s.warmup_steps) {
    return s.max_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  if (step >= s.total_steps) return s.min_lr;
  const double span = static_cast<double>(s.total_steps - s.warmup_steps);
  const double progress = static_cast<double>(step - s.warmup_steps) / span;
  return s.min_lr +
         0.5 * (s.max_lr - s.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
AdamW<T>::AdamW(ParamStore<T>& params, AdamWOptions options)
    : params_(params), options_(options) {
  for (const auto& p : params_.params()) {
    m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
  }
}

template <typename T>
void AdamW<T>::step(double lr) {
  const auto& ps = params_.params();
  for (const auto& p : ps) {
    if (!p->frozen && !p->grad.allFinite()) {
      throw NumericalError("non-finite gradient in parameter " + p->name);
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const T bc1 = static_cast<T>(1.0 - std::pow(b1, static_cast<double>(step_)));
  const T bc2 = static_cast<T>(1.0 - std::pow(b2, static_cast<double>(step_)));
  const T lr_t = static_cast<T>(lr);
  const T decay = static_cast<T>(1.0 - lr * options_.weight_decay);
  const T eps = static_cast<T>(options_.eps);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Param<T>& p = *ps[i];
    if (p.frozen) {
      p.grad.setZero();
      continue;
    }
    m_[i] = static_cast<T>(b1) * m_[i] + static_cast<T>(1.0 - b1) * p.grad;
    v_[i] = static_cast<T>(b2) * v_[i] +
            static_cast<T>(1.0 - b2) * p.grad.cwiseProduct(p.grad);
    p.value *= decay;
    p.value.array() -= lr_t * (m_[i].array() / bc1) /
                       ((v_[i].array() / bc2).sqrt() + eps);
    p.grad.setZero();
  }
}

template <typename T>
double clip_grad_norm(ParamStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params.params()) {
    if (!p->frozen) sq += static_cast<double>(p->grad.squaredNorm());
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const T s = static_cast<T>(max_norm / norm);
    for (const auto& p : params.params()) p->grad *= s;
  }
  return norm;
}

template class AdamW<float>;
template class AdamW<double>;
template double clip_grad_norm<float>(ParamStore<float>&, double);
template double clip_grad_norm<double>(ParamStore<double>&, double);

}  // namespace ttst
