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
#include <functional>
#include <string>
#include <vector>

#include "ttst/numerics/graph.h"

namespace ttst {

struct GradCheckOptions {
  double step = 1e-5;
  // Entries probed per Param; larger Params are subsampled.
  Index max_entries_per_param = 64;
  std::uint64_t seed = 0;
  // Gradient norms below this are treated as zero (finite-difference noise).
  double abs_floor = 1e-7;
};

struct ParamGradError {
  std::string name;
  Index entries_checked = 0;
  // ||analytic - numeric|| / max(||analytic||, ||numeric||) over the probed
  // entries; 0 when both vanish.
  double rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double max_rel_error = 0.0;

  bool passed(double tolerance) const { return max_rel_error < tolerance; }
  const ParamGradError* find(const std::string& name) const;
};

// Builds the scalar loss on a fresh graph each call.
using LossBuilder = std::function<Var(Graph<double>&)>;

// Compares analytic gradients of `build` with central finite differences for
// every non-frozen Param in `params`.
GradCheckReport grad_check(ParamStore<double>& params, const LossBuilder& build,
                           const GradCheckOptions& options = {});

}  // namespace ttst
