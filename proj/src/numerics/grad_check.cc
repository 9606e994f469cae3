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

#include "ttst/numerics/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttst/numerics/rng.h"

namespace ttst {

const ParamGradError* GradCheckReport::find(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

double evaluate(const LossBuilder& build) {
  Graph<double> g(false);
  return g.value(build(g))(0, 0);
}

}  // namespace

GradCheckReport grad_check(ParamStore<double>& params, const LossBuilder& build,
                           const GradCheckOptions& options) {
  params.zero_grad();
  {
    Graph<double> g(true);
    Var loss = build(g);
    g.backward(loss);
  }
  Rng rng(options.seed);
  GradCheckReport report;
  for (const auto& p : params.params()) {
    if (p->frozen) continue;
    const Index n = p->size();
    std::vector<Index> entries(static_cast<std::size_t>(n));
    std::iota(entries.begin(), entries.end(), Index{0});
    if (n > options.max_entries_per_param) {
      // Partial Fisher-Yates for a deterministic subsample.
      for (Index i = 0; i < options.max_entries_per_param; ++i) {
        const Index j = i + rng.below(n - i);
        std::swap(entries[static_cast<std::size_t>(i)], entries[static_cast<std::size_t>(j)]);
      }
      entries.resize(static_cast<std::size_t>(options.max_entries_per_param));
    }
    double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0, max_abs = 0.0;
    for (Index e : entries) {
      double& x = p->value.data()[e];
      const double saved = x;
      x = saved + options.step;
      const double up = evaluate(build);
      x = saved - options.step;
      const double down = evaluate(build);
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = p->grad.data()[e];
      diff_sq += (analytic - numeric) * (analytic - numeric);
      a_sq += analytic * analytic;
      n_sq += numeric * numeric;
      max_abs = std::max(max_abs, std::abs(analytic - numeric));
    }
    ParamGradError err;
    err.name = p->name;
    err.entries_checked = static_cast<Index>(entries.size());
    const double denom = std::sqrt(std::max(a_sq, n_sq));
    err.rel_error = std::sqrt(diff_sq) / std::max(denom, options.abs_floor);
    err.max_abs_error = max_abs;
    report.max_rel_error = std::max(report.max_rel_error, err.rel_error);
    report.params.push_back(std::move(err));
  }
  params.zero_grad();
  return report;
}

}  // namespace ttst
