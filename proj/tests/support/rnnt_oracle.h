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

#include <string>
#include <vector>

#include "ttst/numerics/rng.h"
#include "ttst/rnnt/rnnt.h"

namespace ttst::testing {

// Random raw logits for an N x (T + 1) grid over V codes plus blank.
Mat<double> random_logits(Rng& rng, int positions, int frames, int vocab, double scale = 2.0);
std::vector<int> random_target(Rng& rng, int frames, int vocab);

// Walks every interleaving of N blanks and T emissions (ending in a blank)
// directly on the grid, independently of the library's DP and enumerator.
struct BruteForce {
  double log_z = 0.0;
  double best_log_prob = 0.0;
  std::string best_path;  // lexicographically smallest among exact maxima
  long paths = 0;
};
BruteForce brute_force(const JointLogProbGrid& grid, const std::vector<int>& target);

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) of
// the transducer gradient w.r.t. raw logits, by central differences.
double rnnt_grad_rel_error(const Mat<double>& logits, int positions, int frames,
                           const std::vector<int>& target, double h = 1e-5);

// Logits whose softmax puts ~all mass on `path` (+/-20 on the taken symbol).
Mat<double> one_path_logits(Rng& rng, const std::string& path, const std::vector<int>& target,
                            int vocab);

}  // namespace ttst::testing
