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
#include <string>
#include <vector>

#include "ttst/codec/corpus.h"
#include "ttst/runtime/decode.h"

namespace ttst {

struct EvalOptions {
  DecodeConfig decode;  // decode.seed is the run seed
  bool oracle = false;  // pass ground-truth codes through instead of decoding
};

struct UtteranceEval {
  std::string id;
  std::string speaker;
  int positions = 0;
  int ref_frames = 0;
  int pred_frames = 0;
  int first_errors = 0;  // positional mismatches in codebook 0, over max(T_pred, T_ref)
  int grid_correct = 0;  // matching codes over all K columns
  bool exact = false;
  int monotonicity_violations = 0;
  double mse = 0.0;    // synthesized vs ground-truth features, zero-padded
  double floor = 0.0;  // codec round trip on ground truth
};

// Percentages are in [0, 100]; a frame missing from either sequence counts
// as an error.
struct EvalReport {
  double first_codebook_token_error_rate = 0.0;
  double full_grid_token_accuracy = 0.0;
  double exact_sequence_match = 0.0;
  double mean_length_error = 0.0;
  double feature_mse_vs_codec_floor = 0.0;  // mean MSE / mean floor
  int alignment_monotonicity_violations = 0;
  std::uint64_t seed = 0;
  std::vector<UtteranceEval> utterances;

  OrderedJson to_json() const;
};

// Frames whose position breaks monotonicity, range [0, N), or disagrees with
// the blank count of the symbol path.
int monotonicity_violations(const AlignmentPath& path, int positions);

// Per-utterance decode seed: seed mixed with a hash of the id, so results do
// not depend on evaluation order.
std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id);

EvalReport evaluate(const TtsModel<float>& model, const std::vector<Utterance>& utterances,
                    const Codebooks& books, const EvalOptions& options);

}  // namespace ttst
