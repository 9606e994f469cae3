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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ttst/codec/corpus.h"
#include "ttst/model/checkpoint.h"
#include "ttst/model/tts_model.h"
#include "ttst/numerics/optim.h"
#include "ttst/rnnt/rnnt.h"

namespace ttst {

struct TrainConfig {
  double alpha = 0.4;
  int batch_size = 8;
  std::int64_t total_steps = 3000;
  LrSchedule schedule{200, 1e-3, 3000, 0.0};
  double grad_clip = 1.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 500;
  // Reference fed to the style encoder during training: "target" uses each
  // utterance's own features, "speaker" the manifest's per-speaker file.
  std::string reference = "target";

  void validate() const;
};

Json to_json(const TrainConfig& c);
void from_json(const Json& j, TrainConfig& c, const std::string& where);

struct LossBreakdown {
  double rnnt = 0.0;   // mean per-utterance transducer loss, nats
  double ce = 0.0;     // mean per-frame residual cross-entropy, nats
  double total = 0.0;  // (1 - alpha) * rnnt + alpha * ce
  std::vector<int> levels;  // residual level sampled for each batch item

  int k() const { return levels.empty() ? 0 : levels.front(); }
};

// The mixing rule, in the precision T used by the graph.
template <typename T>
T combine_losses(double alpha, T rnnt, T ce) {
  return static_cast<T>(1.0 - alpha) * rnnt + static_cast<T>(alpha) * ce;
}

struct TrainItem {
  std::string id;
  std::vector<int> tokens;
  CodeGrid codes;
  std::shared_ptr<const FeatureSeq> ref;
};

// Builds training items. With reference "speaker", one reference matrix is
// shared per reference file; with "target", each item references its own
// ground-truth features.
std::vector<TrainItem> make_train_items(const std::vector<Utterance>& utterances,
                                        const std::string& reference = "target");

template <typename T>
struct LossGraph {
  Var total;
  Var rnnt;
  Var ce;
  LossBreakdown breakdown;
  std::vector<AlignmentPath> alignments;  // training-lattice best paths
};

// Builds the joint objective for a batch on `g`: transducer loss on codebook
// 0, Viterbi alignment from the same lattice, and cross-entropy of the
// residual head at levels[b] for item b.
template <typename T>
LossGraph<T> build_loss(const TtsModel<T>& model, Graph<T>& g, std::span<const TrainItem> batch,
                        double alpha, std::span<const int> levels);

// Transducer loss node: consumes N * (T + 1) x (V_c + 1) logits and returns a
// 1 x 1 loss with its analytic gradient attached. The best path of the
// lattice is written to *alignment when non-null.
template <typename T>
Var rnnt_node(Graph<T>& g, Var logits, int positions, std::span<const int> target,
              AlignmentPath* alignment);

struct StepResult {
  std::int64_t step = 0;  // 1-based index of the completed step
  double lr = 0.0;
  double grad_norm = 0.0;
  LossBreakdown loss;
};

// Single-writer training loop state. Everything a step consumes is derived
// from (seed, step), so a restored trainer continues bit-exactly.
class Trainer {
 public:
  Trainer(TtsModel<float>& model, const TrainConfig& config, std::vector<TrainItem> data);

  StepResult step();
  std::int64_t step_count() const { return step_; }
  const TrainConfig& config() const { return config_; }

  // Batch indices and residual levels used by step `step` (0-based).
  std::vector<std::size_t> batch_indices(std::int64_t step);
  std::vector<int> batch_levels(std::int64_t step) const;

  // Adds optimizer moments and the step counter to a checkpoint, and back.
  void save_state(Checkpoint& ckpt) const;
  void restore_state(const Checkpoint& ckpt);

 private:
  TtsModel<float>& model_;
  TrainConfig config_;
  std::vector<TrainItem> data_;
  AdamW<float> optimizer_;
  std::int64_t step_ = 0;
  std::int64_t perm_epoch_ = -1;
  std::vector<std::size_t> perm_;
};

}  // namespace ttst
