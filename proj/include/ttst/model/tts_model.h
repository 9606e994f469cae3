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

#include <span>
#include <vector>

#include "ttst/codec/rvq.h"
#include "ttst/model/config.h"
#include "ttst/numerics/graph.h"
#include "ttst/numerics/layers.h"

namespace ttst {

// Reference encoder (strided convolutions + GRU) whose layer-normalized final
// state queries a bank of learned style tokens.
template <typename T>
struct GstModule {
  std::vector<Linear<T>> convs;  // kernel 3, stride 2, pad 1
  Linear<T> gru_in;              // gates r, z, n
  Linear<T> gru_hidden;
  Param<T>* tokens = nullptr;
  Linear<T> query, key, value, out, proj;
  int heads = 1;
  int gru_dim = 0;

  Var operator()(Graph<T>& g, const Mat<T>& ref) const;
};

template <typename T>
struct JointModule {
  Linear<T> enc_proj;
  Linear<T> pred_proj;
  Linear<T> out;
};

template <typename T>
struct RchModule {
  std::vector<Param<T>*> code_emb;  // one table per input level 0..K-2
  Param<T>* level_emb = nullptr;    // row k-1 marks target level k
  Linear<T> in_proj;
  TransformerStack<T> stack;
  Linear<T> out;
};

// Incremental prediction-network state: the cache and the latest output row.
template <typename T>
struct PredictorState {
  KvCache<T> cache;
  Mat<T> output;  // 1 x d_p
  Index position = 0;
};

template <typename T>
class TtsModel {
 public:
  explicit TtsModel(const ModelConfig& config);
  TtsModel(const TtsModel&) = delete;
  TtsModel& operator=(const TtsModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  int blank() const { return config_.code_vocab; }
  int sos() const { return config_.code_vocab; }

  // 1 x d_e speaker embedding. Throws InputError for fewer than 4 frames.
  Var speaker(Graph<T>& g, const Mat<T>& ref) const;
  // N x d_e. Throws IndexError on a token outside the text vocabulary.
  Var encode(Graph<T>& g, std::span<const int> tokens, Var speaker) const;
  // (T + 1) x d_p for the <SOS>-prefixed codes.
  Var predict(Graph<T>& g, std::span<const int> codes) const;
  // N * (T + 1) x (V_c + 1) logits, row i * (T + 1) + j.
  Var joint_logits(Graph<T>& g, Var enc, Var pred) const;
  // T x V_c logits for codebook `level` from columns < level of `codes` and
  // encoder rows picked by frame_to_pos.
  Var rch_logits(Graph<T>& g, const CodeGrid& codes, int level,
                 std::span<const int> frame_to_pos, Var enc, Var speaker) const;

  PredictorState<T> predictor_start() const;
  void predictor_advance(PredictorState<T>& state, int code) const;

  // Single-cell joint evaluation for decoding.
  Mat<T> joint_encoder_proj(const Mat<T>& enc) const;
  Mat<T> joint_cell_logits(const Mat<T>& enc_proj_row, const Mat<T>& pred_row) const;

 private:
  void check_code(int code) const;

  ModelConfig config_;
  ParamStore<T> params_;
  GstModule<T> gst_;
  Param<T>* text_emb_ = nullptr;
  TransformerStack<T> encoder_;
  Param<T>* code_emb_ = nullptr;
  TransformerStack<T> predictor_;
  JointModule<T> joint_;
  RchModule<T> rch_;
};

extern template class TtsModel<float>;
extern template class TtsModel<double>;

// Copies parameter values between precisions (same config required).
template <typename To, typename From>
void copy_params(const TtsModel<From>& from, TtsModel<To>& to);

}  // namespace ttst
