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

#include "ttst/model/tts_model.h"

#include <string>

#include "ttst/common/errors.h"
#include "ttst/numerics/rng.h"

namespace ttst {

template <typename T>
Var GstModule<T>::operator()(Graph<T>& g, const Mat<T>& ref) const {
  if (ref.rows() < 4) {
    throw InputError("reference needs at least 4 frames, got " + std::to_string(ref.rows()));
  }
  if (ref.cols() != convs.front().in / 3) {
    throw DimensionError("reference has " + std::to_string(ref.cols()) +
                         " features, expected " + std::to_string(convs.front().in / 3));
  }
  Var x = g.constant(ref);
  for (const auto& conv : convs) x = g.relu(conv(g, g.im2col(x, 3, 2, 1)));

  const Index h = gru_dim;
  Var gates_x = gru_in(g, x);
  Var state = g.constant(Mat<T>::Zero(1, h));
  for (Index t = 0; t < g.rows(x); ++t) {
    Var gx = g.slice_rows(gates_x, t, 1);
    Var gh = gru_hidden(g, state);
    Var r = g.sigmoid(g.add(g.slice_cols(gx, 0, h), g.slice_cols(gh, 0, h)));
    Var z = g.sigmoid(g.add(g.slice_cols(gx, h, h), g.slice_cols(gh, h, h)));
    Var n = g.tanh(g.add(g.slice_cols(gx, 2 * h, h), g.mul(r, g.slice_cols(gh, 2 * h, h))));
    state = g.add(n, g.mul(z, g.sub(state, n)));
  }
  state = g.layer_norm(state, static_cast<T>(Norm<T>::kEps));

  Var bank = g.tanh(g.param(*tokens));
  Var style = g.attention(query(g, state), key(g, bank), value(g, bank), heads, false);
  return proj(g, out(g, style));
}

template <typename T>
TtsModel<T>::TtsModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(mix_seed(config_.seed, 0x6d6f64656cULL));
  const Index de = config_.encoder.dim, dp = config_.predictor.dim, dr = config_.rch.dim;
  const Index vc = config_.code_vocab;
  const auto& gc = config_.gst;

  Index in = config_.feature_dim;
  for (int l = 0; l < gc.conv_layers; ++l) {
    gst_.convs.push_back(Linear<T>::create(params_, "gst.conv" + std::to_string(l), 3 * in,
                                           gc.conv_channels, true, rng));
    in = gc.conv_channels;
  }
  gst_.gru_in = Linear<T>::create(params_, "gst.gru_in", in, 3 * gc.gru_dim, true, rng);
  gst_.gru_hidden =
      Linear<T>::create(params_, "gst.gru_hidden", gc.gru_dim, 3 * gc.gru_dim, true, rng);
  gst_.tokens = &make_param(params_, "gst.tokens", gc.num_tokens, gc.token_dim, Init::kUniform,
                            1, rng);
  gst_.query = Linear<T>::create(params_, "gst.query", gc.gru_dim, gc.token_dim, true, rng);
  gst_.key = Linear<T>::create(params_, "gst.key", gc.token_dim, gc.token_dim, true, rng);
  gst_.value = Linear<T>::create(params_, "gst.value", gc.token_dim, gc.token_dim, true, rng);
  gst_.out = Linear<T>::create(params_, "gst.out", gc.token_dim, gc.token_dim, true, rng);
  gst_.proj = Linear<T>::create(params_, "gst.proj", gc.token_dim, de, true, rng);
  gst_.heads = gc.heads;
  gst_.gru_dim = gc.gru_dim;

  text_emb_ = &make_param(params_, "encoder.embedding", config_.text_vocab, de, Init::kUniform,
                          1, rng);
  encoder_ = TransformerStack<T>::create(params_, "encoder", config_.encoder, de, false, rng);

  code_emb_ = &make_param(params_, "predictor.embedding", vc + 1, dp, Init::kUniform, 1, rng);
  predictor_ =
      TransformerStack<T>::create(params_, "predictor", config_.predictor, 0, true, rng);

  joint_.enc_proj = Linear<T>::create(params_, "joint.enc_proj", de, config_.joint_dim, true, rng);
  joint_.pred_proj =
      Linear<T>::create(params_, "joint.pred_proj", dp, config_.joint_dim, false, rng);
  joint_.out = Linear<T>::create(params_, "joint.out", config_.joint_dim, vc + 1, true, rng);
  joint_.out.bias->value.setZero();

  for (int m = 0; m + 1 < config_.num_codebooks; ++m) {
    rch_.code_emb.push_back(&make_param(params_, "rch.embedding" + std::to_string(m), vc, dr,
                                        Init::kUniform, 1, rng));
  }
  rch_.level_emb = &make_param(params_, "rch.level_embedding", config_.num_codebooks - 1, dr,
                               Init::kUniform, 1, rng);
  rch_.in_proj = Linear<T>::create(params_, "rch.in_proj", dr + de, dr, true, rng);
  rch_.stack = TransformerStack<T>::create(params_, "rch", config_.rch, de, false, rng);
  rch_.out = Linear<T>::create(params_, "rch.out", dr, vc, true, rng);
}

template <typename T>
Var TtsModel<T>::speaker(Graph<T>& g, const Mat<T>& ref) const {
  return gst_(g, ref);
}

template <typename T>
Var TtsModel<T>::encode(Graph<T>& g, std::span<const int> tokens, Var speaker) const {
  if (tokens.empty()) throw InputError("encode: empty token sequence");
  for (int t : tokens) {
    if (t < 0 || t >= config_.text_vocab) {
      throw IndexError("encode: token id " + std::to_string(t) + " outside text vocabulary of " +
                       std::to_string(config_.text_vocab));
    }
  }
  const Index n = static_cast<Index>(tokens.size());
  Var x = g.add(g.gather_rows(g.param(*text_emb_), tokens),
                g.constant(sinusoidal_positions<T>(n, config_.encoder.dim)));
  return encoder_(g, x, speaker);
}

template <typename T>
void TtsModel<T>::check_code(int code) const {
  if (code < 0 || code >= config_.code_vocab) {
    throw IndexError("code " + std::to_string(code) + " outside [0, " +
                     std::to_string(config_.code_vocab) + ")");
  }
}

template <typename T>
Var TtsModel<T>::predict(Graph<T>& g, std::span<const int> codes) const {
  std::vector<int> ids;
  ids.reserve(codes.size() + 1);
  ids.push_back(sos());
  for (int c : codes) {
    check_code(c);
    ids.push_back(c);
  }
  const Index len = static_cast<Index>(ids.size());
  Var x = g.add(g.gather_rows(g.param(*code_emb_), ids),
                g.constant(sinusoidal_positions<T>(len, config_.predictor.dim)));
  return predictor_(g, x, Var{});
}

template <typename T>
Var TtsModel<T>::joint_logits(Graph<T>& g, Var enc, Var pred) const {
  Var h = g.relu(g.pairwise_sum(joint_.enc_proj(g, enc), joint_.pred_proj(g, pred)));
  return joint_.out(g, h);
}

template <typename T>
Var TtsModel<T>::rch_logits(Graph<T>& g, const CodeGrid& codes, int level,
                            std::span<const int> frame_to_pos, Var enc, Var speaker) const {
  if (level < 1 || level >= config_.num_codebooks) {
    throw ValidationError("rch: level must be in [1, " + std::to_string(config_.num_codebooks - 1) +
                          "], got " + std::to_string(level));
  }
  if (codes.books() < level) throw DimensionError("rch: grid has fewer columns than the level");
  const int frames = codes.frames();
  if (frames < 1) throw ValidationError("rch: empty code grid");
  if (static_cast<int>(frame_to_pos.size()) != frames) {
    throw DimensionError("rch: frame map length does not match the grid");
  }
  for (int f : frame_to_pos) {
    if (f < 0 || f >= g.rows(enc)) throw IndexError("rch: frame map points past the encoder");
  }
  Var sum;
  for (int m = 0; m < level; ++m) {
    const std::vector<int> col = codes.column(m);
    for (int c : col) check_code(c);
    Var e = g.gather_rows(g.param(*rch_.code_emb[static_cast<std::size_t>(m)]), col);
    sum = sum.valid() ? g.add(sum, e) : e;
  }
  sum = g.add_row(sum, g.slice_rows(g.param(*rch_.level_emb), level - 1, 1));
  Var aligned = g.gather_rows(enc, frame_to_pos);
  Var x = g.add(rch_.in_proj(g, g.concat_cols(sum, aligned)),
                g.constant(sinusoidal_positions<T>(frames, config_.rch.dim)));
  return rch_.out(g, rch_.stack(g, x, speaker));
}

template <typename T>
PredictorState<T> TtsModel<T>::predictor_start() const {
  PredictorState<T> st;
  st.cache.reset(predictor_.blocks.size());
  Graph<T> g(false);
  const std::vector<int> ids{sos()};
  Var x = g.add(g.gather_rows(g.param(*code_emb_), ids),
                g.constant(sinusoidal_positions<T>(1, config_.predictor.dim, 0)));
  st.output = g.value(predictor_.incremental(g, x, Var{}, st.cache));
  st.position = 1;
  return st;
}

template <typename T>
void TtsModel<T>::predictor_advance(PredictorState<T>& st, int code) const {
  check_code(code);
  Graph<T> g(false);
  const std::vector<int> ids{code};
  Var x = g.add(g.gather_rows(g.param(*code_emb_), ids),
                g.constant(sinusoidal_positions<T>(1, config_.predictor.dim, st.position)));
  st.output = g.value(predictor_.incremental(g, x, Var{}, st.cache));
  ++st.position;
}

template <typename T>
Mat<T> TtsModel<T>::joint_encoder_proj(const Mat<T>& enc) const {
  return joint_.enc_proj.apply(enc);
}

template <typename T>
Mat<T> TtsModel<T>::joint_cell_logits(const Mat<T>& enc_proj_row, const Mat<T>& pred_row) const {
  Mat<T> h = (enc_proj_row + joint_.pred_proj.apply(pred_row)).cwiseMax(T(0));
  return joint_.out.apply(h);
}

template <typename To, typename From>
void copy_params(const TtsModel<From>& from, TtsModel<To>& to) {
  const auto& src = from.params().params();
  const auto& dst = to.params().params();
  if (src.size() != dst.size()) throw ValidationError("copy_params: models differ");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]->name != dst[i]->name || src[i]->value.rows() != dst[i]->value.rows() ||
        src[i]->value.cols() != dst[i]->value.cols()) {
      throw ValidationError("copy_params: parameter mismatch at " + src[i]->name);
    }
    dst[i]->value = src[i]->value.template cast<To>();
  }
}

template struct GstModule<float>;
template struct GstModule<double>;
template class TtsModel<float>;
template class TtsModel<double>;
template void copy_params<double, float>(const TtsModel<float>&, TtsModel<double>&);
template void copy_params<float, double>(const TtsModel<double>&, TtsModel<float>&);
template void copy_params<float, float>(const TtsModel<float>&, TtsModel<float>&);

}  // namespace ttst
