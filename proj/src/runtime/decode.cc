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

#include "ttst/runtime/decode.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttst/common/errors.h"

namespace ttst {

void DecodeConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("decode.p must be in (0, 1]");
  if (max_symbols_per_step < 1) throw ConfigError("decode.max_symbols_per_step must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("decode.temperature must be positive");
}

Json to_json(const DecodeConfig& c) {
  return Json{{"p", c.p},
              {"max_symbols_per_step", c.max_symbols_per_step},
              {"temperature", c.temperature},
              {"seed", c.seed}};
}

void from_json(const Json& j, DecodeConfig& c, const std::string& where) {
  require_keys(j, {"p", "max_symbols_per_step", "temperature", "seed"}, where);
  read_opt(j, "p", c.p, where);
  read_opt(j, "max_symbols_per_step", c.max_symbols_per_step, where);
  read_opt(j, "temperature", c.temperature, where);
  read_opt(j, "seed", c.seed, where);
}

std::vector<std::pair<int, double>> nucleus_support(std::span<const double> log_probs, double p,
                                                    double temperature) {
  if (log_probs.empty()) throw ValidationError("nucleus: empty distribution");
  if (!(temperature > 0.0)) throw ConfigError("nucleus: temperature must be positive");
  const std::size_t n = log_probs.size();
  std::vector<double> prob(n);
  double mx = -std::numeric_limits<double>::infinity();
  for (double lp : log_probs) mx = std::max(mx, lp / temperature);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prob[i] = std::exp(log_probs[i] / temperature - mx);
    z += prob[i];
  }
  for (auto& q : prob) q /= z;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return prob[static_cast<std::size_t>(a)] > prob[static_cast<std::size_t>(b)]; });
  std::vector<std::pair<int, double>> keep;
  double mass = 0.0;
  for (int i : order) {
    keep.emplace_back(i, prob[static_cast<std::size_t>(i)]);
    mass += prob[static_cast<std::size_t>(i)];
    if (mass >= p) break;
  }
  for (auto& [i, q] : keep) q /= mass;
  return keep;
}

int nucleus_sample(std::span<const double> log_probs, double p, double temperature, Rng& rng) {
  const auto keep = nucleus_support(log_probs, p, temperature);
  if (keep.size() == 1) return keep.front().first;
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [i, q] : keep) {
    acc += q;
    if (u < acc) return i;
  }
  return keep.back().first;
}

namespace {

template <typename T>
std::vector<double> log_softmax_row(const Mat<T>& logits) {
  std::vector<double> lp(static_cast<std::size_t>(logits.cols()));
  double mx = -std::numeric_limits<double>::infinity();
  for (Index c = 0; c < logits.cols(); ++c) mx = std::max(mx, static_cast<double>(logits(0, c)));
  double z = 0.0;
  for (Index c = 0; c < logits.cols(); ++c) z += std::exp(static_cast<double>(logits(0, c)) - mx);
  const double lse = mx + std::log(z);
  for (Index c = 0; c < logits.cols(); ++c) {
    lp[static_cast<std::size_t>(c)] = static_cast<double>(logits(0, c)) - lse;
  }
  return lp;
}

}  // namespace

template <typename T>
FirstCodebook decode_first_codebook(const TtsModel<T>& model, const Mat<T>& enc,
                                    const DecodeConfig& config) {
  config.validate();
  if (enc.rows() < 1) throw InputError("decode: empty encoder output");
  Rng rng(config.seed);
  const Mat<T> enc_proj = model.joint_encoder_proj(enc);
  PredictorState<T> state = model.predictor_start();
  FirstCodebook out;
  const int blank = model.blank();
  for (Index i = 0; i < enc.rows(); ++i) {
    int emitted = 0;
    while (true) {
      if (emitted >= config.max_symbols_per_step) {
        out.path.path.push_back(PathSymbol::kBlank);
        break;
      }
      const Mat<T> logits = model.joint_cell_logits(enc_proj.row(i), state.output);
      const std::vector<double> lp = log_softmax_row(logits);
      const int v = nucleus_sample(lp, config.p, config.temperature, rng);
      if (v == blank) {
        out.path.path.push_back(PathSymbol::kBlank);
        break;
      }
      out.codes.push_back(v);
      out.path.path.push_back(PathSymbol::kEmit);
      out.path.frame_to_pos.push_back(static_cast<int>(i));
      model.predictor_advance(state, v);
      ++emitted;
    }
  }
  return out;
}

template <typename T>
CodeGrid decode_residual(const TtsModel<T>& model, const std::vector<int>& first,
                         const AlignmentPath& path, const Mat<T>& enc, const Mat<T>& speaker) {
  const int frames = static_cast<int>(first.size());
  if (static_cast<int>(path.frame_to_pos.size()) != frames) {
    throw ValidationError("decode_residual: alignment covers " +
                          std::to_string(path.frame_to_pos.size()) + " frames, codes have " +
                          std::to_string(frames));
  }
  const int books = model.config().num_codebooks;
  if (frames == 0) return CodeGrid(0, books);
  CodeGrid grid(frames, books);
  grid.set_column(0, first);
  for (int k = 1; k < books; ++k) {
    Graph<T> g(false);
    Var e = g.constant(enc);
    Var s = g.constant(speaker);
    const Mat<T>& logits = g.value(model.rch_logits(g, grid, k, path.frame_to_pos, e, s));
    for (int j = 0; j < frames; ++j) {
      Index best = 0;
      logits.row(j).maxCoeff(&best);
      grid.at(j, k) = static_cast<int>(best);
    }
  }
  return grid;
}

template <typename T>
Synthesis synthesize_tokens(const TtsModel<T>& model, const TokenSeq& tokens,
                            const FeatureSeq& ref, const Codebooks& books,
                            const DecodeConfig& config) {
  if (tokens.ids.empty()) throw InputError("synthesize: empty token sequence");
  if (books.num_levels() != model.config().num_codebooks) {
    throw ValidationError("synthesize: codec has " + std::to_string(books.num_levels()) +
                          " codebooks, model expects " +
                          std::to_string(model.config().num_codebooks));
  }
  Synthesis out;
  out.tokens = tokens;
  Mat<T> speaker, enc;
  {
    Graph<T> g(false);
    Var s = model.speaker(g, ref.template cast<T>());
    Var e = model.encode(g, tokens.ids, s);
    speaker = g.value(s);
    enc = g.value(e);
  }
  out.speaker = speaker.template cast<double>();
  out.first = decode_first_codebook(model, enc, config);
  out.codes = decode_residual(model, out.first.codes, out.first.path, enc, speaker);
  if (out.codes.frames() > 0) {
    out.features = rvq_decode(books, out.codes, books.num_levels());
  } else {
    out.features = FeatureSeq(0, books.spec.feature_dim);
  }
  return out;
}

template <typename T>
Synthesis synthesize(const std::string& text, const FeatureSeq& ref, const TtsModel<T>& model,
                     const BpeVocab& vocab, const Codebooks& books, const DecodeConfig& config) {
  if (text.empty()) throw InputError("synthesize: empty text");
  config.validate();
  return synthesize_tokens(model, vocab.encode(text), ref, books, config);
}

#define TTST_INSTANTIATE(T)                                                                    \
  template FirstCodebook decode_first_codebook<T>(const TtsModel<T>&, const Mat<T>&,          \
                                                  const DecodeConfig&);                       \
  template CodeGrid decode_residual<T>(const TtsModel<T>&, const std::vector<int>&,           \
                                       const AlignmentPath&, const Mat<T>&, const Mat<T>&);   \
  template Synthesis synthesize_tokens<T>(const TtsModel<T>&, const TokenSeq&,                \
                                          const FeatureSeq&, const Codebooks&,                \
                                          const DecodeConfig&);                               \
  template Synthesis synthesize<T>(const std::string&, const FeatureSeq&, const TtsModel<T>&, \
                                   const BpeVocab&, const Codebooks&, const DecodeConfig&);

TTST_INSTANTIATE(float)
TTST_INSTANTIATE(double)
#undef TTST_INSTANTIATE

}  // namespace ttst
