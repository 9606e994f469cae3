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

#include "ttst/runtime/eval.h"

#include <algorithm>
#include <cmath>

#include "ttst/common/errors.h"

namespace ttst {

int monotonicity_violations(const AlignmentPath& path, int positions) {
  std::vector<int> expected;
  try {
    expected = frame_map(path);
  } catch (const ValidationError&) {
    return std::max<int>(1, static_cast<int>(path.frame_to_pos.size()));
  }
  int bad = 0;
  const auto& f = path.frame_to_pos;
  if (path.positions() != positions) ++bad;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const bool ok = f[j] >= 0 && f[j] < positions && (j == 0 || f[j] >= f[j - 1]) &&
                    j < expected.size() && expected[j] == f[j];
    bad += ok ? 0 : 1;
  }
  if (expected.size() != f.size()) ++bad;
  return bad;
}

std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id) {
  return mix_seed(seed, fnv1a(id.data(), id.size()));
}

namespace {

double padded_mse(const FeatureSeq& a, const FeatureSeq& b) {
  const Index rows = std::max(a.rows(), b.rows());
  const Index cols = std::max(a.cols(), b.cols());
  if (rows == 0 || cols == 0) return 0.0;
  FeatureSeq pa = FeatureSeq::Zero(rows, cols), pb = FeatureSeq::Zero(rows, cols);
  pa.topLeftCorner(a.rows(), a.cols()) = a;
  pb.topLeftCorner(b.rows(), b.cols()) = b;
  return (pa - pb).squaredNorm() / static_cast<double>(rows * cols);
}

}  // namespace

EvalReport evaluate(const TtsModel<float>& model, const std::vector<Utterance>& utterances,
                    const Codebooks& books, const EvalOptions& options) {
  if (utterances.empty()) throw ValidationError("eval: no utterances");
  options.decode.validate();
  EvalReport report;
  report.seed = options.decode.seed;
  const int k = books.num_levels();
  long first_err = 0, first_den = 0, grid_ok = 0, grid_den = 0;
  double len_err = 0.0, mse_sum = 0.0, floor_sum = 0.0;
  int exact = 0;
  for (const auto& u : utterances) {
    if (u.features.rows() == 0) {
      throw IoError(u.entry.id + ": ground-truth features (feats/" + u.entry.id +
                    ".ttsf) are missing");
    }
    UtteranceEval ue;
    ue.id = u.entry.id;
    ue.speaker = u.entry.speaker;
    ue.positions = static_cast<int>(u.tokens.ids.size());
    ue.ref_frames = u.codes.frames();

    CodeGrid pred;
    FeatureSeq feats;
    if (options.oracle) {
      pred = u.codes;
      feats = rvq_decode(books, pred, k);
    } else {
      DecodeConfig dc = options.decode;
      dc.seed = utterance_seed(options.decode.seed, u.entry.id);
      Synthesis syn = synthesize_tokens(model, u.tokens, u.ref, books, dc);
      ue.monotonicity_violations = monotonicity_violations(syn.first.path, ue.positions);
      pred = std::move(syn.codes);
      feats = std::move(syn.features);
    }
    ue.pred_frames = pred.frames();
    const int overlap = std::min(ue.pred_frames, ue.ref_frames);
    const int span = std::max(ue.pred_frames, ue.ref_frames);
    ue.first_errors = span - overlap;
    for (int j = 0; j < overlap; ++j) {
      if (pred.at(j, 0) != u.codes.at(j, 0)) ++ue.first_errors;
      for (int b = 0; b < k; ++b) ue.grid_correct += pred.at(j, b) == u.codes.at(j, b);
    }
    ue.exact = ue.pred_frames == ue.ref_frames && ue.first_errors == 0;
    ue.mse = padded_mse(feats, u.features);
    ue.floor = mean_squared_error(rvq_decode(books, rvq_encode(books, u.features), k), u.features);

    first_err += ue.first_errors;
    first_den += span;
    grid_ok += ue.grid_correct;
    grid_den += static_cast<long>(span) * k;
    len_err += std::abs(ue.pred_frames - ue.ref_frames) / static_cast<double>(ue.ref_frames);
    mse_sum += ue.mse;
    floor_sum += ue.floor;
    exact += ue.exact ? 1 : 0;
    report.alignment_monotonicity_violations += ue.monotonicity_violations;
    report.utterances.push_back(std::move(ue));
  }
  const double n = static_cast<double>(utterances.size());
  report.first_codebook_token_error_rate = first_den > 0 ? 100.0 * first_err / first_den : 0.0;
  report.full_grid_token_accuracy = grid_den > 0 ? 100.0 * grid_ok / grid_den : 0.0;
  report.exact_sequence_match = 100.0 * exact / n;
  report.mean_length_error = len_err / n;
  report.feature_mse_vs_codec_floor =
      floor_sum > 0.0 ? mse_sum / floor_sum
                      : (mse_sum > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  return report;
}

OrderedJson EvalReport::to_json() const {
  OrderedJson j;
  j["first_codebook_token_error_rate"] = first_codebook_token_error_rate;
  j["full_grid_token_accuracy"] = full_grid_token_accuracy;
  j["exact_sequence_match"] = exact_sequence_match;
  j["mean_length_error"] = mean_length_error;
  j["feature_mse_vs_codec_floor"] = feature_mse_vs_codec_floor;
  j["alignment_monotonicity_violations"] = alignment_monotonicity_violations;
  j["seed"] = seed;
  return j;
}

}  // namespace ttst
