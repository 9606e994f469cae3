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

#include "model_check.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ttst/model/tts_model.h"
#include "ttst/runtime/train.h"

namespace ttst::testing {

namespace {

void randomize_zero_init(TtsModel<double>& model, Rng& rng) {
  for (const auto& p : model.params().params()) {
    if (p->name.find("to_gamma") != std::string::npos || p->name.find("to_beta") != std::string::npos ||
        p->name == "joint.out.bias") {
      for (Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = 0.2 * rng.normal();
    }
  }
}

TrainItem random_item(const ModelConfig& cfg, Rng& rng) {
  TrainItem item;
  item.id = "u0";
  item.tokens = {1, 4, 2};
  item.codes = CodeGrid(4, cfg.num_codebooks);
  for (int t = 0; t < 4; ++t) {
    for (int k = 0; k < cfg.num_codebooks; ++k) {
      item.codes.at(t, k) = static_cast<int>(rng.below(cfg.code_vocab));
    }
  }
  auto ref = std::make_shared<FeatureSeq>(6, cfg.feature_dim);
  for (Index i = 0; i < ref->size(); ++i) ref->data()[i] = rng.normal();
  item.ref = ref;
  return item;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

GradCheckReport full_model_grad_check(std::uint64_t seed, double alpha) {
  ModelConfig cfg = ModelConfig::tiny();
  cfg.seed = seed;
  TtsModel<double> model(cfg);
  Rng rng(mix_seed(seed, 0x6763));
  randomize_zero_init(model, rng);
  const std::vector<TrainItem> batch{random_item(cfg, rng)};
  const std::vector<int> levels{1 + static_cast<int>(rng.below(cfg.num_codebooks - 1))};

  GradCheckOptions opt;
  opt.step = 1e-5;
  opt.seed = seed;
  opt.max_entries_per_param = 16;
  return grad_check(model.params(), [&](Graph<double>& g) {
    return build_loss(model, g, batch, alpha, levels).total;
  }, opt);
}

GradPartition gradient_partition(std::uint64_t seed, double alpha) {
  ModelConfig cfg = ModelConfig::tiny();
  cfg.seed = seed;
  TtsModel<double> model(cfg);
  Rng rng(mix_seed(seed, 0x7061));
  randomize_zero_init(model, rng);
  const std::vector<TrainItem> batch{random_item(cfg, rng), random_item(cfg, rng)};
  const std::vector<int> levels{1, 2};
  model.params().zero_grad();
  Graph<double> g;
  g.backward(build_loss(model, g, batch, alpha, levels).total);
  GradPartition out;
  for (const auto& p : model.params().params()) {
    const double sq = p->grad.squaredNorm();
    if (starts_with(p->name, "predictor.") || starts_with(p->name, "joint.")) out.transducer_norm += sq;
    if (starts_with(p->name, "rch.")) out.rch_norm += sq;
  }
  out.transducer_norm = std::sqrt(out.transducer_norm);
  out.rch_norm = std::sqrt(out.rch_norm);
  return out;
}

double cache_vs_recompute_rel_diff(std::uint64_t seed, int steps) {
  ModelConfig cfg = ModelConfig::desk();
  cfg.seed = seed;
  TtsModel<float> model(cfg);
  Rng rng(mix_seed(seed, 0x6b76));
  std::vector<int> codes(static_cast<std::size_t>(steps));
  for (auto& c : codes) c = static_cast<int>(rng.below(cfg.code_vocab));
  Graph<float> g(false);
  const Mat<float> full = g.value(model.predict(g, codes));
  Mat<float> enc(2, cfg.encoder.dim);
  for (Index i = 0; i < enc.size(); ++i) enc.data()[i] = static_cast<float>(rng.normal());
  const Mat<float> logits = g.value(model.joint_logits(g, g.constant(enc), g.constant(full)));
  const Mat<float> enc_proj = model.joint_encoder_proj(enc);

  auto rel = [](const Mat<float>& a, const auto& b) {
    const double scale = std::max<double>(b.cwiseAbs().maxCoeff(), 1e-12);
    return static_cast<double>((a - b).cwiseAbs().maxCoeff()) / scale;
  };
  double worst = 0.0;
  PredictorState<float> st = model.predictor_start();
  for (int j = 0; j <= steps; ++j) {
    if (j > 0) model.predictor_advance(st, codes[static_cast<std::size_t>(j - 1)]);
    worst = std::max(worst, rel(st.output, full.row(j)));
    for (Index i = 0; i < 2; ++i) {
      const Mat<float> cell = model.joint_cell_logits(enc_proj.row(i), st.output);
      worst = std::max(worst, rel(cell, logits.row(i * (steps + 1) + j)));
    }
  }
  return worst;
}

}  // namespace ttst::testing
