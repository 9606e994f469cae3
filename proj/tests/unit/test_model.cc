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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ttst/common/errors.h"
#include "ttst/model/checkpoint.h"
#include "ttst/model/config.h"
#include "ttst/model/tts_model.h"
#include "ttst/numerics/rng.h"

using namespace ttst;
using M = Mat<double>;

namespace {

M random_mat(Rng& rng, Index r, Index c) {
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Gives zero-initialized conditioning projections random values.
void perturb_conditioning(TtsModel<double>& model, Rng& rng) {
  for (const auto& p : model.params().params()) {
    if (p->name.find("to_gamma") != std::string::npos || p->name.find("to_beta") != std::string::npos) {
      p->value = 0.3 * random_mat(rng, p->value.rows(), p->value.cols());
    }
  }
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("encoder shape, mixing and identity conditioning at init") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<double> model(cfg);
  Rng rng(1);
  Graph<double> g(false);
  const Var s1 = model.speaker(g, random_mat(rng, 6, cfg.feature_dim));
  const Var s2 = model.speaker(g, random_mat(rng, 9, cfg.feature_dim));
  CHECK(g.value(s1) != g.value(s2));
  const std::vector<int> tokens{0, 1, 2, 3, 4, 5, 1};
  const M e1 = g.value(model.encode(g, tokens, s1));
  CHECK(e1.rows() == 7);
  CHECK(e1.cols() == cfg.encoder.dim);
  CHECK(g.value(model.encode(g, tokens, s2)) == e1);

  std::vector<int> swapped = tokens;
  std::swap(swapped[1], swapped[4]);
  const M e3 = g.value(model.encode(g, swapped, s1));
  CHECK(e3.row(1) != e1.row(1));
  CHECK(e3.row(4) != e1.row(4));
  CHECK((e3.row(1) - e1.row(4)).norm() > 1e-6);

  const std::vector<int> bad{cfg.text_vocab};
  CHECK_THROWS_AS(model.encode(g, bad, s1), IndexError);
}

TEST_CASE("predictor: SOS row, causality, cache equals recompute") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<double> model(cfg);
  Graph<double> g(false);
  CHECK(g.rows(model.predict(g, std::vector<int>{})) == 1);

  Rng rng(4);
  std::vector<int> prefix(10);
  for (auto& c : prefix) c = static_cast<int>(rng.below(cfg.code_vocab));
  const M full = g.value(model.predict(g, prefix));
  CHECK(full.rows() == 11);
  const M head = g.value(model.predict(g, std::span<const int>(prefix).first(4)));
  CHECK(head.isApprox(full.topRows(5), 1e-12));

  PredictorState<double> st = model.predictor_start();
  double worst = (st.output - full.row(0)).cwiseAbs().maxCoeff() / full.row(0).cwiseAbs().maxCoeff();
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    model.predictor_advance(st, prefix[j]);
    const auto row = full.row(static_cast<Index>(j) + 1);
    worst = std::max(worst, (st.output - row).cwiseAbs().maxCoeff() / row.cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-5);
  CHECK_THROWS_AS(model.predictor_advance(st, cfg.code_vocab), IndexError);
}

TEST_CASE("joint network: normalization, uniform at zero output, cell equals grid") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<double> model(cfg);
  Rng rng(5);
  Graph<double> g(false);
  const Var spk = model.speaker(g, random_mat(rng, 8, cfg.feature_dim));
  const Var enc = model.encode(g, std::vector<int>{1, 2, 3}, spk);
  const std::vector<int> codes{0, 4, 2, 2};
  const Var pred = model.predict(g, codes);
  const M logits = g.value(model.joint_logits(g, enc, pred));
  REQUIRE(logits.rows() == 3 * 5);
  REQUIRE(logits.cols() == cfg.code_vocab + 1);
  const M lp = g.value(g.log_softmax(g.constant(logits)));
  for (Index r = 0; r < lp.rows(); ++r) CHECK(std::abs(std::log(lp.row(r).array().exp().sum())) < 1e-6);

  const M ep = model.joint_encoder_proj(g.value(enc));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) {
      const M cell = model.joint_cell_logits(ep.row(i), g.value(pred).row(j));
      CHECK((cell - logits.row(i * 5 + j)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  model.params().at("joint.out.weight").value.setZero();
  model.params().at("joint.out.bias").value.setZero();
  Graph<double> g2(false);
  const M zero = g2.value(g2.log_softmax(
      model.joint_logits(g2, g2.constant(g.value(enc)), g2.constant(g.value(pred)))));
  CHECK((zero.array() + std::log(cfg.code_vocab + 1.0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("residual head: shape, locality, level embedding, determinism") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<double> model(cfg);
  Rng rng(6);
  perturb_conditioning(model, rng);
  Graph<double> g(false);
  const Var spk = model.speaker(g, random_mat(rng, 8, cfg.feature_dim));
  const Var enc = model.encode(g, std::vector<int>{1, 2, 3, 4}, spk);
  CodeGrid codes(12, cfg.num_codebooks);
  for (int t = 0; t < 12; ++t)
    for (int k = 0; k < cfg.num_codebooks; ++k) codes.at(t, k) = static_cast<int>(rng.below(cfg.code_vocab));
  const std::vector<int> f{0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3};
  const M l1 = g.value(model.rch_logits(g, codes, 1, f, enc, spk));
  CHECK(l1.rows() == 12);
  CHECK(l1.cols() == cfg.code_vocab);
  CHECK(g.value(model.rch_logits(g, codes, 1, f, enc, spk)) == l1);

  CodeGrid changed = codes;
  changed.at(5, 0) = (codes.at(5, 0) + 1) % cfg.code_vocab;
  const M l1b = g.value(model.rch_logits(g, changed, 1, f, enc, spk));
  CHECK((l1b.row(5) - l1.row(5)).norm() > 1e-9);

  const M l2 = g.value(model.rch_logits(g, codes.leading_columns(1), 1, f, enc, spk));
  CHECK(l2 == l1);
  const M l2b = g.value(model.rch_logits(g, codes, 2, f, enc, spk));
  CHECK((l2b - l1).norm() > 1e-9);
  CHECK_THROWS_AS(model.rch_logits(g, codes, 0, f, enc, spk), ValidationError);
}

TEST_CASE("style encoder: shape, determinism, short references rejected") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<double> model(cfg);
  Rng rng(8);
  const M ref = random_mat(rng, 10, cfg.feature_dim);
  Graph<double> g(false);
  const M a = g.value(model.speaker(g, ref));
  CHECK(a.rows() == 1);
  CHECK(a.cols() == cfg.encoder.dim);
  CHECK(g.value(model.speaker(g, ref)) == a);
  CHECK_THROWS_AS(model.speaker(g, random_mat(rng, 3, cfg.feature_dim)), InputError);
  CHECK_THROWS_AS(model.speaker(g, random_mat(rng, 8, cfg.feature_dim + 1)), DimensionError);
}

TEST_CASE("parameter counts") {
  CHECK(Linear<double>::count(2, 3, true) == 9);
  CHECK(param_count(ModelConfig::desk()) == 2872321);
  const std::int64_t large = param_count(ModelConfig::large());
  CHECK(large >= 190'000'000);
  CHECK(large <= 210'000'000);
  for (const ModelConfig& c : {ModelConfig::tiny(), ModelConfig::desk()}) {
    TtsModel<float> m(c);
    CHECK(m.params().scalar_count() == param_count(c));
  }
}

TEST_CASE("config validation and JSON round trip") {
  ModelConfig c = ModelConfig::desk();
  const Json j = to_json(c);
  ModelConfig back;
  from_json(j, back, "model");
  CHECK(to_json(back) == j);
  Json bad = j;
  bad["encoder"]["depth"] = 3;
  CHECK_THROWS_AS(from_json(bad, back, "model"), ConfigError);
  c.encoder.heads = 3;  // 128 not divisible by 3
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("checkpoint save/load/save is byte-identical") {
  const ModelConfig cfg = ModelConfig::tiny();
  TtsModel<float> a(cfg);
  Checkpoint ck;
  ck.meta["model"] = to_json(cfg);
  append_params(ck, a.params());
  std::stringstream s1;
  write_checkpoint(s1, ck);

  ModelConfig other = cfg;
  other.seed = 99;
  TtsModel<float> b(other);
  const Checkpoint loaded = read_checkpoint(s1);
  load_params(loaded, b.params());
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    CHECK(a.params().params()[i]->value == b.params().params()[i]->value);
  }
  Checkpoint again;
  again.meta = loaded.meta;
  append_params(again, b.params());
  std::stringstream s2;
  write_checkpoint(s2, again);
  CHECK(s1.str() == s2.str());

  std::stringstream corrupt("TTSX\x09\0\0\0");
  CHECK_THROWS_AS(read_checkpoint(corrupt), IoError);
  ModelConfig bigger = cfg;
  bigger.joint_dim = 16;
  TtsModel<float> c(bigger);
  CHECK_THROWS_AS(load_params(loaded, c.params()), Error);
}

TEST_CASE("precision copy preserves values") {
  TtsModel<float> f(ModelConfig::tiny());
  TtsModel<double> d(ModelConfig::tiny());
  copy_params(f, d);
  CHECK(d.params().at("joint.out.weight").value.cast<float>() ==
        f.params().at("joint.out.weight").value);
}

}  // TEST_SUITE
