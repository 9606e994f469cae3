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

#include "ttst/model/config.h"

#include <string>

namespace ttst {

void GstConfig::validate() const {
  if (num_tokens < 1 || token_dim < 1 || conv_channels < 1 || conv_layers < 1 || gru_dim < 1) {
    throw ConfigError("gst: all sizes must be positive");
  }
  if (heads < 1 || token_dim % heads != 0) {
    throw ConfigError("gst.token_dim must be divisible by gst.heads");
  }
}

void ModelConfig::validate() const {
  encoder.validate("encoder");
  predictor.validate("predictor");
  rch.validate("rch");
  if (predictor.ff_kernel != 1) throw ConfigError("predictor.ff_kernel must be 1 (causal)");
  gst.validate();
  if (joint_dim < 1) throw ConfigError("joint_dim must be positive");
  if (text_vocab < 1) throw ConfigError("text_vocab must be positive");
  if (code_vocab < 2) throw ConfigError("code_vocab must be >= 2");
  if (num_codebooks < 2) throw ConfigError("num_codebooks must be >= 2");
  if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
  if (max_symbols_per_step < 1) throw ConfigError("max_symbols_per_step must be >= 1");
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::large() {
  ModelConfig c;
  c.encoder = {12, 640, 2, 1536, 3};
  c.predictor = {6, 512, 4, 2048, 1};
  c.rch = {12, 512, 2, 1536, 1};
  c.joint_dim = 640;
  c.gst = {1024, 640, 128, 2, 128, 4};
  c.text_vocab = 8192;
  c.code_vocab = 1024;
  c.num_codebooks = 8;
  c.feature_dim = 80;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.encoder = {1, 8, 2, 16, 1};
  c.predictor = {1, 8, 2, 16, 1};
  c.rch = {1, 8, 2, 16, 1};
  c.joint_dim = 8;
  c.gst = {4, 8, 4, 2, 8, 2};
  c.text_vocab = 6;
  c.code_vocab = 5;
  c.num_codebooks = 3;
  c.feature_dim = 3;
  return c;
}

Json to_json(const StackConfig& c) {
  return Json{{"layers", c.layers},
              {"dim", c.dim},
              {"heads", c.heads},
              {"ff_dim", c.ff_dim},
              {"ff_kernel", c.ff_kernel}};
}

Json to_json(const GstConfig& c) {
  return Json{{"num_tokens", c.num_tokens},       {"token_dim", c.token_dim},
              {"conv_channels", c.conv_channels}, {"conv_layers", c.conv_layers},
              {"gru_dim", c.gru_dim},             {"heads", c.heads}};
}

Json to_json(const ModelConfig& c) {
  return Json{{"encoder", to_json(c.encoder)},
              {"predictor", to_json(c.predictor)},
              {"rch", to_json(c.rch)},
              {"joint_dim", c.joint_dim},
              {"gst", to_json(c.gst)},
              {"text_vocab", c.text_vocab},
              {"code_vocab", c.code_vocab},
              {"num_codebooks", c.num_codebooks},
              {"feature_dim", c.feature_dim},
              {"max_symbols_per_step", c.max_symbols_per_step},
              {"seed", c.seed}};
}

void from_json(const Json& j, StackConfig& c, const std::string& where) {
  require_keys(j, {"layers", "dim", "heads", "ff_dim", "ff_kernel"}, where);
  read_opt(j, "layers", c.layers, where);
  read_opt(j, "dim", c.dim, where);
  read_opt(j, "heads", c.heads, where);
  read_opt(j, "ff_dim", c.ff_dim, where);
  read_opt(j, "ff_kernel", c.ff_kernel, where);
}

void from_json(const Json& j, GstConfig& c, const std::string& where) {
  require_keys(j, {"num_tokens", "token_dim", "conv_channels", "conv_layers", "gru_dim", "heads"},
               where);
  read_opt(j, "num_tokens", c.num_tokens, where);
  read_opt(j, "token_dim", c.token_dim, where);
  read_opt(j, "conv_channels", c.conv_channels, where);
  read_opt(j, "conv_layers", c.conv_layers, where);
  read_opt(j, "gru_dim", c.gru_dim, where);
  read_opt(j, "heads", c.heads, where);
}

void from_json(const Json& j, ModelConfig& c, const std::string& where) {
  require_keys(j,
               {"encoder", "predictor", "rch", "joint_dim", "gst", "text_vocab", "code_vocab",
                "num_codebooks", "feature_dim", "max_symbols_per_step", "seed"},
               where);
  if (j.contains("encoder")) from_json(j["encoder"], c.encoder, where + ".encoder");
  if (j.contains("predictor")) from_json(j["predictor"], c.predictor, where + ".predictor");
  if (j.contains("rch")) from_json(j["rch"], c.rch, where + ".rch");
  if (j.contains("gst")) from_json(j["gst"], c.gst, where + ".gst");
  read_opt(j, "joint_dim", c.joint_dim, where);
  read_opt(j, "text_vocab", c.text_vocab, where);
  read_opt(j, "code_vocab", c.code_vocab, where);
  read_opt(j, "num_codebooks", c.num_codebooks, where);
  read_opt(j, "feature_dim", c.feature_dim, where);
  read_opt(j, "max_symbols_per_step", c.max_symbols_per_step, where);
  read_opt(j, "seed", c.seed, where);
}

std::int64_t param_count(const ModelConfig& c) {
  c.validate();
  using L = Linear<float>;
  const Index de = c.encoder.dim, dp = c.predictor.dim, dr = c.rch.dim;
  const Index vc = c.code_vocab, k = c.num_codebooks;
  const auto& gs = c.gst;

  Index gst = 0;
  Index in = c.feature_dim;
  for (int l = 0; l < gs.conv_layers; ++l) {
    gst += L::count(3 * in, gs.conv_channels, true);
    in = gs.conv_channels;
  }
  gst += L::count(in, 3 * gs.gru_dim, true) + L::count(gs.gru_dim, 3 * gs.gru_dim, true);
  gst += static_cast<Index>(gs.num_tokens) * gs.token_dim;
  gst += L::count(gs.gru_dim, gs.token_dim, true) + 3 * L::count(gs.token_dim, gs.token_dim, true);
  gst += L::count(gs.token_dim, de, true);

  const Index encoder = static_cast<Index>(c.text_vocab) * de +
                        TransformerStack<float>::count(c.encoder, de);
  const Index predictor = (vc + 1) * dp + TransformerStack<float>::count(c.predictor, 0);
  const Index joint = L::count(de, c.joint_dim, true) + L::count(dp, c.joint_dim, false) +
                      L::count(c.joint_dim, vc + 1, true);
  const Index rch = (k - 1) * vc * dr + (k - 1) * dr + L::count(dr + de, dr, true) +
                    TransformerStack<float>::count(c.rch, de) + L::count(dr, vc, true);
  return gst + encoder + predictor + joint + rch;
}

}  // namespace ttst
