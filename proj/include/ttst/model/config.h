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

#include "ttst/common/json_util.h"
#include "ttst/numerics/layers.h"

namespace ttst {

struct GstConfig {
  int num_tokens = 32;
  int token_dim = 128;
  int conv_channels = 64;
  int conv_layers = 2;
  int gru_dim = 128;
  int heads = 4;

  void validate() const;
};

struct ModelConfig {
  StackConfig encoder{4, 128, 2, 512, 1};
  StackConfig predictor{2, 128, 4, 512, 1};
  StackConfig rch{4, 128, 2, 512, 1};
  int joint_dim = 128;
  GstConfig gst;
  int text_vocab = 64;
  int code_vocab = 64;
  int num_codebooks = 4;
  int feature_dim = 8;
  int max_symbols_per_step = 32;
  std::uint64_t seed = 0;

  void validate() const;

  // Shapes used by the acceptance run and the CLI defaults.
  static ModelConfig desk();
  // Full-size layer shapes: 8 codebooks of 1024 codes.
  static ModelConfig large();
  // d = 8, one layer per stack; for finite-difference checks.
  static ModelConfig tiny();
};

Json to_json(const StackConfig& c);
Json to_json(const GstConfig& c);
Json to_json(const ModelConfig& c);
// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const Json& j, StackConfig& c, const std::string& where);
void from_json(const Json& j, GstConfig& c, const std::string& where);
void from_json(const Json& j, ModelConfig& c, const std::string& where);

// Exact number of scalar parameters the model would allocate.
std::int64_t param_count(const ModelConfig& config);

}  // namespace ttst
