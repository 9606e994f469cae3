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

#include "ttst/cli/run_config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ttst/numerics/rng.h"

namespace ttst {

void DataConfig::validate() const {
  if (sentences < 1) throw ConfigError("data.sentences must be >= 1");
  if (speakers < 1) throw ConfigError("data.speakers must be >= 1");
  if (tokenizer != "bpe" && tokenizer != "char") {
    throw ConfigError("data.tokenizer must be \"bpe\" or \"char\"");
  }
  if (heldout < 0) throw ConfigError("data.heldout must be >= 0");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("data.jitter must be in [0, 1)");
}

Json to_json(const CodecSpec& c) {
  return Json{{"num_codebooks", c.num_codebooks},
              {"codebook_size", c.codebook_size},
              {"feature_dim", c.feature_dim},
              {"frame_rate", c.frame_rate},
              {"level_decay", c.level_decay}};
}

void from_json(const Json& j, CodecSpec& c, const std::string& where) {
  require_keys(j, {"num_codebooks", "codebook_size", "feature_dim", "frame_rate", "level_decay"},
               where);
  read_opt(j, "num_codebooks", c.num_codebooks, where);
  read_opt(j, "codebook_size", c.codebook_size, where);
  read_opt(j, "feature_dim", c.feature_dim, where);
  read_opt(j, "frame_rate", c.frame_rate, where);
  read_opt(j, "level_decay", c.level_decay, where);
}

namespace {

Json data_json(const DataConfig& d) {
  return Json{{"sentences", d.sentences}, {"speakers", d.speakers}, {"seed", d.seed},
              {"vocab_size", d.vocab_size}, {"tokenizer", d.tokenizer}, {"heldout", d.heldout},
              {"jitter", d.jitter}};
}

void data_from_json(const Json& j, DataConfig& d) {
  const std::string w = "data";
  require_keys(j, {"sentences", "speakers", "seed", "vocab_size", "tokenizer", "heldout", "jitter"},
               w);
  read_opt(j, "sentences", d.sentences, w);
  read_opt(j, "speakers", d.speakers, w);
  read_opt(j, "seed", d.seed, w);
  read_opt(j, "vocab_size", d.vocab_size, w);
  read_opt(j, "tokenizer", d.tokenizer, w);
  read_opt(j, "heldout", d.heldout, w);
  read_opt(j, "jitter", d.jitter, w);
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  decode.validate();
  codec.validate();
  data.validate();
  if (model.num_codebooks != codec.num_codebooks || model.code_vocab != codec.codebook_size ||
      model.feature_dim != codec.feature_dim) {
    throw ConfigError(
        "model.num_codebooks/code_vocab/feature_dim must equal "
        "codec.num_codebooks/codebook_size/feature_dim");
  }
}

Json RunConfig::to_json() const {
  return Json{{"model", ttst::to_json(model)},
              {"train", ttst::to_json(train)},
              {"decode", ttst::to_json(decode)},
              {"codec", ttst::to_json(codec)},
              {"data", data_json(data)}};
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  require_keys(j, {"model", "train", "decode", "codec", "data"}, "config");
  if (j.contains("model")) ttst::from_json(j["model"], c.model, "model");
  if (j.contains("train")) ttst::from_json(j["train"], c.train, "train");
  if (j.contains("decode")) ttst::from_json(j["decode"], c.decode, "decode");
  if (j.contains("codec")) ttst::from_json(j["codec"], c.codec, "codec");
  if (j.contains("data")) data_from_json(j["data"], c.data);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open config");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return from_json(j);
}

std::string RunConfig::hash() const {
  const std::string canon = to_json().dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canon.data(), canon.size())));
  return buf;
}

}  // namespace ttst
