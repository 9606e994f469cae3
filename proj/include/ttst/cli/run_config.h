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
#include <string>

#include "ttst/codec/rvq.h"
#include "ttst/common/json_util.h"
#include "ttst/model/config.h"
#include "ttst/runtime/decode.h"
#include "ttst/runtime/train.h"

namespace ttst {

struct DataConfig {
  int sentences = 50;
  int speakers = 2;
  std::uint64_t seed = 0;
  int vocab_size = 256;
  std::string tokenizer = "bpe";  // "bpe" or "char"
  int heldout = 0;
  double jitter = 0.25;

  void validate() const;
};

// Everything a run depends on, as one JSON document:
//   {"model": {...}, "train": {...}, "decode": {...}, "codec": {...}, "data": {...}}
// Missing keys take defaults; unknown keys are rejected.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DecodeConfig decode;
  CodecSpec codec;
  DataConfig data;

  void validate() const;
  Json to_json() const;
  static RunConfig from_json(const Json& j);
  static RunConfig load(const std::string& path);
  // Hex FNV-1a of the canonical JSON.
  std::string hash() const;
};

Json to_json(const CodecSpec& c);
void from_json(const Json& j, CodecSpec& c, const std::string& where);

}  // namespace ttst
