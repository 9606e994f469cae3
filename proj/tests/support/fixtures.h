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

#include <string>
#include <vector>

#include "ttst/codec/corpus.h"
#include "ttst/model/config.h"

namespace ttst::testing {

// A generated corpus loaded back from disk.
struct SmallCorpus {
  BpeVocab vocab;
  Codebooks books;
  std::vector<Utterance> utterances;
};

// Character-level corpus whose codec matches ModelConfig::tiny().
SmallCorpus tiny_corpus(const std::string& dir, int sentences, std::uint64_t seed);

// Tiny model config sized for tiny_corpus.
ModelConfig tiny_model_for(const SmallCorpus& corpus);

}  // namespace ttst::testing
