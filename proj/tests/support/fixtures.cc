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

#include "fixtures.h"

namespace ttst::testing {

SmallCorpus tiny_corpus(const std::string& dir, int sentences, std::uint64_t seed) {
  const ModelConfig m = ModelConfig::tiny();
  CodecSpec spec;
  spec.num_codebooks = m.num_codebooks;
  spec.codebook_size = m.code_vocab;
  spec.feature_dim = m.feature_dim;
  const auto lines = random_sentences(sentences, seed);
  SmallCorpus c;
  c.vocab = BpeVocab::characters(lines);
  c.books = rvq_init(spec, seed);
  CorpusOptions opt;
  opt.seed = seed;
  corpus_generate(c.vocab, lines, default_speakers(2, spec.feature_dim, seed), c.books, dir, opt);
  c.utterances = load_utterances(dir + "/manifest.jsonl", c.vocab);
  return c;
}

ModelConfig tiny_model_for(const SmallCorpus& corpus) {
  ModelConfig m = ModelConfig::tiny();
  m.text_vocab = corpus.vocab.size();
  return m;
}

}  // namespace ttst::testing
