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
#include <span>
#include <string>
#include <vector>

#include "ttst/codec/rvq.h"
#include "ttst/common/json_util.h"
#include "ttst/model/tts_model.h"
#include "ttst/numerics/rng.h"
#include "ttst/rnnt/rnnt.h"
#include "ttst/text/bpe.h"

namespace ttst {

struct DecodeConfig {
  double p = 0.95;
  int max_symbols_per_step = 32;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const DecodeConfig& c);
void from_json(const Json& j, DecodeConfig& c, const std::string& where);

// Top-p sampling over a normalized log-distribution. Candidates are ranked by
// probability (ties by index) and the smallest prefix whose mass reaches p is
// kept. A single surviving candidate is returned without touching rng.
int nucleus_sample(std::span<const double> log_probs, double p, double temperature, Rng& rng);

// Renormalized support kept by nucleus_sample, as (index, probability).
std::vector<std::pair<int, double>> nucleus_support(std::span<const double> log_probs, double p,
                                                    double temperature);

struct FirstCodebook {
  std::vector<int> codes;
  AlignmentPath path;
};

// Label-looping decode: for each text position, sample from the joint until a
// blank (or max_symbols_per_step emissions), advancing the cached predictor on
// every emitted code. `enc` is the N x d_e encoder output.
template <typename T>
FirstCodebook decode_first_codebook(const TtsModel<T>& model, const Mat<T>& enc,
                                    const DecodeConfig& config);

// Greedy residual levels 1..K-1 from the realized alignment. Returns a
// T x K grid; T = 0 gives an empty grid without evaluating the head.
template <typename T>
CodeGrid decode_residual(const TtsModel<T>& model, const std::vector<int>& first,
                         const AlignmentPath& path, const Mat<T>& enc, const Mat<T>& speaker);

struct Synthesis {
  TokenSeq tokens;
  Mat<double> speaker;
  FirstCodebook first;
  CodeGrid codes;
  FeatureSeq features;

  int frames() const { return codes.frames(); }
};

// Speaker embedding and encoder output for already-tokenized text.
template <typename T>
Synthesis synthesize_tokens(const TtsModel<T>& model, const TokenSeq& tokens,
                            const FeatureSeq& ref, const Codebooks& books,
                            const DecodeConfig& config);

// Text to features. Throws InputError on empty text and propagates
// tokenization errors before any decoding happens.
template <typename T>
Synthesis synthesize(const std::string& text, const FeatureSeq& ref, const TtsModel<T>& model,
                     const BpeVocab& vocab, const Codebooks& books, const DecodeConfig& config);

}  // namespace ttst
