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
#include <vector>

#include "ttst/codec/rvq.h"
#include "ttst/text/bpe.h"

namespace ttst {

struct ToySpeaker {
  std::string id;
  double duration_factor = 2.0;  // frames per token, in [1, 8]
  std::vector<double> timbre_offset;

  void validate(int feature_dim) const;
};

// Frame-level stand-in for codec encoder latents. Each token id owns a fixed
// base vector; token i lasts round(duration_factor * (1 + u_i)) frames with
// u_i ~ U(-jitter, jitter) drawn from `seed`, and the speaker's timbre offset
// is added to every frame. Values are rounded to f32 so they survive a TTSF
// round trip unchanged.
FeatureSeq synth_features(const TokenSeq& tokens, const ToySpeaker& speaker,
                          int feature_dim, std::uint64_t seed, double jitter = 0.25);

// Per-token frame counts used by synth_features for the same arguments.
std::vector<int> synth_durations(const TokenSeq& tokens, const ToySpeaker& speaker,
                                 std::uint64_t seed, double jitter = 0.25);

// Speaker i gets duration factor 2 (even i) or 4 (odd i) and a random offset.
std::vector<ToySpeaker> default_speakers(int count, int feature_dim, std::uint64_t seed);

// Sentences drawn from a small random lexicon over the letters a-h.
std::vector<std::string> random_sentences(int count, std::uint64_t seed);

struct CorpusOptions {
  std::uint64_t seed = 0;
  double jitter = 0.25;
  int heldout = 0;  // extra sentences written to heldout.jsonl
};

struct CorpusStats {
  int utterances = 0;
  int heldout = 0;
  long total_frames = 0;
  int min_frames = 0;
  int max_frames = 0;
};

// Writes a corpus into `out_dir`:
//   manifest.jsonl     {"id","text","speaker","codes","ref"} per utterance
//   heldout.jsonl      same schema, held-out sentences
//   codes/<id>.ttsc    ground-truth code grids
//   feats/<id>.ttsf    ground-truth features
//   refs/<speaker>.ttsf  one reference per speaker
//   vocab.bpe, codebooks.ttsf, corpus.json
// Speakers alternate over utterances. Paths inside manifests are relative to
// the manifest's directory.
CorpusStats corpus_generate(const BpeVocab& vocab, const std::vector<std::string>& sentences,
                            const std::vector<ToySpeaker>& speakers, const Codebooks& books,
                            const std::string& out_dir, const CorpusOptions& options);

struct ManifestEntry {
  std::string id;
  std::string text;
  std::string speaker;
  std::string codes;  // relative to the manifest directory
  std::string ref;
};

std::vector<ManifestEntry> read_manifest(const std::string& path);

// A manifest entry with its files loaded.
struct Utterance {
  ManifestEntry entry;
  TokenSeq tokens;
  CodeGrid codes;
  FeatureSeq ref;
  FeatureSeq features;  // empty if feats/<id>.ttsf is absent
};

std::vector<Utterance> load_utterances(const std::string& manifest_path, const BpeVocab& vocab);

// Corpus-level metadata stored in corpus.json.
struct CorpusInfo {
  CodecSpec codec;
  std::vector<ToySpeaker> speakers;
  std::uint64_t seed = 0;
};

CorpusInfo read_corpus_info(const std::string& corpus_dir);
Codebooks read_codebooks(const std::string& corpus_dir);

}  // namespace ttst
