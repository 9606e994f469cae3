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
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttst/cli/run_config.h"
#include "ttst/codec/corpus.h"
#include "ttst/common/errors.h"
#include "ttst/model/checkpoint.h"
#include "ttst/model/tts_model.h"
#include "ttst/runtime/eval.h"

namespace ttst {

// Decode produced no frames (exit code 5).
class DegenerateOutputError : public Error {
 public:
  using Error::Error;
};

// Maps an exception to the process exit code: 2 usage/config, 3 I/O,
// 4 numerical failure, 5 degenerate output, 1 anything else.
int exit_code_for(const std::exception& e);

// A trained model plus everything needed to run it, as stored in a checkpoint.
struct Bundle {
  RunConfig config;
  std::string config_hash;
  BpeVocab vocab;
  Codebooks books;
  std::unique_ptr<TtsModel<float>> model;
  std::int64_t step = 0;
};

Checkpoint make_checkpoint(const RunConfig& config, const BpeVocab& vocab, const Codebooks& books,
                           const TtsModel<float>& model, std::int64_t step);
Bundle load_bundle(const std::string& ckpt_path);

struct DatagenArgs {
  std::string config;  // optional
  std::string out_dir;
  std::optional<int> sentences;
  std::optional<int> speakers;
  std::optional<std::uint64_t> seed;
};
CorpusStats cmd_datagen(const DatagenArgs& args, std::ostream& out);

struct TrainArgs {
  std::string config;  // optional
  std::string data;
  std::string out;
  std::string resume;
  std::optional<std::int64_t> until;  // stop after this step
};
// Returns the step reached.
std::int64_t cmd_train(const TrainArgs& args, std::ostream& out);

struct SynthArgs {
  std::string ckpt;
  std::string text;
  std::string ref;
  std::string out;  // writes <out>.ttsf and <out>.ttsc
  double p = 0.95;
  std::uint64_t seed = 0;
};
Synthesis cmd_synth(const SynthArgs& args, std::ostream& out);

struct AlignArgs {
  std::string ckpt;
  std::string manifest_entry;  // "<manifest>#<id>"
  std::string text;
  std::string codes;
  std::string ref;
};
OrderedJson cmd_align(const AlignArgs& args, std::ostream& out);

// Best path over a joint grid as {"path", "frame_to_pos", "dwell", "log_prob"}.
OrderedJson alignment_report(const JointLogProbGrid& grid, std::span<const int> target);

struct EvalArgs {
  std::string ckpt;
  std::string manifest;
  std::string split;
  std::uint64_t seed = 0;
  std::optional<double> p;
  bool oracle = false;
};
EvalReport cmd_eval(const EvalArgs& args, std::ostream& out);

// Parses argv-style arguments (without the program name), runs the
// subcommand, and returns the exit code. Errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttst
