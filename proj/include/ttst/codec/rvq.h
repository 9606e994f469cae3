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

#include "ttst/numerics/tensor.h"

namespace ttst {

// Synthetic residual vector quantizer.
//
// Every codebook entry is a sign pattern scaled by the level amplitude
// 0.5 * level_decay^k; residual levels (k >= 1) reserve index 0 for the zero
// vector. With level_decay < 1/2 the tail of any decoded frame stays inside
// the quantization cell chosen at every level, so encode(decode(g)) == g for
// every grid, and the zero entry makes each level's error no worse than the
// previous one for any input.
struct CodecSpec {
  int num_codebooks = 4;
  int codebook_size = 64;
  int feature_dim = 8;
  double frame_rate = 75.0;  // nominal only
  double level_decay = 1.0 / 3.0;

  void validate() const;
};

// Frames x features, one frame per row.
using FeatureSeq = Mat<double>;

// T x K codes, frame-major: code(j, k) is codebook k at frame j.
class CodeGrid {
 public:
  CodeGrid() = default;
  CodeGrid(int frames, int books) : frames_(frames), books_(books),
      codes_(static_cast<std::size_t>(frames) * static_cast<std::size_t>(books), 0) {}

  int frames() const { return frames_; }
  int books() const { return books_; }
  int& at(int frame, int book) { return codes_[index(frame, book)]; }
  int at(int frame, int book) const { return codes_[index(frame, book)]; }
  std::vector<int> column(int book) const;
  void set_column(int book, const std::vector<int>& values);
  // Columns [0, count) as a frames x count grid.
  CodeGrid leading_columns(int count) const;
  const std::vector<int>& data() const { return codes_; }

  // Throws ValidationError unless T >= 1 and every code is in [0, vocab).
  void validate(int vocab) const;

  bool operator==(const CodeGrid&) const = default;

 private:
  std::size_t index(int frame, int book) const {
    return static_cast<std::size_t>(frame) * static_cast<std::size_t>(books_) +
           static_cast<std::size_t>(book);
  }

  int frames_ = 0;
  int books_ = 0;
  std::vector<int> codes_;
};

struct Codebooks {
  CodecSpec spec;
  std::vector<Mat<double>> levels;  // K entries of V_c x d_f

  int num_levels() const { return static_cast<int>(levels.size()); }
};

Codebooks rvq_init(const CodecSpec& spec, std::uint64_t seed);
CodeGrid rvq_encode(const Codebooks& books, const FeatureSeq& features);
FeatureSeq rvq_decode(const Codebooks& books, const CodeGrid& grid, int levels);

double mean_squared_error(const FeatureSeq& a, const FeatureSeq& b);

// Stacks all levels into a (K * V_c) x d_f matrix and back.
Mat<double> flatten_codebooks(const Codebooks& books);
Codebooks unflatten_codebooks(const CodecSpec& spec, const Mat<double>& flat);

}  // namespace ttst
