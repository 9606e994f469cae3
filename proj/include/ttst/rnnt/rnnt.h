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

#include <span>
#include <string>
#include <vector>

#include "ttst/numerics/tensor.h"

namespace ttst {

// Log-probabilities of the joint network over every lattice cell.
//
// The encoder axis is the text (positions i < N) and the emission axis is
// the code frames (j <= T). Cell (i, j) holds a normalized distribution over
// `vocab` codes plus the blank, which sits at index `vocab`. Blank moves to
// the next text position; an emission moves to the next frame.
class JointLogProbGrid {
 public:
  JointLogProbGrid() = default;
  JointLogProbGrid(int positions, int frames, int vocab);

  // Log-softmax of raw logits laid out as (positions * (frames + 1)) rows of
  // (vocab + 1) columns, row i * (frames + 1) + j.
  static JointLogProbGrid from_logits(int positions, int frames, const Mat<double>& logits);

  int positions() const { return positions_; }
  int frames() const { return frames_; }
  int vocab() const { return vocab_; }
  int blank() const { return vocab_; }

  double& at(int i, int j, int v) { return data_(row(i, j), v); }
  double at(int i, int j, int v) const { return data_(row(i, j), v); }
  auto cell(int i, int j) { return data_.row(row(i, j)); }
  auto cell(int i, int j) const { return data_.row(row(i, j)); }
  const Mat<double>& data() const { return data_; }
  Mat<double>& data() { return data_; }

  // Throws ValidationError if any cell's log-sum-exp is off by more than tol.
  void validate(double tol = 1e-3) const;

 private:
  Index row(int i, int j) const { return static_cast<Index>(i) * (frames_ + 1) + j; }

  int positions_ = 0;
  int frames_ = 0;
  int vocab_ = 0;
  Mat<double> data_;
};

// Forward/backward log-variables over (N + 1) x (T + 1) nodes. Node (i, j)
// means i text positions consumed and j frames emitted; row N is reached
// only by a final blank.
struct Lattice {
  int positions = 0;
  int frames = 0;
  Mat<double> log_alpha;
  Mat<double> log_beta;
  double log_prob_forward = 0.0;
  double log_prob_backward = 0.0;

  double log_prob() const { return log_prob_forward; }
};

struct RnntResult {
  double loss = 0.0;  // -log P(target | text), nats
  Lattice lattice;
};

RnntResult rnnt_loss(const JointLogProbGrid& grid, std::span<const int> target);

// d loss / d logits for every cell, same layout as JointLogProbGrid::data().
// The grid's rows are treated as logits whose softmax is the cell
// distribution.
Mat<double> rnnt_grad(const JointLogProbGrid& grid, std::span<const int> target,
                      const Lattice& lattice);

enum class PathSymbol : char { kBlank = 'b', kEmit = 'e' };

// One monotonic route through the lattice.
struct AlignmentPath {
  std::vector<PathSymbol> path;  // N blanks and T emits, ending in a blank
  std::vector<int> frame_to_pos;  // f(j), non-decreasing, < N

  int positions() const;
  int frames() const;
  std::string path_string() const;
  static AlignmentPath from_string(const std::string& s);
  // Throws ValidationError on a malformed path.
  void validate() const;
};

// Viterbi path. Ties prefer the blank at the earliest point of divergence.
AlignmentPath best_path(const JointLogProbGrid& grid, std::span<const int> target);

// f(j) = number of blanks preceding the j-th emission.
std::vector<int> frame_map(const AlignmentPath& path);
std::vector<int> frame_map(std::span<const PathSymbol> path);

// Sum of log-probabilities along `path`.
double path_log_prob(const JointLogProbGrid& grid, std::span<const int> target,
                     const AlignmentPath& path);

struct ScoredPath {
  AlignmentPath path;
  double log_prob = 0.0;
};

// Every valid path with its exact log-probability. Refuses N + T > 12.
std::vector<ScoredPath> enumerate_paths(const JointLogProbGrid& grid,
                                        std::span<const int> target);

double log_add_exp(double a, double b);

}  // namespace ttst
