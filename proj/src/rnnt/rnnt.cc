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

#include "ttst/rnnt/rnnt.h"

#include <cmath>
#include <functional>
#include <limits>

#include "ttst/common/errors.h"

namespace ttst {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const JointLogProbGrid& grid, std::span<const int> target) {
  if (grid.positions() < 1) throw ValidationError("rnnt: need at least one text position");
  if (static_cast<int>(target.size()) != grid.frames()) {
    throw ValidationError("rnnt: target length " + std::to_string(target.size()) +
                          " != grid frames " + std::to_string(grid.frames()));
  }
  for (int y : target) {
    if (y < 0 || y >= grid.vocab()) {
      throw ValidationError("rnnt: target symbol " + std::to_string(y) + " out of range");
    }
  }
  grid.validate();
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

JointLogProbGrid::JointLogProbGrid(int positions, int frames, int vocab)
    : positions_(positions), frames_(frames), vocab_(vocab),
      data_(Mat<double>::Zero(static_cast<Index>(positions) * (frames + 1), vocab + 1)) {
  if (positions < 0 || frames < 0 || vocab < 1) {
    throw DimensionError("joint grid: invalid shape");
  }
}

JointLogProbGrid JointLogProbGrid::from_logits(int positions, int frames,
                                               const Mat<double>& logits) {
  if (logits.rows() != static_cast<Index>(positions) * (frames + 1) || logits.cols() < 2) {
    throw DimensionError("joint grid: logits have " + std::to_string(logits.rows()) +
                         " rows, expected " +
                         std::to_string(static_cast<Index>(positions) * (frames + 1)));
  }
  JointLogProbGrid g(positions, frames, static_cast<int>(logits.cols()) - 1);
  for (Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    g.data_.row(r) = logits.row(r).array() - lse;
  }
  return g;
}

void JointLogProbGrid::validate(double tol) const {
  for (Index r = 0; r < data_.rows(); ++r) {
    const double mx = data_.row(r).maxCoeff();
    const double lse = mx + std::log((data_.row(r).array() - mx).exp().sum());
    if (!(std::abs(lse) <= tol)) {
      throw ValidationError("joint grid: cell " + std::to_string(r) +
                            " is not normalized (log-sum-exp " + std::to_string(lse) + ")");
    }
  }
}

RnntResult rnnt_loss(const JointLogProbGrid& grid, std::span<const int> target) {
  check_inputs(grid, target);
  const int n = grid.positions();
  const int t = grid.frames();
  const int blank = grid.blank();
  RnntResult res;
  Lattice& lat = res.lattice;
  lat.positions = n;
  lat.frames = t;
  lat.log_alpha = Mat<double>::Constant(n + 1, t + 1, kNegInf);
  lat.log_beta = Mat<double>::Constant(n + 1, t + 1, kNegInf);

  lat.log_alpha(0, 0) = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= t; ++j) {
      if (i == 0 && j == 0) continue;
      double a = kNegInf;
      if (i > 0) a = lat.log_alpha(i - 1, j) + grid.at(i - 1, j, blank);
      if (j > 0 && i < n) {
        a = log_add_exp(a, lat.log_alpha(i, j - 1) + grid.at(i, j - 1, target[j - 1]));
      }
      lat.log_alpha(i, j) = a;
    }
  }

  lat.log_beta(n, t) = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    for (int j = t; j >= 0; --j) {
      double b = grid.at(i, j, blank) + lat.log_beta(i + 1, j);
      if (j < t) b = log_add_exp(b, grid.at(i, j, target[j]) + lat.log_beta(i, j + 1));
      lat.log_beta(i, j) = b;
    }
  }

  lat.log_prob_forward = lat.log_alpha(n, t);
  lat.log_prob_backward = lat.log_beta(0, 0);
  res.loss = -lat.log_prob_forward;
  return res;
}

Mat<double> rnnt_grad(const JointLogProbGrid& grid, std::span<const int> target,
                      const Lattice& lattice) {
  if (lattice.positions != grid.positions() || lattice.frames != grid.frames() ||
      lattice.log_alpha.rows() != grid.positions() + 1 ||
      lattice.log_alpha.cols() != grid.frames() + 1) {
    throw ValidationError("rnnt_grad: lattice does not match grid");
  }
  if (static_cast<int>(target.size()) != grid.frames()) {
    throw ValidationError("rnnt_grad: target length does not match grid");
  }
  const double log_z = lattice.log_prob_forward;
  if (!std::isfinite(log_z)) {
    throw NumericalError("rnnt_grad: target has zero probability");
  }
  const int n = grid.positions();
  const int t = grid.frames();
  const int blank = grid.blank();
  Mat<double> g = Mat<double>::Zero(grid.data().rows(), grid.data().cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= t; ++j) {
      const double a = lattice.log_alpha(i, j);
      if (a == kNegInf) continue;
      const double occ_blank =
          std::exp(a + grid.at(i, j, blank) + lattice.log_beta(i + 1, j) - log_z);
      const double occ_emit =
          j < t ? std::exp(a + grid.at(i, j, target[j]) + lattice.log_beta(i, j + 1) - log_z)
                : 0.0;
      const Index r = static_cast<Index>(i) * (t + 1) + j;
      g.row(r) = grid.data().row(r).array().exp() * (occ_blank + occ_emit);
      g(r, blank) -= occ_blank;
      if (j < t) g(r, target[j]) -= occ_emit;
    }
  }
  return g;
}

int AlignmentPath::positions() const {
  int n = 0;
  for (auto s : path) n += s == PathSymbol::kBlank;
  return n;
}

int AlignmentPath::frames() const { return static_cast<int>(path.size()) - positions(); }

std::string AlignmentPath::path_string() const {
  std::string s;
  s.reserve(path.size());
  for (auto p : path) s += static_cast<char>(p);
  return s;
}

AlignmentPath AlignmentPath::from_string(const std::string& s) {
  AlignmentPath p;
  for (char c : s) {
    if (c != 'b' && c != 'e') throw ValidationError("alignment path: bad symbol '" + std::string(1, c) + "'");
    p.path.push_back(static_cast<PathSymbol>(c));
  }
  p.frame_to_pos = frame_map(p.path);
  return p;
}

void AlignmentPath::validate() const {
  const auto f = frame_map(path);
  if (f != frame_to_pos) throw ValidationError("alignment path: frame map out of sync");
}

std::vector<int> frame_map(std::span<const PathSymbol> path) {
  if (path.empty() || path.back() != PathSymbol::kBlank) {
    throw ValidationError("alignment path must be nonempty and end with a blank");
  }
  std::vector<int> f;
  int blanks = 0;
  for (auto s : path) {
    if (s == PathSymbol::kBlank) {
      ++blanks;
    } else if (s == PathSymbol::kEmit) {
      f.push_back(blanks);
    } else {
      throw ValidationError("alignment path: unknown symbol");
    }
  }
  return f;
}

std::vector<int> frame_map(const AlignmentPath& path) { return frame_map(path.path); }

AlignmentPath best_path(const JointLogProbGrid& grid, std::span<const int> target) {
  check_inputs(grid, target);
  const int n = grid.positions();
  const int t = grid.frames();
  const int blank = grid.blank();
  // best[i][j]: best log-probability of completing the path from node (i, j).
  Mat<double> best = Mat<double>::Constant(n + 1, t + 1, kNegInf);
  best(n, t) = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    for (int j = t; j >= 0; --j) {
      double b = grid.at(i, j, blank) + best(i + 1, j);
      if (j < t) b = std::max(b, grid.at(i, j, target[j]) + best(i, j + 1));
      best(i, j) = b;
    }
  }
  if (best(0, 0) == kNegInf) throw NumericalError("best_path: no path has nonzero probability");

  AlignmentPath out;
  int i = 0, j = 0;
  while (i < n) {
    const double via_blank = grid.at(i, j, blank) + best(i + 1, j);
    const double via_emit =
        j < t ? grid.at(i, j, target[j]) + best(i, j + 1) : kNegInf;
    if (via_blank >= via_emit) {
      out.path.push_back(PathSymbol::kBlank);
      ++i;
    } else {
      out.path.push_back(PathSymbol::kEmit);
      out.frame_to_pos.push_back(i);
      ++j;
    }
  }
  return out;
}

double path_log_prob(const JointLogProbGrid& grid, std::span<const int> target,
                     const AlignmentPath& path) {
  int i = 0, j = 0;
  double lp = 0.0;
  for (auto s : path.path) {
    if (i >= grid.positions()) throw ValidationError("path_log_prob: path overruns text");
    if (s == PathSymbol::kBlank) {
      lp += grid.at(i, j, grid.blank());
      ++i;
    } else {
      if (j >= grid.frames()) throw ValidationError("path_log_prob: path overruns frames");
      lp += grid.at(i, j, target[j]);
      ++j;
    }
  }
  if (i != grid.positions() || j != grid.frames()) {
    throw ValidationError("path_log_prob: path does not end at the final node");
  }
  return lp;
}

std::vector<ScoredPath> enumerate_paths(const JointLogProbGrid& grid,
                                        std::span<const int> target) {
  const int n = grid.positions();
  const int t = grid.frames();
  if (n + t > 12) throw ValidationError("enumerate_paths: N + T > 12 refused");
  check_inputs(grid, target);
  const int blank = grid.blank();
  std::vector<ScoredPath> out;
  std::vector<PathSymbol> prefix;
  std::function<void(int, int, double)> walk = [&](int i, int j, double lp) {
    if (i == n) {
      if (j == t) {
        ScoredPath sp;
        sp.path.path = prefix;
        sp.path.frame_to_pos = frame_map(prefix);
        sp.log_prob = lp;
        out.push_back(std::move(sp));
      }
      return;
    }
    prefix.push_back(PathSymbol::kBlank);
    walk(i + 1, j, lp + grid.at(i, j, blank));
    prefix.pop_back();
    if (j < t) {
      prefix.push_back(PathSymbol::kEmit);
      walk(i, j + 1, lp + grid.at(i, j, target[j]));
      prefix.pop_back();
    }
  };
  walk(0, 0, 0.0);
  return out;
}

}  // namespace ttst
