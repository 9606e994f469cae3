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

#include "ttst/codec/rvq.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ttst/common/errors.h"
#include "ttst/numerics/rng.h"

namespace ttst {

void CodecSpec::validate() const {
  if (num_codebooks < 2) throw ConfigError("codec: need at least 2 codebooks");
  if (codebook_size < 2) throw ConfigError("codec: codebook_size must be >= 2");
  if (codebook_size > 65536) throw ConfigError("codec: codes must fit in u16");
  if (feature_dim < 1) throw ConfigError("codec: feature_dim must be >= 1");
  if (!(level_decay > 0.0 && level_decay < 1.0)) {
    throw ConfigError("codec: level_decay must be in (0, 1)");
  }
  if (feature_dim < 63) {
    const double patterns = std::ldexp(1.0, feature_dim);
    if (static_cast<double>(codebook_size) > patterns) {
      throw ConfigError("codec: codebook_size exceeds 2^feature_dim sign patterns");
    }
  }
}

std::vector<int> CodeGrid::column(int book) const {
  std::vector<int> out(static_cast<std::size_t>(frames_));
  for (int j = 0; j < frames_; ++j) out[static_cast<std::size_t>(j)] = at(j, book);
  return out;
}

void CodeGrid::set_column(int book, const std::vector<int>& values) {
  if (static_cast<int>(values.size()) != frames_) {
    throw DimensionError("code grid: column length mismatch");
  }
  for (int j = 0; j < frames_; ++j) at(j, book) = values[static_cast<std::size_t>(j)];
}

CodeGrid CodeGrid::leading_columns(int count) const {
  CodeGrid out(frames_, count);
  for (int j = 0; j < frames_; ++j) {
    for (int k = 0; k < count; ++k) out.at(j, k) = at(j, k);
  }
  return out;
}

void CodeGrid::validate(int vocab) const {
  if (frames_ < 1) throw ValidationError("code grid: no frames");
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i] < 0 || codes_[i] >= vocab) {
      throw ValidationError("code grid: code " + std::to_string(codes_[i]) +
                            " outside [0, " + std::to_string(vocab) + ")");
    }
  }
}

Codebooks rvq_init(const CodecSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Codebooks books;
  books.spec = spec;
  const int d = spec.feature_dim;
  for (int k = 0; k < spec.num_codebooks; ++k) {
    const double amp = 0.5 * std::pow(spec.level_decay, k);
    Mat<double> level = Mat<double>::Zero(spec.codebook_size, d);
    const int first = k == 0 ? 0 : 1;  // residual levels keep the zero entry
    std::vector<std::vector<bool>> used;
    for (int v = first; v < spec.codebook_size; ++v) {
      std::vector<bool> signs(static_cast<std::size_t>(d));
      do {
        for (int c = 0; c < d; ++c) signs[static_cast<std::size_t>(c)] = rng.uniform() < 0.5;
      } while (std::find(used.begin(), used.end(), signs) != used.end());
      used.push_back(signs);
      for (int c = 0; c < d; ++c) {
        level(v, c) = static_cast<float>(signs[static_cast<std::size_t>(c)] ? amp : -amp);
      }
    }
    books.levels.push_back(std::move(level));
  }
  return books;
}

CodeGrid rvq_encode(const Codebooks& books, const FeatureSeq& features) {
  const int k_levels = books.num_levels();
  if (k_levels == 0) throw ConfigError("rvq_encode: no codebooks");
  const Index d = books.levels[0].cols();
  if (features.cols() != d) {
    throw DimensionError("rvq_encode: feature dim " + std::to_string(features.cols()) +
                         " != codebook dim " + std::to_string(d));
  }
  CodeGrid grid(static_cast<int>(features.rows()), k_levels);
  Eigen::RowVectorXd residual(d);
  for (Index j = 0; j < features.rows(); ++j) {
    residual = features.row(j);
    for (int k = 0; k < k_levels; ++k) {
      const Mat<double>& book = books.levels[static_cast<std::size_t>(k)];
      Index best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (Index v = 0; v < book.rows(); ++v) {
        const double dist = (book.row(v) - residual).squaredNorm();
        if (dist < best_dist) {  // strict: ties keep the lowest index
          best_dist = dist;
          best = v;
        }
      }
      grid.at(static_cast<int>(j), k) = static_cast<int>(best);
      residual -= book.row(best);
    }
  }
  return grid;
}

FeatureSeq rvq_decode(const Codebooks& books, const CodeGrid& grid, int levels) {
  if (levels < 0 || levels > books.num_levels() || levels > grid.books()) {
    throw IndexError("rvq_decode: levels " + std::to_string(levels) + " out of range");
  }
  const Index d = books.levels.empty() ? 0 : books.levels[0].cols();
  FeatureSeq out = FeatureSeq::Zero(grid.frames(), d);
  for (int j = 0; j < grid.frames(); ++j) {
    for (int k = 0; k < levels; ++k) {
      const Mat<double>& book = books.levels[static_cast<std::size_t>(k)];
      const int c = grid.at(j, k);
      if (c < 0 || c >= book.rows()) {
        throw IndexError("rvq_decode: code " + std::to_string(c) + " at frame " +
                         std::to_string(j) + " level " + std::to_string(k) +
                         " out of range");
      }
      out.row(j) += book.row(c);
    }
  }
  return out;
}

double mean_squared_error(const FeatureSeq& a, const FeatureSeq& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("mse: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

Mat<double> flatten_codebooks(const Codebooks& books) {
  const auto& spec = books.spec;
  Mat<double> flat(static_cast<Index>(spec.num_codebooks) * spec.codebook_size,
                   spec.feature_dim);
  for (int k = 0; k < books.num_levels(); ++k) {
    flat.middleRows(static_cast<Index>(k) * spec.codebook_size, spec.codebook_size) =
        books.levels[static_cast<std::size_t>(k)];
  }
  return flat;
}

Codebooks unflatten_codebooks(const CodecSpec& spec, const Mat<double>& flat) {
  if (flat.rows() != static_cast<Index>(spec.num_codebooks) * spec.codebook_size ||
      flat.cols() != spec.feature_dim) {
    throw DimensionError("codebooks: flat matrix does not match codec spec");
  }
  Codebooks books;
  books.spec = spec;
  for (int k = 0; k < spec.num_codebooks; ++k) {
    books.levels.push_back(
        flat.middleRows(static_cast<Index>(k) * spec.codebook_size, spec.codebook_size));
  }
  return books;
}

}  // namespace ttst
