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

#include <functional>
#include <span>
#include <vector>

#include "ttst/numerics/tensor.h"

namespace ttst {

// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Eager tape for reverse-mode differentiation over row-major matrices.
//
// Every op computes its value immediately. When recording, it also pushes a
// closure that maps the node's output gradient onto its inputs; backward()
// replays the closures in reverse creation order, so gradient accumulation
// order is fixed. Param leaves reference the Param's storage and add their
// gradient into Param::grad at the end of backward().
//
// Sequences are stored one position per row; a vector is a 1 x d matrix.
template <typename T>
class Graph {
 public:
  using M = Mat<T>;
  using BackwardFn = std::function<void(Graph&, const M& out_grad)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(M value);
  Var param(Param<T>& p);

  const M& value(Var v) const;
  // Gradient of the last backward() target w.r.t. v (zeros if unreached).
  M grad(Var v) const;
  Index rows(Var v) const { return value(v).rows(); }
  Index cols(Var v) const { return value(v).cols(); }

  // x * w^T + b, with w stored [d_out x d_in] and b [1 x d_out].
  Var affine(Var x, Var w, Var b);
  Var affine(Var x, Var w);
  Var matmul(Var a, Var b);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // Broadcast a [1 x d] row over every row of a.
  Var add_row(Var a, Var row);
  Var mul_row(Var a, Var row);
  Var add_scalar(Var a, T c);
  Var scale(Var a, T c);

  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);

  // Per-row normalization to zero mean / unit variance, no affine part.
  Var layer_norm(Var x, T eps);
  Var log_softmax(Var logits);

  // Scaled dot-product attention over `heads` column blocks. q has Lq rows,
  // k and v have Lk >= Lq rows; with `causal`, query row r sits at absolute
  // position Lk - Lq + r and sees keys at positions <= its own.
  Var attention(Var q, Var k, Var v, int heads, bool causal);

  Var gather_rows(Var table, std::span<const int> ids);
  Var concat_cols(Var a, Var b);
  Var concat_rows(Var a, Var b);
  Var slice_rows(Var a, Index start, Index count);
  Var slice_cols(Var a, Index start, Index count);
  // Row i * rows(b) + j holds a_i + b_j.
  Var pairwise_sum(Var a, Var b);
  // 1-D convolution unfold: row o holds x[o*stride + t - pad] for t < kernel,
  // zero outside the sequence.
  Var im2col(Var x, int kernel, int stride, int pad);

  // Mean over rows of -log softmax(logits_r)[targets_r]; a 1 x 1 scalar.
  Var cross_entropy(Var logits, std::span<const int> targets);

  // Escape hatch for ops with hand-written derivatives (e.g. the transducer
  // loss): `backward` receives the output gradient and must accumulate into
  // its inputs through accumulate_grad().
  Var custom(M value, BackwardFn backward);
  void accumulate_grad(Var v, const M& g);

  void backward(Var target);

 private:
  struct Node {
    M value;
    const M* external = nullptr;
    M grad;
    Param<T>* param = nullptr;
    BackwardFn backward;
  };

  Var push(M value, BackwardFn backward);
  M& grad_ref(Var v);
  const Node& node(Var v) const;

  bool record_;
  std::vector<Node> nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

// Fixed sinusoidal position table, rows [offset, offset + length).
template <typename T>
Mat<T> sinusoidal_positions(Index length, Index dim, Index offset = 0);

}  // namespace ttst
