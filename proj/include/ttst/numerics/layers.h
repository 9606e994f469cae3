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

#include "ttst/numerics/graph.h"
#include "ttst/numerics/rng.h"
#include "ttst/numerics/tensor.h"

namespace ttst {

enum class Init { kUniform, kZero, kOne };

// Creates a Param initialized with U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zeros
// or ones.
template <typename T>
Param<T>& make_param(ParamStore<T>& store, const std::string& name, Index rows, Index cols,
                     Init init, Index fan_in, Rng& rng);

// y = x W^T + b, W stored [out x in].
template <typename T>
struct Linear {
  Param<T>* weight = nullptr;
  Param<T>* bias = nullptr;
  Index in = 0;
  Index out = 0;

  static Linear create(ParamStore<T>& store, const std::string& name, Index in, Index out,
                       bool bias, Rng& rng, Init init = Init::kUniform);
  static Index count(Index in, Index out, bool bias) { return in * out + (bias ? out : 0); }

  Var operator()(Graph<T>& g, Var x) const;
  // Inference without a tape.
  Mat<T> apply(const Mat<T>& x) const;
};

// LayerNorm whose scale and shift come from a conditioning vector s:
// gamma(s) = 1 + Linear_g(s), beta(s) = Linear_b(s), both zero-initialized.
// With cond_dim == 0 it is a plain LayerNorm with a learned gain and bias.
template <typename T>
struct Norm {
  static constexpr double kEps = 1e-5;

  Index dim = 0;
  Index cond_dim = 0;
  Linear<T> to_gamma;
  Linear<T> to_beta;
  Param<T>* gain = nullptr;
  Param<T>* shift = nullptr;

  static Norm create(ParamStore<T>& store, const std::string& name, Index dim, Index cond_dim,
                     Rng& rng);
  static Index count(Index dim, Index cond_dim) {
    return cond_dim > 0 ? 2 * Linear<T>::count(cond_dim, dim, true) : 2 * dim;
  }

  // `cond` is a 1 x cond_dim row; ignored for plain norms.
  Var operator()(Graph<T>& g, Var x, Var cond) const;
};

// Keys and values of every position seen so far, per layer.
template <typename T>
struct KvCache {
  std::vector<Mat<T>> keys;
  std::vector<Mat<T>> values;
  Index length = 0;

  void reset(std::size_t layers) {
    keys.assign(layers, Mat<T>());
    values.assign(layers, Mat<T>());
    length = 0;
  }
};

template <typename T>
struct MultiHeadAttention {
  Index dim = 0;
  int heads = 1;
  Linear<T> q, k, v, o;

  static MultiHeadAttention create(ParamStore<T>& store, const std::string& name, Index dim,
                                   int heads, Rng& rng);
  static Index count(Index dim) { return 4 * Linear<T>::count(dim, dim, true); }

  Var operator()(Graph<T>& g, Var x, bool causal) const;
  // Appends the rows of x (new positions) to the cache for one layer and
  // attends causally over everything cached.
  Var incremental(Graph<T>& g, Var x, Mat<T>& keys, Mat<T>& values) const;
};

// Two-layer position-wise network. With kernel > 1 both layers are 1-D
// convolutions over time ("same" padding).
template <typename T>
struct FeedForward {
  Index dim = 0;
  Index hidden = 0;
  int kernel = 1;
  Linear<T> up, down;

  static FeedForward create(ParamStore<T>& store, const std::string& name, Index dim,
                            Index hidden, int kernel, Rng& rng);
  static Index count(Index dim, Index hidden, int kernel) {
    return Linear<T>::count(dim * kernel, hidden, true) +
           Linear<T>::count(hidden * kernel, dim, true);
  }

  Var operator()(Graph<T>& g, Var x) const;
};

struct StackConfig {
  int layers = 4;
  int dim = 128;
  int heads = 2;
  int ff_dim = 512;
  int ff_kernel = 1;

  void validate(const char* what) const;
};

// Pre-norm Transformer stack with a final norm.
template <typename T>
struct TransformerStack {
  struct Block {
    Norm<T> norm_attn;
    MultiHeadAttention<T> attn;
    Norm<T> norm_ff;
    FeedForward<T> ff;
  };

  StackConfig config;
  bool causal = false;
  std::vector<Block> blocks;
  Norm<T> final_norm;

  static TransformerStack create(ParamStore<T>& store, const std::string& name,
                                 const StackConfig& config, Index cond_dim, bool causal,
                                 Rng& rng);
  static Index count(const StackConfig& config, Index cond_dim);

  Var operator()(Graph<T>& g, Var x, Var cond) const;
  // Processes new trailing positions against the cache. Only valid for causal
  // stacks with ff_kernel == 1.
  Var incremental(Graph<T>& g, Var x, Var cond, KvCache<T>& cache) const;
};

}  // namespace ttst
