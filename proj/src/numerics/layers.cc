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

#include "ttst/numerics/layers.h"

#include <cmath>

#include "ttst/common/errors.h"

namespace ttst {

template <typename T>
Param<T>& make_param(ParamStore<T>& store, const std::string& name, Index rows, Index cols,
                     Init init, Index fan_in, Rng& rng) {
  Param<T>& p = store.create(name, rows, cols);
  switch (init) {
    case Init::kZero:
      p.value.setZero();
      break;
    case Init::kOne:
      p.value.setOnes();
      break;
    case Init::kUniform: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (Index i = 0; i < p.value.size(); ++i) {
        p.value.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
      }
      break;
    }
  }
  return p;
}

template <typename T>
Linear<T> Linear<T>::create(ParamStore<T>& store, const std::string& name, Index in, Index out,
                            bool bias, Rng& rng, Init init) {
  if (in <= 0 || out <= 0) throw ConfigError(name + ": linear dims must be positive");
  Linear l;
  l.in = in;
  l.out = out;
  l.weight = &make_param(store, name + ".weight", out, in, init, in, rng);
  if (bias) {
    l.bias = &make_param(store, name + ".bias", 1, out,
                         init == Init::kZero ? Init::kZero : Init::kUniform, in, rng);
  }
  return l;
}

template <typename T>
Var Linear<T>::operator()(Graph<T>& g, Var x) const {
  if (bias != nullptr) return g.affine(x, g.param(*weight), g.param(*bias));
  return g.affine(x, g.param(*weight));
}

template <typename T>
Mat<T> Linear<T>::apply(const Mat<T>& x) const {
  if (x.cols() != in) throw DimensionError("linear: input has " + std::to_string(x.cols()) +
                                           " columns, expected " + std::to_string(in));
  Mat<T> y = x * weight->value.transpose();
  if (bias != nullptr) y.rowwise() += bias->value.row(0);
  return y;
}

template <typename T>
Norm<T> Norm<T>::create(ParamStore<T>& store, const std::string& name, Index dim,
                        Index cond_dim, Rng& rng) {
  if (dim < 2) throw ConfigError(name + ": norm dim must be at least 2");
  Norm n;
  n.dim = dim;
  n.cond_dim = cond_dim;
  if (cond_dim > 0) {
    n.to_gamma = Linear<T>::create(store, name + ".gamma", cond_dim, dim, true, rng, Init::kZero);
    n.to_beta = Linear<T>::create(store, name + ".beta", cond_dim, dim, true, rng, Init::kZero);
  } else {
    n.gain = &make_param(store, name + ".gain", 1, dim, Init::kOne, dim, rng);
    n.shift = &make_param(store, name + ".shift", 1, dim, Init::kZero, dim, rng);
  }
  return n;
}

template <typename T>
Var Norm<T>::operator()(Graph<T>& g, Var x, Var cond) const {
  Var y = g.layer_norm(x, static_cast<T>(kEps));
  if (cond_dim > 0) {
    if (!cond.valid()) throw ValidationError("conditional norm needs a conditioning vector");
    Var gamma = g.add_scalar(to_gamma(g, cond), T(1));
    return g.add_row(g.mul_row(y, gamma), to_beta(g, cond));
  }
  return g.add_row(g.mul_row(y, g.param(*gain)), g.param(*shift));
}

template <typename T>
MultiHeadAttention<T> MultiHeadAttention<T>::create(ParamStore<T>& store,
                                                    const std::string& name, Index dim,
                                                    int heads, Rng& rng) {
  if (heads <= 0 || dim % heads != 0) {
    throw ConfigError(name + ": dim " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  MultiHeadAttention a;
  a.dim = dim;
  a.heads = heads;
  a.q = Linear<T>::create(store, name + ".q", dim, dim, true, rng);
  a.k = Linear<T>::create(store, name + ".k", dim, dim, true, rng);
  a.v = Linear<T>::create(store, name + ".v", dim, dim, true, rng);
  a.o = Linear<T>::create(store, name + ".o", dim, dim, true, rng);
  return a;
}

template <typename T>
Var MultiHeadAttention<T>::operator()(Graph<T>& g, Var x, bool causal) const {
  return o(g, g.attention(q(g, x), k(g, x), v(g, x), heads, causal));
}

template <typename T>
Var MultiHeadAttention<T>::incremental(Graph<T>& g, Var x, Mat<T>& keys,
                                       Mat<T>& values) const {
  const Mat<T> kn = g.value(k(g, x));
  const Mat<T> vn = g.value(v(g, x));
  const Index old = keys.rows();
  keys.conservativeResize(old + kn.rows(), dim);
  values.conservativeResize(old + vn.rows(), dim);
  keys.bottomRows(kn.rows()) = kn;
  values.bottomRows(vn.rows()) = vn;
  return o(g, g.attention(q(g, x), g.constant(keys), g.constant(values), heads, true));
}

template <typename T>
FeedForward<T> FeedForward<T>::create(ParamStore<T>& store, const std::string& name, Index dim,
                                      Index hidden, int kernel, Rng& rng) {
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError(name + ": ff kernel must be odd");
  FeedForward f;
  f.dim = dim;
  f.hidden = hidden;
  f.kernel = kernel;
  f.up = Linear<T>::create(store, name + ".up", dim * kernel, hidden, true, rng);
  f.down = Linear<T>::create(store, name + ".down", hidden * kernel, dim, true, rng);
  return f;
}

template <typename T>
Var FeedForward<T>::operator()(Graph<T>& g, Var x) const {
  if (kernel == 1) return down(g, g.relu(up(g, x)));
  const int pad = kernel / 2;
  Var h = g.relu(up(g, g.im2col(x, kernel, 1, pad)));
  return down(g, g.im2col(h, kernel, 1, pad));
}

void StackConfig::validate(const char* what) const {
  const std::string w(what);
  if (layers < 1) throw ConfigError(w + ".layers must be >= 1");
  if (dim < 2) throw ConfigError(w + ".dim must be >= 2");
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError(w + ".dim (" + std::to_string(dim) + ") must be divisible by heads (" +
                      std::to_string(heads) + ")");
  }
  if (ff_dim < 1) throw ConfigError(w + ".ff_dim must be >= 1");
  if (ff_kernel < 1 || ff_kernel % 2 == 0) throw ConfigError(w + ".ff_kernel must be odd");
}

template <typename T>
TransformerStack<T> TransformerStack<T>::create(ParamStore<T>& store, const std::string& name,
                                                const StackConfig& config, Index cond_dim,
                                                bool causal, Rng& rng) {
  config.validate(name.c_str());
  if (causal && config.ff_kernel != 1) {
    throw ConfigError(name + ": a causal stack needs ff_kernel == 1");
  }
  TransformerStack s;
  s.config = config;
  s.causal = causal;
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = name + ".layer" + std::to_string(l);
    Block b;
    b.norm_attn = Norm<T>::create(store, p + ".norm_attn", config.dim, cond_dim, rng);
    b.attn = MultiHeadAttention<T>::create(store, p + ".attn", config.dim, config.heads, rng);
    b.norm_ff = Norm<T>::create(store, p + ".norm_ff", config.dim, cond_dim, rng);
    b.ff = FeedForward<T>::create(store, p + ".ff", config.dim, config.ff_dim, config.ff_kernel,
                                  rng);
    s.blocks.push_back(b);
  }
  s.final_norm = Norm<T>::create(store, name + ".norm_out", config.dim, cond_dim, rng);
  return s;
}

template <typename T>
Index TransformerStack<T>::count(const StackConfig& c, Index cond_dim) {
  const Index block = 2 * Norm<T>::count(c.dim, cond_dim) + MultiHeadAttention<T>::count(c.dim) +
                      FeedForward<T>::count(c.dim, c.ff_dim, c.ff_kernel);
  return c.layers * block + Norm<T>::count(c.dim, cond_dim);
}

template <typename T>
Var TransformerStack<T>::operator()(Graph<T>& g, Var x, Var cond) const {
  for (const auto& b : blocks) {
    x = g.add(x, b.attn(g, b.norm_attn(g, x, cond), causal));
    x = g.add(x, b.ff(g, b.norm_ff(g, x, cond)));
  }
  return final_norm(g, x, cond);
}

template <typename T>
Var TransformerStack<T>::incremental(Graph<T>& g, Var x, Var cond, KvCache<T>& cache) const {
  if (!causal) throw ValidationError("incremental evaluation needs a causal stack");
  if (cache.keys.size() != blocks.size()) cache.reset(blocks.size());
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& b = blocks[l];
    x = g.add(x, b.attn.incremental(g, b.norm_attn(g, x, cond), cache.keys[l], cache.values[l]));
    x = g.add(x, b.ff(g, b.norm_ff(g, x, cond)));
  }
  cache.length += g.rows(x);
  return final_norm(g, x, cond);
}

#define TTST_INSTANTIATE(T)                                                                  \
  template Param<T>& make_param<T>(ParamStore<T>&, const std::string&, Index, Index, Init,  \
                                   Index, Rng&);                                            \
  template struct Linear<T>;                                                                 \
  template struct Norm<T>;                                                                   \
  template struct MultiHeadAttention<T>;                                                     \
  template struct FeedForward<T>;                                                            \
  template struct TransformerStack<T>;

TTST_INSTANTIATE(float)
TTST_INSTANTIATE(double)
#undef TTST_INSTANTIATE

}  // namespace ttst
