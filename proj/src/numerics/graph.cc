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

#include "ttst/numerics/graph.h"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "ttst/common/errors.h"

namespace ttst {

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw DimensionError(std::string(op) + ": " + what);
}

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

template <typename T>
Var Graph<T>::push(M value, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (record_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw IndexError("graph: invalid variable " + std::to_string(v.id));
  }
  return nodes_[v.id];
}

template <typename T>
const Mat<T>& Graph<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

template <typename T>
Mat<T> Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return M::Zero(rows(v), cols(v));
  return n.grad;
}

template <typename T>
Mat<T>& Graph<T>::grad_ref(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0) {
    const M& val = n.external ? *n.external : n.value;
    n.grad = M::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

template <typename T>
void Graph<T>::accumulate_grad(Var v, const M& g) {
  grad_ref(v) += g;
}

template <typename T>
Var Graph<T>::constant(M value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::param(Param<T>& p) {
  Node n;
  n.external = &p.value;
  if (record_ && !p.frozen) n.param = &p;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::custom(M value, BackwardFn backward) {
  return push(std::move(value), std::move(backward));
}

template <typename T>
Var Graph<T>::affine(Var x, Var w, Var b) {
  const M& xv = value(x);
  const M& wv = value(w);
  const M& bv = value(b);
  require(xv.cols() == wv.cols(), "affine",
          "input " + shape(xv.rows(), xv.cols()) + " vs weight " +
              shape(wv.rows(), wv.cols()));
  require(bv.rows() == 1 && bv.cols() == wv.rows(), "affine",
          "bias " + shape(bv.rows(), bv.cols()));
  M out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  out.rowwise() += bv.row(0);
  return push(std::move(out), [x, w, b](Graph& g, const M& dy) {
    g.grad_ref(x).noalias() += dy * g.value(w);
    g.grad_ref(w).noalias() += dy.transpose() * g.value(x);
    g.grad_ref(b) += dy.colwise().sum();
  });
}

template <typename T>
Var Graph<T>::affine(Var x, Var w) {
  const M& xv = value(x);
  const M& wv = value(w);
  require(xv.cols() == wv.cols(), "affine",
          "input " + shape(xv.rows(), xv.cols()) + " vs weight " +
              shape(wv.rows(), wv.cols()));
  M out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  return push(std::move(out), [x, w](Graph& g, const M& dy) {
    g.grad_ref(x).noalias() += dy * g.value(w);
    g.grad_ref(w).noalias() += dy.transpose() * g.value(x);
  });
}

template <typename T>
Var Graph<T>::matmul(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.cols() == bv.rows(), "matmul",
          shape(av.rows(), av.cols()) + " * " + shape(bv.rows(), bv.cols()));
  M out(av.rows(), bv.cols());
  out.noalias() = av * bv;
  return push(std::move(out), [a, b](Graph& g, const M& dy) {
    g.grad_ref(a).noalias() += dy * g.value(b).transpose();
    g.grad_ref(b).noalias() += g.value(a).transpose() * dy;
  });
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "add",
          shape(av.rows(), av.cols()) + " + " + shape(bv.rows(), bv.cols()));
  return push(av + bv, [a, b](Graph& g, const M& dy) {
    g.grad_ref(a) += dy;
    g.grad_ref(b) += dy;
  });
}

template <typename T>
Var Graph<T>::sub(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "sub",
          shape(av.rows(), av.cols()) + " - " + shape(bv.rows(), bv.cols()));
  return push(av - bv, [a, b](Graph& g, const M& dy) {
    g.grad_ref(a) += dy;
    g.grad_ref(b) -= dy;
  });
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "mul",
          shape(av.rows(), av.cols()) + " * " + shape(bv.rows(), bv.cols()));
  return push(av.cwiseProduct(bv), [a, b](Graph& g, const M& dy) {
    g.grad_ref(a) += dy.cwiseProduct(g.value(b));
    g.grad_ref(b) += dy.cwiseProduct(g.value(a));
  });
}

template <typename T>
Var Graph<T>::add_row(Var a, Var row) {
  const M& av = value(a);
  const M& rv = value(row);
  require(rv.rows() == 1 && rv.cols() == av.cols(), "add_row",
          shape(av.rows(), av.cols()) + " + row " + shape(rv.rows(), rv.cols()));
  M out = av;
  out.rowwise() += rv.row(0);
  return push(std::move(out), [a, row](Graph& g, const M& dy) {
    g.grad_ref(a) += dy;
    g.grad_ref(row) += dy.colwise().sum();
  });
}

template <typename T>
Var Graph<T>::mul_row(Var a, Var row) {
  const M& av = value(a);
  const M& rv = value(row);
  require(rv.rows() == 1 && rv.cols() == av.cols(), "mul_row",
          shape(av.rows(), av.cols()) + " * row " + shape(rv.rows(), rv.cols()));
  M out = av.array().rowwise() * rv.row(0).array();
  return push(std::move(out), [a, row](Graph& g, const M& dy) {
    g.grad_ref(a) += (dy.array().rowwise() * g.value(row).row(0).array())
                         .matrix();
    g.grad_ref(row) += dy.cwiseProduct(g.value(a)).colwise().sum();
  });
}

template <typename T>
Var Graph<T>::add_scalar(Var a, T c) {
  M out = value(a).array() + c;
  return push(std::move(out),
              [a](Graph& g, const M& dy) { g.grad_ref(a) += dy; });
}

template <typename T>
Var Graph<T>::scale(Var a, T c) {
  return push(value(a) * c,
              [a, c](Graph& g, const M& dy) { g.grad_ref(a) += dy * c; });
}

template <typename T>
Var Graph<T>::relu(Var a) {
  M out = value(a).cwiseMax(T(0));
  return push(std::move(out), [a](Graph& g, const M& dy) {
    g.grad_ref(a) +=
        (g.value(a).array() > T(0)).select(dy, T(0)).matrix();
  });
}

template <typename T>
Var Graph<T>::tanh(Var a) {
  M out = value(a).array().tanh();
  Var y = push(std::move(out), nullptr);
  if (record_) {
    nodes_[y.id].backward = [a, y](Graph& g, const M& dy) {
      const M& yv = g.value(y);
      g.grad_ref(a) += (dy.array() * (T(1) - yv.array().square())).matrix();
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::sigmoid(Var a) {
  M out = (T(1) / (T(1) + (-value(a).array()).exp())).matrix();
  Var y = push(std::move(out), nullptr);
  if (record_) {
    nodes_[y.id].backward = [a, y](Graph& g, const M& dy) {
      const M& yv = g.value(y);
      g.grad_ref(a) +=
          (dy.array() * yv.array() * (T(1) - yv.array())).matrix();
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::layer_norm(Var x, T eps) {
  const M& xv = value(x);
  require(xv.cols() >= 2, "layer_norm", "needs at least 2 columns");
  const Index d = xv.cols();
  M out(xv.rows(), d);
  auto inv_std = std::make_shared<Eigen::Matrix<T, Eigen::Dynamic, 1>>(xv.rows());
  for (Index r = 0; r < xv.rows(); ++r) {
    const T mean = xv.row(r).mean();
    const T var = (xv.row(r).array() - mean).square().mean();
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_std)(r) = is;
    out.row(r) = (xv.row(r).array() - mean) * is;
  }
  Var y = push(std::move(out), nullptr);
  if (record_) {
    nodes_[y.id].backward = [x, y, inv_std, d](Graph& g, const M& dy) {
      const M& yv = g.value(y);
      M& dx = g.grad_ref(x);
      for (Index r = 0; r < yv.rows(); ++r) {
        const T mean_dy = dy.row(r).mean();
        const T mean_dyy = dy.row(r).dot(yv.row(r)) / T(d);
        dx.row(r).array() += (*inv_std)(r) * (dy.row(r).array() - mean_dy -
                                              yv.row(r).array() * mean_dyy);
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::log_softmax(Var logits) {
  const M& zv = value(logits);
  M out(zv.rows(), zv.cols());
  for (Index r = 0; r < zv.rows(); ++r) {
    const T mx = zv.row(r).maxCoeff();
    const T lse = mx + std::log((zv.row(r).array() - mx).exp().sum());
    out.row(r) = zv.row(r).array() - lse;
  }
  Var y = push(std::move(out), nullptr);
  if (record_) {
    nodes_[y.id].backward = [logits, y](Graph& g, const M& dy) {
      const M& yv = g.value(y);
      M& dz = g.grad_ref(logits);
      for (Index r = 0; r < yv.rows(); ++r) {
        const T s = dy.row(r).sum();
        dz.row(r).array() += dy.row(r).array() - yv.row(r).array().exp() * s;
      }
    };
  }
  return y;
}

template <typename T>
Var Graph<T>::attention(Var q, Var k, Var v, int heads, bool causal) {
  const M& qv = value(q);
  const M& kv = value(k);
  const M& vv = value(v);
  const Index d = qv.cols();
  if (heads <= 0 || d % heads != 0) {
    throw ConfigError("attention: model dim " + std::to_string(d) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  require(kv.cols() == d && vv.cols() == d && kv.rows() == vv.rows(),
          "attention", "q/k/v shapes disagree");
  require(kv.rows() >= qv.rows() || !causal, "attention",
          "causal attention needs at least as many keys as queries");
  const Index lq = qv.rows();
  const Index lk = kv.rows();
  const Index dh = d / heads;
  const Index offset = lk - lq;
  const T scale = T(1) / std::sqrt(T(dh));

  auto probs = std::make_shared<std::vector<M>>(heads);
  M out(lq, d);
  for (int h = 0; h < heads; ++h) {
    M s(lq, lk);
    s.noalias() = qv.middleCols(h * dh, dh) * kv.middleCols(h * dh, dh).transpose();
    s *= scale;
    for (Index r = 0; r < lq; ++r) {
      const Index visible = causal ? offset + r + 1 : lk;
      auto row = s.row(r);
      const T mx = row.head(visible).maxCoeff();
      row.head(visible) = (row.head(visible).array() - mx).exp();
      const T z = row.head(visible).sum();
      row.head(visible) /= z;
      if (visible < lk) row.tail(lk - visible).setZero();
    }
    out.middleCols(h * dh, dh).noalias() = s * vv.middleCols(h * dh, dh);
    (*probs)[h] = std::move(s);
  }
  return push(std::move(out), [q, k, v, heads, dh, scale, probs](
                                  Graph& g, const M& dy) {
    const M& qv = g.value(q);
    const M& kv = g.value(k);
    const M& vv = g.value(v);
    M& dq = g.grad_ref(q);
    M& dk = g.grad_ref(k);
    M& dv = g.grad_ref(v);
    for (int h = 0; h < heads; ++h) {
      const M& p = (*probs)[h];
      const auto dyh = dy.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh).noalias() += p.transpose() * dyh;
      M dp(p.rows(), p.cols());
      dp.noalias() = dyh * vv.middleCols(h * dh, dh).transpose();
      M ds = p.cwiseProduct(dp);
      for (Index r = 0; r < ds.rows(); ++r) {
        ds.row(r) -= p.row(r) * ds.row(r).sum();
      }
      ds *= scale;
      dq.middleCols(h * dh, dh).noalias() += ds * kv.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() += ds.transpose() * qv.middleCols(h * dh, dh);
    }
  });
}

template <typename T>
Var Graph<T>::gather_rows(Var table, std::span<const int> ids) {
  const M& tv = value(table);
  M out(static_cast<Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) {
      throw IndexError("gather_rows: id " + std::to_string(ids[i]) +
                       " outside table of " + std::to_string(tv.rows()) +
                       " rows");
    }
    out.row(static_cast<Index>(i)) = tv.row(ids[i]);
  }
  auto idx = std::make_shared<std::vector<int>>(ids.begin(), ids.end());
  return push(std::move(out), [table, idx](Graph& g, const M& dy) {
    M& dt = g.grad_ref(table);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      dt.row((*idx)[i]) += dy.row(static_cast<Index>(i));
    }
  });
}

template <typename T>
Var Graph<T>::concat_cols(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.rows() == bv.rows(), "concat_cols", "row counts differ");
  M out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const Index ca = av.cols();
  const Index cb = bv.cols();
  return push(std::move(out), [a, b, ca, cb](Graph& g, const M& dy) {
    g.grad_ref(a) += dy.leftCols(ca);
    g.grad_ref(b) += dy.rightCols(cb);
  });
}

template <typename T>
Var Graph<T>::concat_rows(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.cols() == bv.cols(), "concat_rows", "column counts differ");
  M out(av.rows() + bv.rows(), av.cols());
  out << av, bv;
  const Index ra = av.rows();
  const Index rb = bv.rows();
  return push(std::move(out), [a, b, ra, rb](Graph& g, const M& dy) {
    g.grad_ref(a) += dy.topRows(ra);
    g.grad_ref(b) += dy.bottomRows(rb);
  });
}

template <typename T>
Var Graph<T>::slice_rows(Var a, Index start, Index count) {
  const M& av = value(a);
  require(start >= 0 && count >= 0 && start + count <= av.rows(), "slice_rows",
          "range out of bounds");
  return push(av.middleRows(start, count), [a, start, count](Graph& g, const M& dy) {
    g.grad_ref(a).middleRows(start, count) += dy;
  });
}

template <typename T>
Var Graph<T>::slice_cols(Var a, Index start, Index count) {
  const M& av = value(a);
  require(start >= 0 && count >= 0 && start + count <= av.cols(), "slice_cols",
          "range out of bounds");
  return push(av.middleCols(start, count), [a, start, count](Graph& g, const M& dy) {
    g.grad_ref(a).middleCols(start, count) += dy;
  });
}

template <typename T>
Var Graph<T>::pairwise_sum(Var a, Var b) {
  const M& av = value(a);
  const M& bv = value(b);
  require(av.cols() == bv.cols(), "pairwise_sum", "column counts differ");
  const Index na = av.rows();
  const Index nb = bv.rows();
  M out(na * nb, av.cols());
  for (Index i = 0; i < na; ++i) {
    auto block = out.middleRows(i * nb, nb);
    block = bv;
    block.rowwise() += av.row(i);
  }
  return push(std::move(out), [a, b, na, nb](Graph& g, const M& dy) {
    M& da = g.grad_ref(a);
    M& db = g.grad_ref(b);
    for (Index i = 0; i < na; ++i) {
      const auto block = dy.middleRows(i * nb, nb);
      da.row(i) += block.colwise().sum();
      db += block;
    }
  });
}

template <typename T>
Var Graph<T>::im2col(Var x, int kernel, int stride, int pad) {
  const M& xv = value(x);
  require(kernel >= 1 && stride >= 1 && pad >= 0, "im2col", "bad geometry");
  const Index len = xv.rows();
  const Index ch = xv.cols();
  const Index out_len = (len + 2 * pad - kernel) / stride + 1;
  require(out_len >= 1, "im2col", "sequence shorter than kernel");
  M out = M::Zero(out_len, kernel * ch);
  for (Index o = 0; o < out_len; ++o) {
    for (int t = 0; t < kernel; ++t) {
      const Index src = o * stride + t - pad;
      if (src >= 0 && src < len) out.block(o, t * ch, 1, ch) = xv.row(src);
    }
  }
  return push(std::move(out), [x, kernel, stride, pad, len, ch, out_len](
                                  Graph& g, const M& dy) {
    M& dx = g.grad_ref(x);
    for (Index o = 0; o < out_len; ++o) {
      for (int t = 0; t < kernel; ++t) {
        const Index src = o * stride + t - pad;
        if (src >= 0 && src < len) dx.row(src) += dy.block(o, t * ch, 1, ch);
      }
    }
  });
}

template <typename T>
Var Graph<T>::cross_entropy(Var logits, std::span<const int> targets) {
  const M& zv = value(logits);
  require(static_cast<Index>(targets.size()) == zv.rows() && zv.rows() > 0,
          "cross_entropy", "one target per row required");
  const Index rows = zv.rows();
  auto probs = std::make_shared<M>(rows, zv.cols());
  auto tg = std::make_shared<std::vector<int>>(targets.begin(), targets.end());
  T total = 0;
  for (Index r = 0; r < rows; ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= zv.cols()) {
      throw IndexError("cross_entropy: target " + std::to_string(t) +
                       " outside [0, " + std::to_string(zv.cols()) + ")");
    }
    const T mx = zv.row(r).maxCoeff();
    auto e = (zv.row(r).array() - mx).exp();
    const T z = e.sum();
    probs->row(r) = e / z;
    total += (mx + std::log(z)) - zv(r, t);
  }
  M out(1, 1);
  out(0, 0) = total / T(rows);
  return push(std::move(out), [logits, probs, tg, rows](Graph& g, const M& dy) {
    M d = *probs;
    for (Index r = 0; r < rows; ++r) d(r, (*tg)[static_cast<std::size_t>(r)]) -= T(1);
    g.grad_ref(logits) += d * (dy(0, 0) / T(rows));
  });
}

template <typename T>
void Graph<T>::backward(Var target) {
  const Node& t = node(target);
  const M& tv = t.external ? *t.external : t.value;
  if (tv.size() != 1) throw DimensionError("backward: target must be a scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  grad_ref(target)(0, 0) = T(1);
  for (int id = target.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

template <typename T>
Mat<T> sinusoidal_positions(Index length, Index dim, Index offset) {
  Mat<T> pe(length, dim);
  for (Index p = 0; p < length; ++p) {
    const double pos = static_cast<double>(p + offset);
    for (Index c = 0; c < dim; ++c) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(2 * (c / 2)) / static_cast<double>(dim));
      pe(p, c) = static_cast<T>(c % 2 == 0 ? std::sin(pos * freq) : std::cos(pos * freq));
    }
  }
  return pe;
}

template class Graph<float>;
template class Graph<double>;
template Mat<float> sinusoidal_positions<float>(Index, Index, Index);
template Mat<double> sinusoidal_positions<double>(Index, Index, Index);

}  // namespace ttst
