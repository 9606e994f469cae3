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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ttst/common/errors.h"
#include "ttst/numerics/grad_check.h"
#include "ttst/numerics/graph.h"
#include "ttst/numerics/layers.h"
#include "ttst/numerics/optim.h"
#include "ttst/numerics/rng.h"

using namespace ttst;
using M = Mat<double>;

namespace {

M mat(Index r, Index c, std::initializer_list<double> v) {
  M m(r, c);
  Index i = 0;
  for (double x : v) m(i / c, i % c) = x, ++i;
  return m;
}

M random_mat(Rng& rng, Index r, Index c) {
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// 1 x 1 sum of all entries.
Var sum_all(Graph<double>& g, Var x) {
  Var col = g.matmul(x, g.constant(M::Ones(g.cols(x), 1)));
  return g.matmul(g.constant(M::Ones(1, g.rows(x))), col);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("affine identity and hand values") {
  Graph<double> g;
  Var x = g.constant(mat(1, 2, {3, -1}));
  Var y = g.affine(x, g.constant(M::Identity(2, 2)), g.constant(M::Zero(1, 2)));
  CHECK(g.value(y) == mat(1, 2, {3, -1}));

  Var w = g.constant(mat(2, 2, {1, 1, 0, 2}));
  Var y2 = g.affine(g.constant(mat(1, 2, {1, 1})), w, g.constant(mat(1, 2, {1, 0})));
  CHECK(g.value(y2) == mat(1, 2, {3, 2}));
}

TEST_CASE("affine input gradient matches hand value and finite differences") {
  ParamStore<double> store;
  Param<double>& x = store.create("x", 1, 2);
  x.value = mat(1, 2, {0.3, -0.7});
  const M w = mat(2, 2, {1, 1, 0, 2});
  auto build = [&](Graph<double>& g) {
    return sum_all(g, g.affine(g.param(x), g.constant(w), g.constant(M::Zero(1, 2))));
  };
  {
    Graph<double> g;
    Var xv = g.param(x);
    Var loss = sum_all(g, g.affine(xv, g.constant(w), g.constant(M::Zero(1, 2))));
    g.backward(loss);
    const M gx = g.grad(xv);
    CHECK(gx(0, 0) == doctest::Approx(1.0));
    CHECK(gx(0, 1) == doctest::Approx(3.0));
  }
  GradCheckOptions opt;
  opt.step = 1e-5;
  CHECK(grad_check(store, build, opt).passed(1e-8));
}

TEST_CASE("layer norm output has zero mean") {
  Rng rng(3);
  Graph<double> g;
  const M y = g.value(g.layer_norm(g.constant(random_mat(rng, 5, 16)), 1e-5));
  for (Index r = 0; r < y.rows(); ++r) CHECK(std::abs(y.row(r).mean()) < 1e-5);
}

TEST_CASE("conditional layer norm is plain at init and shifts with beta") {
  Rng rng(1);
  ParamStore<double> store;
  Norm<double> norm = Norm<double>::create(store, "n", 2, 3, rng);
  Graph<double> g;
  Var x = g.constant(mat(1, 2, {1, 3}));
  Var s = g.constant(random_mat(rng, 1, 3));
  const M y = g.value(norm(g, x, s));
  CHECK(y(0, 0) == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(y(0, 1) == doctest::Approx(1.0).epsilon(1e-5));

  norm.to_beta.bias->value.setConstant(0.25);
  Graph<double> g2;
  const M y2 = g2.value(norm(g2, g2.constant(mat(1, 2, {1, 3})), g2.constant(random_mat(rng, 1, 3))));
  CHECK(y2(0, 0) == doctest::Approx(-0.75).epsilon(1e-5));
  CHECK(y2(0, 1) == doctest::Approx(1.25).epsilon(1e-5));
}

TEST_CASE("attention over a single key returns the value row") {
  Graph<double> g;
  Var q = g.constant(mat(1, 3, {0.2, -1, 4}));
  Var k = g.constant(mat(1, 3, {1, 2, 3}));
  Var v = g.constant(mat(1, 3, {7, 8, 9}));
  CHECK(g.value(g.attention(q, k, v, 1, false)).isApprox(mat(1, 3, {7, 8, 9})));
}

TEST_CASE("causal attention ignores later positions") {
  Rng rng(5);
  ParamStore<double> store;
  auto mha = MultiHeadAttention<double>::create(store, "a", 8, 2, rng);
  M x = random_mat(rng, 2, 8);
  Graph<double> g;
  const M y1 = g.value(mha(g, g.constant(x), true));
  x.row(1) = random_mat(rng, 1, 8);
  const M y2 = g.value(mha(g, g.constant(x), true));
  CHECK(y1.row(0) == y2.row(0));
  CHECK(y1.row(1) != y2.row(1));
}

TEST_CASE("incremental decoding matches full recompute") {
  Rng rng(9);
  ParamStore<double> store;
  StackConfig cfg{2, 8, 2, 16, 1};
  auto stack = TransformerStack<double>::create(store, "s", cfg, 4, true, rng);
  for (auto& p : store.params()) {
    if (p->name.find("to_") != std::string::npos) p->value = 0.3 * random_mat(rng, p->value.rows(), p->value.cols());
  }
  const M x = random_mat(rng, 5, 8);
  const M cond = random_mat(rng, 1, 4);
  Graph<double> g;
  const M full = g.value(stack(g, g.constant(x), g.constant(cond)));
  KvCache<double> cache;
  cache.reset(2);
  double max_diff = 0.0;
  for (Index t = 0; t < 5; ++t) {
    Graph<double> gi;
    const M row = gi.value(stack.incremental(gi, gi.constant(x.row(t)), gi.constant(cond), cache));
    max_diff = std::max(max_diff, (row - full.row(t)).cwiseAbs().maxCoeff());
  }
  CHECK(cache.length == 5);
  CHECK(max_diff < 1e-5);
}

TEST_CASE("cross entropy closed forms") {
  Graph<double> g;
  const std::vector<int> t0{0};
  const std::vector<int> t2{2};
  CHECK(g.value(g.cross_entropy(g.constant(M::Zero(1, 4)), t2))(0, 0) ==
        doctest::Approx(std::log(4.0)));
  CHECK(g.value(g.cross_entropy(g.constant(mat(1, 2, {10, 0})), t0))(0, 0) ==
        doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-9));
  CHECK(std::log1p(std::exp(-10.0)) == doctest::Approx(4.54e-5).epsilon(1e-3));
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Rng rng(11);
  ParamStore<double> store;
  Param<double>& logits = store.create("logits", 3, 7);
  logits.value = random_mat(rng, 3, 7);
  const std::vector<int> targets{4, 0, 6};
  auto build = [&](Graph<double>& g) { return g.cross_entropy(g.param(logits), targets); };
  GradCheckOptions opt;
  opt.step = 1e-5;
  CHECK(grad_check(store, build, opt).passed(1e-4));
}

TEST_CASE("grad check on linear regression, frozen params excluded") {
  Rng rng(2);
  ParamStore<double> store;
  Param<double>& w = store.create("w", 1, 3);
  Param<double>& b = store.create("b", 1, 1);
  Param<double>& frozen = store.create("frozen", 1, 1);
  frozen.frozen = true;
  w.value = random_mat(rng, 1, 3);
  b.value = random_mat(rng, 1, 1);
  frozen.value.setConstant(0.5);
  const M x = random_mat(rng, 10, 3);
  const M y = random_mat(rng, 10, 1);
  auto build = [&](Graph<double>& g) {
    Var pred = g.add_row(g.affine(g.constant(x), g.param(w)),
                         g.scale(g.param(b), 1.0));
    Var d = g.sub(g.scale(pred, 1.0), g.scale(g.constant(y), g.value(g.param(frozen))(0, 0)));
    return g.scale(sum_all(g, g.mul(d, d)), 0.1);
  };
  const GradCheckReport rep = grad_check(store, build);
  CHECK(rep.passed(1e-6));
  CHECK(rep.find("w") != nullptr);
  CHECK(rep.find("b") != nullptr);
  CHECK(rep.find("frozen") == nullptr);
}

TEST_CASE("adamw hand-evaluated updates") {
  SUBCASE("zero gradient leaves params unchanged") {
    ParamStore<float> store;
    Param<float>& p = store.create("p", 2, 2);
    p.value.setConstant(0.7f);
    AdamW<float> opt(store, AdamWOptions{0.9, 0.98, 1e-8, 0.0});
    opt.step(0.1);
    CHECK((p.value.array() == 0.7f).all());
  }
  SUBCASE("unit gradient with zero betas") {
    ParamStore<double> store;
    Param<double>& p = store.create("p", 1, 1);
    p.value(0, 0) = 2.0;
    p.grad = M::Ones(1, 1);
    AdamW<double> opt(store, AdamWOptions{0.0, 0.0, 1e-8, 0.0});
    opt.step(0.1);
    CHECK(p.value(0, 0) == doctest::Approx(2.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    CHECK(p.grad(0, 0) == 0.0);
  }
  SUBCASE("decoupled weight decay") {
    ParamStore<double> store;
    Param<double>& p = store.create("p", 1, 1);
    p.value(0, 0) = 1.0;
    AdamW<double> opt(store, AdamWOptions{0.9, 0.98, 1e-8, 0.01});
    opt.step(0.1);
    CHECK(p.value(0, 0) == doctest::Approx(0.999).epsilon(1e-12));
  }
  SUBCASE("non-finite gradient names the param and updates nothing") {
    ParamStore<double> store;
    Param<double>& a = store.create("a", 1, 1);
    Param<double>& b = store.create("b", 1, 1);
    a.value(0, 0) = 1.0;
    b.value(0, 0) = 1.0;
    a.grad = M::Ones(1, 1);
    b.grad = M::Constant(1, 1, std::nan(""));
    AdamW<double> opt(store, AdamWOptions{});
    CHECK_THROWS_WITH_AS(opt.step(0.1), doctest::Contains("b"), NumericalError);
    CHECK(a.value(0, 0) == 1.0);
  }
}

TEST_CASE("lr schedule endpoints and cosine midpoint") {
  LrSchedule s{100, 1e-3, 200, 0.0};
  CHECK(lr_at(s, 0) == 0.0);
  CHECK(lr_at(s, 100) == doctest::Approx(1e-3));
  CHECK(lr_at(s, 150) == doctest::Approx(5e-4));
  CHECK(lr_at(s, 200) == doctest::Approx(0.0));
  CHECK(lr_at(s, 400) == doctest::Approx(0.0));
  CHECK_THROWS_AS((LrSchedule{300, 1e-3, 200, 0.0}.validate()), ConfigError);
}

TEST_CASE("gradient clipping caps the global norm") {
  ParamStore<double> store;
  Param<double>& a = store.create("a", 1, 2);
  a.grad = mat(1, 2, {3, 4});
  CHECK(clip_grad_norm(store, 1.0) == doctest::Approx(5.0));
  CHECK(a.grad.norm() == doctest::Approx(1.0));
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  Rng c(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += c.uniform();
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

}  // TEST_SUITE
