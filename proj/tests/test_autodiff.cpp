#include <cmath>
#include <doctest.h>

#include "p3o/autodiff.hpp"
#include "p3o/rng.hpp"

using namespace p3o;

TEST_CASE("forward basics") {
  Graph g;

  SUBCASE("sigmoid symmetry point") {
    Graph::Id x = g.constant(0.0);
    Graph::Id y = g.sigmoid(x);
    CHECK(g.forward(y).value() == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("identity matmul") {
    Graph::Id I = g.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    Graph::Id v = g.constant(Tensor::matrix(2, 1, {3, 4}));
    const Tensor& out = g.forward(g.matmul(I, v));
    CHECK(out.data[0] == 3.0);
    CHECK(out.data[1] == 4.0);
  }

  SUBCASE("scopic sample value sigma(2)*2") {
    // sigmoid(2*(2-1)) * (4/2); frozen from an mpmath evaluation of
    // 2/(1+exp(-2)) = 1.7615941559557649...
    Graph::Id r = g.constant(2.0);
    Graph::Id shifted = g.mul(g.constant(2.0), g.sub(r, g.constant(1.0)));
    Graph::Id v = g.mul(g.sigmoid(shifted), g.constant(2.0));
    CHECK(g.forward(v).value() == doctest::Approx(1.7615941559557649).epsilon(1e-12));
  }

  SUBCASE("shape mismatch names the node") {
    Graph::Id a = g.constant(Tensor::row({1, 2}));
    Graph::Id b = g.constant(Tensor::row({1, 2, 3}));
    CHECK_THROWS_WITH_AS(g.add(a, b),
                         doctest::Contains("shape mismatch at add#"), GraphError);
  }

  SUBCASE("non-finite output names the node") {
    Graph::Id x = g.constant(-1.0);
    Graph::Id y = g.log(x);
    CHECK_THROWS_WITH_AS(g.forward(y), doctest::Contains("non-finite value at node log#"),
                         GraphError);
  }
}

TEST_CASE("backward basics") {
  SUBCASE("d sigmoid at 0 is 0.25") {
    Graph g;
    Tensor x = Tensor::scalar(0.0);
    Graph::Id y = g.sigmoid(g.leaf(&x));
    g.forward(y);
    g.backward(y);
    CHECK(x.grad[0] == doctest::Approx(0.25).epsilon(1e-15));
  }

  SUBCASE("clip flat region has zero gradient") {
    Graph g;
    Tensor x = Tensor::scalar(1.5);
    Graph::Id y = g.clip(g.leaf(&x), 0.8, 1.2);
    g.forward(y);
    g.backward(y);
    CHECK(x.grad[0] == 0.0);
  }

  SUBCASE("min routes gradient to the smaller argument") {
    Graph g;
    Tensor a = Tensor::scalar(2.0), b = Tensor::scalar(3.0);
    Graph::Id y = g.minimum(g.leaf(&a), g.leaf(&b));
    g.forward(y);
    g.backward(y);
    CHECK(a.grad[0] == 1.0);
    CHECK(b.grad[0] == 0.0);
  }

  SUBCASE("min tie routes gradient to the first argument") {
    Graph g;
    Tensor a = Tensor::scalar(2.0), b = Tensor::scalar(2.0);
    Graph::Id y = g.minimum(g.leaf(&a), g.leaf(&b));
    g.forward(y);
    g.backward(y);
    CHECK(a.grad[0] == 1.0);
    CHECK(b.grad[0] == 0.0);
  }

  SUBCASE("repeated backward accumulates until cleared") {
    Graph g;
    Tensor x = Tensor::scalar(3.0);
    Graph::Id y = g.square(g.leaf(&x));
    g.forward(y);
    g.backward(y);
    g.backward(y);
    CHECK(x.grad[0] == doctest::Approx(12.0));
    g.zero_grads();
    g.backward(y);
    CHECK(x.grad[0] == doctest::Approx(6.0));
  }

  SUBCASE("non-scalar root rejected") {
    Graph g;
    Tensor x = Tensor::row({1.0, 2.0});
    Graph::Id y = g.square(g.leaf(&x));
    g.forward(y);
    CHECK_THROWS_AS(g.backward(y), GraphError);
  }

  SUBCASE("backward before forward rejected") {
    Graph g;
    Tensor x = Tensor::scalar(1.0);
    Graph::Id y = g.square(g.leaf(&x));
    CHECK_THROWS_WITH_AS(g.backward(y), doctest::Contains("backward before forward"),
                         GraphError);
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Tensor p = Tensor::row({1.0, -2.0});
    AdamState st(2, 0.001);
    std::vector<double> zero{0.0, 0.0};
    adam_step(st, p, zero);
    CHECK(p.data[0] == 1.0);
    CHECK(p.data[1] == -2.0);
    CHECK(st.step == 1);
  }

  SUBCASE("first step with defaults") {
    // bias-corrected first step: m_hat = g, v_hat = g^2, so
    // delta = -alpha*g/(|g|+eps) = -0.001*0.1/(0.1+1e-8)
    Tensor p = Tensor::scalar(0.0);
    AdamState st(1, 0.001);
    std::vector<double> grad{0.1};
    adam_step(st, p, grad);
    CHECK(p.data[0] == doctest::Approx(-0.000999999900000010).epsilon(1e-12));
  }

  SUBCASE("second identical step is not larger") {
    Tensor p = Tensor::scalar(0.0);
    AdamState st(1, 0.001);
    std::vector<double> grad{0.3};
    adam_step(st, p, grad);
    const double d1 = std::abs(p.data[0]);
    const double before = p.data[0];
    adam_step(st, p, grad);
    const double d2 = std::abs(p.data[0] - before);
    CHECK(d2 <= d1 * (1.0 + 1e-6));
  }

  SUBCASE("non-finite gradient rejected without update") {
    Tensor p = Tensor::scalar(5.0);
    AdamState st(1, 0.001);
    std::vector<double> grad{std::nan("")};
    CHECK_THROWS_AS(adam_step(st, p, grad), GraphError);
    CHECK(p.data[0] == 5.0);
    CHECK(st.step == 0);
  }
}

TEST_CASE("finite difference checker") {
  SUBCASE("identity graph is exact") {
    Graph g;
    Tensor x = Tensor::scalar(1.25);
    Graph::Id leaf = g.leaf(&x);
    // sum of a scalar leaf: gradient exactly 1
    Graph::Id y = g.sum(leaf);
    CHECK(finite_diff_check(g, y, leaf, 1e-5) < 1e-10);
  }

  SUBCASE("scopic composite at random ratios") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
      Graph g;
      Tensor r = Tensor::scalar(rng.uniform(0.05, 2.95));
      Tensor adv = Tensor::scalar(rng.uniform(-2.0, 2.0));
      Graph::Id rl = g.leaf(&r);
      const double tau = 4.0;
      Graph::Id shifted = g.mul(g.constant(tau), g.sub(rl, g.constant(1.0)));
      Graph::Id y = g.sum(g.mul(g.sigmoid(shifted),
                                g.mul(g.constant(4.0 / tau), g.leaf(&adv))));
      CHECK(finite_diff_check(g, y, rl, 1e-5) < 1e-6);
    }
  }

  SUBCASE("ppo min/clip composite on the flat branch") {
    Graph g;
    Tensor r = Tensor::scalar(1.5);
    Tensor adv = Tensor::scalar(1.0);
    Graph::Id rl = g.leaf(&r);
    Graph::Id al = g.leaf(&adv);
    Graph::Id y = g.sum(g.minimum(g.mul(rl, al), g.mul(g.clip(rl, 0.8, 1.2), al)));
    CHECK(finite_diff_check(g, y, rl, 1e-5) < 1e-6);
  }

  SUBCASE("h outside the allowed range rejected") {
    Graph g;
    Tensor x = Tensor::scalar(1.0);
    Graph::Id leaf = g.leaf(&x);
    Graph::Id y = g.sum(leaf);
    g.forward(y);
    CHECK_THROWS_AS(finite_diff_check(g, y, leaf, 1e-2), GraphError);
  }
}

TEST_CASE("gradient checks across op kinds") {
  // random two-operand compositions exercising every differentiable op,
  // evaluated away from clip/min kinks by a 10*h margin
  Rng rng(42);
  const double h = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    Graph g;
    Tensor a = Tensor::matrix(2, 3, {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                                     rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                                     rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)});
    Tensor b = Tensor::matrix(3, 2, {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                                     rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                                     rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)});
    Graph::Id la = g.leaf(&a);
    Graph::Id lb = g.leaf(&b);
    Graph::Id mm = g.matmul(la, lb);                     // [2,2]
    Graph::Id e = g.exp(g.neg(mm));
    Graph::Id t = g.tanh(g.log(g.add(e, g.constant(1.0))));
    Graph::Id sq = g.square(g.sigmoid(t));
    Graph::Id mx = g.maximum(sq, g.mul(g.constant(0.3), sq));
    Graph::Id root = g.add(g.mean(mx), g.sum(g.div(sq, g.constant(2.0))));
    CHECK(finite_diff_check(g, root, la, h) < 1e-5);
    CHECK(finite_diff_check(g, root, lb, h) < 1e-5);
  }
}

TEST_CASE("reduction and broadcast gradients") {
  Rng rng(9);
  Graph g;
  Tensor x = Tensor::matrix(3, 2, {0.3, 1.1, -0.4, 0.9, 2.0, -1.2});
  Tensor bias = Tensor::row({0.5, -0.25});
  Graph::Id lx = g.leaf(&x);
  Graph::Id lb = g.leaf(&bias);
  Graph::Id y = g.add(lx, g.broadcast(lb, {3, 2}));
  Graph::Id lse = g.logsumexp_rows(y);
  Graph::Id picked = g.gather_cols(y, {1, 0, 1});
  Graph::Id root = g.mean(g.sub(picked, lse));
  CHECK(finite_diff_check(g, root, lx, 1e-5) < 1e-6);
  CHECK(finite_diff_check(g, root, lb, 1e-5) < 1e-6);
  (void)rng;
}

TEST_CASE("determinism: identical graph and inputs give identical results") {
  auto build_and_run = [](std::vector<double>& grads_out) {
    Graph g;
    Tensor w = Tensor::matrix(2, 2, {0.1, -0.2, 0.3, 0.4});
    Tensor x = Tensor::matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
    Graph::Id root = g.mean(g.tanh(g.matmul(g.leaf(&x), g.leaf(&w))));
    const double v = g.forward(root).value();
    g.backward(root);
    grads_out = w.grad;
    return v;
  };
  std::vector<double> g1, g2;
  const double v1 = build_and_run(g1);
  const double v2 = build_and_run(g2);
  CHECK(v1 == v2);
  CHECK(g1 == g2);
}
