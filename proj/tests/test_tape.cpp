#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"

using namespace aist;

namespace {

using Builder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

// Central-difference check of every coordinate of every input leaf.
void check_grad(const std::vector<std::vector<double>>& inputs, const Builder& build) {
  Tape t;
  std::vector<NodeId> ids;
  for (const auto& v : inputs) ids.push_back(t.leaf(v));
  const NodeId root = build(t, ids);
  REQUIRE(t.len(root) == 1);
  t.backward(root);
  for (size_t k = 0; k < inputs.size(); ++k) {
    const auto g = t.grad(ids[k]);
    for (size_t i = 0; i < inputs[k].size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::fabs(inputs[k][i]));
      const auto eval = [&](double delta) {
        Tape t2;
        auto shifted = inputs;
        shifted[k][i] += delta;
        std::vector<NodeId> ids2;
        for (const auto& v : shifted) ids2.push_back(t2.leaf(v));
        return t2.scalar(build(t2, ids2));
      };
      const double fd = (eval(h) - eval(-h)) / (2.0 * h);
      INFO("input ", k, " coord ", i);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

const std::vector<double> kA = {0.3, -0.7, 1.1};
const std::vector<double> kB = {-0.2, 0.5, 0.9};
const std::vector<double> kR3 = {0.7, -0.4, 0.2};

NodeId reduce(Tape& t, NodeId v, std::span<const double> r) { return t.dot_const(v, r); }

}  // namespace

TEST_CASE("gradients: elementwise ops") {
  check_grad({kA, kB}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.add(in[0], in[1]), kR3);
  });
  check_grad({kA, kB}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.sub(in[0], in[1]), kR3);
  });
  check_grad({kA, kB}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.mul(in[0], in[1]), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.abs(in[0]), kR3);
  });
  check_grad({{0.4, 1.7, 0.02}}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.log(in[0]), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.tanh(in[0]), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.elu(in[0]), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.leaky_relu(in[0], 0.2), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.scale_const(in[0], -2.5), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    const std::vector<double> mask = {2.0, 0.0, 2.0};  // pre-scaled dropout
    return reduce(t, t.dropout(in[0], mask), kR3);
  });
}

TEST_CASE("gradients: structural ops") {
  check_grad({kA, kB}, [](Tape& t, const std::vector<NodeId>& in) {
    const std::vector<double> r6 = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
    return reduce(t, t.concat2(in[0], in[1]), r6);
  });
  check_grad({{0.1, 0.2, 0.3, 0.4, 0.5}}, [](Tape& t, const std::vector<NodeId>& in) {
    const std::vector<double> r2 = {1.5, -0.5};
    return reduce(t, t.slice(in[0], 1, 2), r2);
  });
  check_grad({{0.3}, {-0.8}, {1.2}}, [](Tape& t, const std::vector<NodeId>& in) {
    const NodeId ids[] = {in[0], in[1], in[2]};
    return reduce(t, t.stack(ids), kR3);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) { return t.sum(in[0]); });
}

TEST_CASE("gradients: reductions and linear maps") {
  check_grad({kA, kB}, [](Tape& t, const std::vector<NodeId>& in) {
    return t.dot(in[0], in[1]);
  });
  check_grad({kA}, [](Tape& t, const std::vector<NodeId>& in) {
    return t.dot_const(in[0], kB);
  });
  check_grad({{0.1, 0.2, 0.3, 0.4, 0.5}, {0.7, -0.6}},
             [](Tape& t, const std::vector<NodeId>& in) {
               return t.dot_slice(in[0], in[1], 2);
             });
  check_grad({{0.4}, {-1.2}}, [](Tape& t, const std::vector<NodeId>& in) {
    return t.affine2(in[0], in[1], 1.5, -2.0);
  });
  check_grad({{0.1, -0.2, 0.3, 0.4, 0.5, -0.6}}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.affine_cols2(in[0], 3, 0.8, -1.1), kR3);
  });
  // W (2 x 5) * [u(3) || v(2)] + b(2)
  check_grad({{0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.8, -0.9, 1.0},
              {0.05, -0.1},
              {0.2, 0.4, -0.6},
              {0.9, -0.3}},
             [](Tape& t, const std::vector<NodeId>& in) {
               const std::vector<double> r2 = {1.0, -2.0};
               return reduce(t, t.affine_concat(in[0], in[1], in[2], in[3]), r2);
             });
  // W^T x for W 3x2, x length 3
  check_grad({{0.1, -0.2, 0.3, 0.4, 0.5, -0.6}, {0.7, -0.8, 0.9}},
             [](Tape& t, const std::vector<NodeId>& in) {
               const std::vector<double> r2 = {1.0, 0.5};
               return reduce(t, t.mat_t_vec(in[0], in[1], 3, 2), r2);
             });
  check_grad({{0.6, -0.4}, {0.1, 0.2, 0.3}, {-0.5, 0.4, 0.8}},
             [](Tape& t, const std::vector<NodeId>& in) {
               const NodeId vs[] = {in[1], in[2]};
               return reduce(t, t.weighted_sum(in[0], vs), kR3);
             });
}

TEST_CASE("gradients: attention ops") {
  check_grad({{0.9, -0.3, 0.4}}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.softmax(in[0]), kR3);
  });
  // Away from ordering kinks the sparse weights are differentiable.
  check_grad({{5.0, 4.0, 3.0, 2.0, 1.0}}, [](Tape& t, const std::vector<NodeId>& in) {
    const std::vector<double> r5 = {0.7, -0.4, 0.2, 0.9, -0.1};
    return reduce(t, t.sparse_attn(in[0], 2), r5);
  });
  check_grad({{1.3, 0.2, 0.8}}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.sparse_attn(in[0], 5), kR3);  // minimum-subtraction branch
  });
  check_grad({{0.5, 0.2, 0.3}}, [](Tape& t, const std::vector<NodeId>& in) {
    return reduce(t, t.floor_renorm(in[0], 1e-12), kR3);
  });
}

TEST_CASE("gradients: lstm cell") {
  check_grad({{0.3, -0.5, 0.2, 0.7, -0.1, 0.4, 0.6, -0.8}, {0.25, -0.45}},
             [](Tape& t, const std::vector<NodeId>& in) {
               const std::vector<double> r4 = {0.4, -0.7, 1.1, 0.3};
               return reduce(t, t.lstm_cell(in[0], in[1]), r4);
             });
}

TEST_CASE("forward pins") {
  Tape t;
  const NodeId sm = t.softmax(t.leaf(std::vector<double>{std::log(2.0), 0.0}));
  CHECK(t.val(sm)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(t.val(sm)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const NodeId el = t.elu(t.leaf(std::vector<double>{-1.0, 2.0}));
  CHECK(t.val(el)[0] == doctest::Approx(std::exp(-1.0) - 1.0));
  CHECK(t.val(el)[1] == 2.0);

  const NodeId cell = t.lstm_cell(t.leaf(std::vector<double>(4, 0.0)),
                                  t.leaf(std::vector<double>{0.5}));
  CHECK(t.val(cell)[0] == doctest::Approx(0.25));  // f=0.5 gate on c_prev, i*g = 0
  CHECK(t.val(cell)[1] == doctest::Approx(0.5 * std::tanh(0.25)));

  const NodeId fr = t.floor_renorm(t.leaf(std::vector<double>{0.5, 0.0, 0.5}), 1e-12);
  CHECK(t.val(fr)[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(t.val(fr)[1] == doctest::Approx(1e-12 / (1.0 + 1e-12)));
}

TEST_CASE("sparse attention forward pins") {
  const auto run = [](std::vector<double> s, int k) {
    std::vector<double> out(s.size());
    sparse_attention_forward(s, k, out);
    return out;
  };
  // More scores than k_top: threshold is the (k_top+1)-th largest.
  const auto a = run({5, 4, 3, 2, 1}, 2);
  CHECK(a[0] == doctest::Approx(2.0 / 3.0));
  CHECK(a[1] == doctest::Approx(1.0 / 3.0));
  CHECK(a[2] == 0.0);
  CHECK(a[3] == 0.0);
  CHECK(a[4] == 0.0);
  // At most k_top scores: minimum shifts to exactly zero weight.
  const auto b = run({3, 1}, 5);
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);
  // Single entry.
  CHECK(run({7.5}, 5) == std::vector<double>{1.0});
  // Full tie: uniform over the first k_top positions.
  const auto c = run({2, 2, 2}, 2);
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(c[2] == 0.0);
  const auto d = run({2, 2}, 5);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(0.5));
  // Tied threshold: the last index among the minimum ties is subtracted.
  const auto e = run({4, 2, 2}, 2);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == 0.0);
  CHECK(e[2] == 0.0);
}

TEST_CASE("sparse attention uniform fallback has zero gradient") {
  Tape t;
  const NodeId s = t.leaf(std::vector<double>{2.0, 2.0, 2.0});
  const NodeId a = t.sparse_attn(s, 2);
  t.backward(t.dot_const(a, kR3));
  for (double g : t.grad(s)) CHECK(g == 0.0);
}

TEST_CASE("detach blocks gradient flow") {
  Tape t;
  const NodeId x = t.leaf(std::vector<double>{0.4, -0.6});
  const NodeId d = t.detach(x);
  CHECK(t.val(d)[0] == 0.4);
  t.backward(t.sum(d));
  CHECK(t.grad(x)[0] == 0.0);
  CHECK(t.grad(x)[1] == 0.0);

  // Through a live path alongside the detached one, only the live part counts.
  Tape t2;
  const NodeId y = t2.leaf(std::vector<double>{0.5});
  const NodeId root = t2.add(y, t2.detach(y));  // value 2y, gradient 1
  t2.backward(root);
  CHECK(t2.scalar(root) == doctest::Approx(1.0));
  CHECK(t2.grad(y)[0] == doctest::Approx(1.0));
}

TEST_CASE("constants receive no gradient, leaves do") {
  Tape t;
  const NodeId c = t.constant(std::vector<double>{1.0, 2.0});
  const NodeId x = t.leaf(std::vector<double>{3.0, 4.0});
  t.backward(t.dot(c, x));
  CHECK(t.grad(x)[0] == 1.0);
  CHECK(t.grad(x)[1] == 2.0);
}

TEST_CASE("backward clears stale gradients") {
  Tape t;
  const NodeId x = t.leaf(std::vector<double>{0.3, 0.9});
  const NodeId root = t.dot_const(x, std::vector<double>{2.0, -1.0});
  t.backward(root);
  const double g0 = t.grad(x)[0];
  t.backward(root);  // second pass must not accumulate
  CHECK(t.grad(x)[0] == g0);
  t.backward(root, 2.0);
  CHECK(t.grad(x)[0] == doctest::Approx(2.0 * g0));
}

TEST_CASE("freeze/reset reuse with set_leaf") {
  Tape t;
  const NodeId w = t.leaf(std::vector<double>{1.0, 2.0});
  t.freeze();
  const size_t base_nodes = t.num_nodes();

  const NodeId r1 = t.sum(t.mul(w, w));
  CHECK(t.scalar(r1) == doctest::Approx(5.0));
  t.reset();
  CHECK(t.num_nodes() == base_nodes);

  t.set_leaf(w, std::vector<double>{3.0, 4.0});
  const NodeId r2 = t.sum(t.mul(w, w));
  CHECK(t.scalar(r2) == doctest::Approx(25.0));
  t.backward(r2);
  CHECK(t.grad(w)[0] == doctest::Approx(6.0));
  CHECK(t.grad(w)[1] == doctest::Approx(8.0));

  CHECK_THROWS_AS(t.set_leaf(w, std::vector<double>{1.0}), InternalError);
  CHECK_THROWS_AS(t.set_leaf(r2, std::vector<double>{1.0}), InternalError);
}

TEST_CASE("shape mismatches throw") {
  Tape t;
  const NodeId a = t.leaf(std::vector<double>{1.0, 2.0});
  const NodeId b = t.leaf(std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(t.add(a, b), InternalError);
  CHECK_THROWS_AS(t.dot(a, b), InternalError);
  CHECK_THROWS_AS(t.slice(a, 1, 5), InternalError);
  CHECK_THROWS_AS(t.lstm_cell(b, a), InternalError);
  CHECK_THROWS_AS(t.stack(std::vector<NodeId>{a}), InternalError);  // non-scalar element
}

TEST_CASE("randomized composite graph matches finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u(4), v(4);
    for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    check_grad({u, v}, [](Tape& t, const std::vector<NodeId>& in) {
      const NodeId s = t.softmax(t.tanh(t.mul(in[0], in[1])));
      const NodeId e = t.elu(t.sub(in[0], in[1]));
      return t.dot(s, e);
    });
  }
}
