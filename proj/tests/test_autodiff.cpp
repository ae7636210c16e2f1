// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/autodiff/ops.hpp"
#include "geolid/autodiff/params.hpp"
#include "support/op_cases.hpp"

using namespace geolid;
using namespace geolid::ad;
using geolid::testing::random_tensor;

TEST_CASE("tensor construction validates shape and data") {
  CHECK_THROWS_AS(Tensor<double>(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  CHECK_THROWS_AS(Tensor<double>(Shape{2, 0}), ShapeError);
  Tensor<double> t(Shape{2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.dim(-1) == 3);
  CHECK(Tensor<double>::scalar(4).item() == 4);
}

TEST_CASE("shape mismatches name the op and both shapes") {
  Tensor<double> a(Shape{2, 3}), b(Shape{3, 2});
  try {
    add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("(2x3)") != std::string::npos);
    CHECK(msg.find("(3x2)") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
  CHECK_THROWS_AS(broadcast_add(Tensor<double>(Shape{2, 3, 4}), Tensor<double>(Shape{3})), ShapeError);
}

TEST_CASE("softmax rows sum to one") {
  std::mt19937_64 rng(1);
  const auto x = random_tensor(rng, {7, 9}, -20, 20);
  const auto y = softmax(x);
  for (std::size_t r = 0; r < 7; ++r) {
    double s = 0;
    for (std::size_t j = 0; j < 9; ++j) s += y[r * 9 + j];
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("matmul shapes") {
  CHECK(matmul(Tensor<double>(Shape{2, 3}), Tensor<double>(Shape{3, 4})).shape() == Shape{2, 4});
  CHECK(matmul(Tensor<double>(Shape{5, 2, 3}), Tensor<double>(Shape{3, 4})).shape() == Shape{5, 2, 4});
  CHECK(matmul(Tensor<double>(Shape{5, 2, 3}), Tensor<double>(Shape{5, 3, 4})).shape() == Shape{5, 2, 4});
}

TEST_CASE("conv1d matches a direct sliding-window oracle") {
  std::mt19937_64 rng(2);
  const std::size_t T = 50, cin = 2, cout = 3, k = 7, stride = 3;
  const auto x = random_tensor(rng, {T, cin});
  const auto w = random_tensor(rng, {k, cin, cout});
  const auto y = conv1d(x, w, {stride, 1, 0});
  const std::size_t expected_len = (T - k) / stride + 1;
  REQUIRE(y.shape() == Shape{expected_len, cout});
  for (std::size_t t = 0; t < expected_len; ++t)
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = 0;
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < cin; ++c) acc += x[(t * stride + j) * cin + c] * w[(j * cin + c) * cout + o];
      CHECK(y[t * cout + o] == doctest::Approx(acc).epsilon(1e-12));
    }
  CHECK_THROWS_AS(conv1d(random_tensor(rng, {5, cin}), w, {1, 1, 0}), ShapeError);
}

TEST_CASE("backward of a product of scalars") {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::scalar(3.0), "x");
  auto y = tape.leaf(Tensor<double>::scalar(-2.5), "y");
  auto g = tape.backward(mul(x, y));
  CHECK(g.at("x").item() == -2.5);
  CHECK(g.at("y").item() == 3.0);
}

TEST_CASE("backward rejects non-scalar losses") {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>(Shape{3}, 1.0), "x");
  CHECK_THROWS_AS(tape.backward(scale(x, 2.0)), std::invalid_argument);
}

TEST_CASE("parameters unreachable from the loss get zero gradients") {
  ParameterSet<double> params;
  params.add("used", Tensor<double>(Shape{2}, 1.0));
  params.add("unused", Tensor<double>(Shape{3}, 2.0));
  params.add("registered_but_unused", Tensor<double>(Shape{2}, 2.0));
  Tape<double> tape;
  auto used = tape.leaf(params.value("used"), "used");
  tape.leaf(params.value("registered_but_unused"), "registered_but_unused");
  auto grads = backward(sum_all(mul(used, used)), params);
  CHECK(grads.at("used")[0] == 2.0);
  for (double v : grads.at("unused").data()) CHECK(v == 0.0);
  for (double v : grads.at("registered_but_unused").data()) CHECK(v == 0.0);
}

namespace {

// Three dense layers with different nonlinearities.
Tensor<double> three_layer(ParameterSet<double>& p, Tape<double>* tape, const Tensor<double>& x) {
  auto b = bind(p, tape);
  auto h = tanh(broadcast_add(matmul(x, b.at("w1")), b.at("b1")));
  h = gelu(broadcast_add(matmul(h, b.at("w2")), b.at("b2")));
  h = sigmoid(matmul(h, b.at("w3")));
  return mean_all(mul(h, h));
}

ParameterSet<double> three_layer_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParameterSet<double> p;
  p.add("w1", random_tensor(rng, {4, 6}));
  p.add("b1", random_tensor(rng, {6}));
  p.add("w2", random_tensor(rng, {6, 5}));
  p.add("b2", random_tensor(rng, {5}));
  p.add("w3", random_tensor(rng, {5, 2}));
  return p;
}

}  // namespace

TEST_CASE("random three-layer composition passes the finite-difference check") {
  std::mt19937_64 rng(3);
  const auto x = random_tensor(rng, {3, 4});
  const auto result = gradcheck(
      [x](ParameterSet<double>& p, Tape<double>* tape) { return three_layer(p, tape, x); },
      three_layer_params(9));
  CHECK(result.checked == 4 * 6 + 6 + 6 * 5 + 5 + 5 * 2);
  CHECK(result.max_rel_error <= 1e-4);
}

TEST_CASE("linear functions check to rounding error") {
  // Central differences carry no truncation error on a linear map, so a wide
  // step only shrinks the cancellation in f(+) - f(-).
  std::mt19937_64 rng(4);
  ParameterSet<double> p;
  p.add("w", random_tensor(rng, {6, 3}));
  const auto x = random_tensor(rng, {5, 6});
  GradcheckOptions opts;
  opts.epsilon = std::ldexp(1.0, -8);
  const auto r = gradcheck(
      [x](ParameterSet<double>& ps, Tape<double>* tape) {
        auto b = bind(ps, tape);
        return sum_all(matmul(x, b.at("w")));
      },
      p, opts);
  CAPTURE(r.max_rel_error);
  CHECK(r.max_rel_error <= 1e-10);
}

TEST_CASE("gradcheck skips entries straddling a kink") {
  ParameterSet<double> p;
  p.add("w", Tensor<double>(Shape{3}, std::vector<double>{3e-6, 0.5, -0.25}));
  const auto r = gradcheck(
      [](ParameterSet<double>& ps, Tape<double>* tape) {
        const auto w = bind(ps, tape).at("w");
        return sum_all(mul(relu(w), w));
      },
      p);
  CHECK(r.skipped_kinks == 1);
  CHECK(r.checked == 2);
  CHECK(r.max_rel_error <= 1e-8);
}

TEST_CASE("gradcheck refines sharply curved entries") {
  // sqrt(w^2 + 1e-8) at w = 2e-4 bends on a scale close to the step, so the
  // plain central difference is off by about 1e-3 relative.
  ParameterSet<double> p;
  p.add("w", Tensor<double>(Shape{1}, std::vector<double>{2e-4}));
  const ScalarFunction fn = [](ParameterSet<double>& ps, Tape<double>* tape) {
    const auto w = bind(ps, tape).at("w");
    return sum_all(sqrt(add_scalar(mul(w, w), 1e-8)));
  };
  GradcheckOptions plain;
  plain.refine = false;
  CHECK(gradcheck(fn, p, plain).max_rel_error > 1e-4);
  const auto r = gradcheck(fn, p);
  CHECK(r.refined == 1);
  CHECK(r.max_rel_error <= 1e-4);
}

TEST_CASE("gradcheck rejects non-finite functions") {
  ParameterSet<double> p;
  p.add("w", Tensor<double>(Shape{2}, -1.0));
  CHECK_THROWS_AS(gradcheck(
                      [](ParameterSet<double>& ps, Tape<double>* tape) {
                        return sum_all(log(bind(ps, tape).at("w")));
                      },
                      p),
                  NumericError);
}

TEST_CASE("every registered op passes the gradient check") {
  for (const auto& c : geolid::testing::make_op_cases(21)) {
    CAPTURE(op_name(c.kind));
    const auto r = geolid::testing::check_op(c);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("detach") {
  std::mt19937_64 rng(5);
  const auto w0 = random_tensor(rng, {3, 3});
  const auto x = random_tensor(rng, {2, 3});

  SUBCASE("values pass through unchanged") {
    Tape<double> tape;
    auto w = tape.leaf(w0, "w");
    auto t = matmul(x, w);
    auto d = detach(t);
    CHECK(d.to_vector() == t.to_vector());
    CHECK_FALSE(d.on_tape());
  }

  SUBCASE("a loss reaching t only through detach gives zero ancestor gradients") {
    Tape<double> tape;
    auto w = tape.leaf(w0, "w");
    auto t = tanh(matmul(x, w));
    auto g = tape.backward(sum_all(mul(detach(t), detach(t))));
    for (double v : g.at("w").data()) CHECK(v == 0.0);
  }

  SUBCASE("f(t) + g(detach(t)) has the gradient of f alone") {
    auto f = [](const Tensor<double>& t) { return sum_all(exp(t)); };
    auto gfun = [](const Tensor<double>& t) { return sum_all(mul(t, t)); };
    Gradients<double> both, alone;
    {
      Tape<double> tape;
      auto t = tanh(matmul(x, tape.leaf(w0, "w")));
      both = tape.backward(add(f(t), gfun(detach(t))));
    }
    {
      Tape<double> tape;
      auto t = tanh(matmul(x, tape.leaf(w0, "w")));
      alone = tape.backward(f(t));
    }
    CHECK(both.at("w").to_vector() == alone.at("w").to_vector());
  }
}

TEST_CASE("identical steps produce identical gradients") {
  std::mt19937_64 rng(6);
  const auto x = random_tensor(rng, {3, 4});
  auto params = three_layer_params(3);
  auto step = [&] {
    Tape<double> tape;
    return backward(three_layer(params, &tape, x), params);
  };
  const auto g1 = step();
  const auto g2 = step();
  for (const auto& [name, g] : g1) CHECK(g.to_vector() == g2.at(name).to_vector());
}

TEST_CASE("batchnorm running statistics") {
  Tensor<double> x(Shape{4, 2}, std::vector<double>{1, 10, 2, 20, 3, 30, 4, 40});
  Tensor<double> gamma(Shape{2}, 1.0), beta(Shape{2}, 0.0);
  std::vector<double> rm(2, 0.0), rv(2, 1.0);
  auto y = batchnorm(x, gamma, beta, BatchNormStats<double>{rm, rv}, {true, 0.1, 1e-5});
  CHECK(rm[0] == doctest::Approx(0.25));
  CHECK(rv[0] == doctest::Approx(0.9 + 0.1 * (5.0 / 3.0)));
  double col = 0;
  for (std::size_t r = 0; r < 4; ++r) col += y[r * 2];
  CHECK(std::abs(col) < 1e-12);

  SUBCASE("identical rows normalize to zero in training mode") {
    Tensor<double> same(Shape{3, 2}, std::vector<double>{1, 2, 1, 2, 1, 2});
    auto z = batchnorm(same, gamma, beta, BatchNormStats<double>{rm, rv}, {true, 0.1, 1e-5});
    for (double v : z.data()) CHECK(v == 0.0);
  }
  SUBCASE("inference mode uses the running statistics") {
    std::vector<double> m{1, 1}, v{4, 4};
    auto z = batchnorm(x, gamma, beta, BatchNormStats<double>{m, v}, {false, 0.1, 0.0});
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[1] == doctest::Approx(4.5));
  }
}

TEST_CASE("angular margin and cross entropy") {
  const std::vector<int> labels{1};
  Tensor<double> cosines(Shape{1, 3}, std::vector<double>{0.2, 0.6, -0.1});
  auto same = angular_margin<double>(cosines, labels, 0.0);
  CHECK(same.to_vector() == cosines.to_vector());
  auto m = angular_margin<double>(cosines, labels, 0.5);
  CHECK(m[1] == doctest::Approx(std::cos(std::acos(0.6) + 0.5)));
  CHECK(m[0] == 0.2);
  Tensor<double> far(Shape{1, 3}, std::vector<double>{0.0, -0.99, 0.0});
  CHECK(angular_margin<double>(far, labels, 0.5)[1] == -1.0);
  CHECK_THROWS_AS(cross_entropy<double>(cosines, std::vector<int>{3}), std::invalid_argument);
  const double ce = cross_entropy<double>(cosines, labels).item();
  const double z = std::exp(0.2) + std::exp(0.6) + std::exp(-0.1);
  CHECK(ce == doctest::Approx(-std::log(std::exp(0.6) / z)).epsilon(1e-14));
}

TEST_CASE("generic entry point covers every op kind") {
  const auto cases = geolid::testing::make_op_cases(1);
  CHECK(cases.size() == all_op_kinds().size());
  for (const auto& c : cases) {
    CAPTURE(op_name(c.kind));
    CHECK_NOTHROW(tensor_op<double>(c.kind, c.inputs, c.attrs));
  }
}
