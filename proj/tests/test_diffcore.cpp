#include "rgan/diffcore.hpp"
#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rgan;
using rgan::testing::check_parameter_gradients;
using rgan::testing::max_relative_error;
using rgan::testing::numeric_gradient;

namespace {

Matrix m(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) out(r, c++) = v;
    ++r;
  }
  return out;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = u(rng);
  return out;
}

}  // namespace

TEST_CASE("forward ops match their definitions") {
  Tape tape;
  CHECK(tape.value(tape.sigmoid(tape.constant(m({{0.0}}))))(0, 0) == 0.5);
  CHECK(tape.value(tape.relu(tape.constant(m({{-2.0}}))))(0, 0) == 0.0);
  CHECK(tape.scalar(tape.mean(tape.constant(m({{1, 2}, {3, 4}})))) == 2.5);

  Var x = tape.constant(m({{1, 2}, {3, 4}}));
  Var bias = tape.constant(m({{10, 20}}));
  CHECK(tape.value(tape.add(x, bias)) == m({{11, 22}, {13, 24}}));
  CHECK(tape.value(tape.matmul(x, x)) == m({{7, 10}, {15, 22}}));
  CHECK(tape.value(tape.scale(x, -2.0)) == m({{-2, -4}, {-6, -8}}));
  CHECK(tape.value(tape.safe_log(tape.constant(m({{0.0}}))))(0, 0) ==
        doctest::Approx(std::log(kSafeLogEpsilon)));
  CHECK(tape.value(tape.clamp(tape.constant(m({{-1.0, 0.5, 2.0}})), 0.0, 1.0)) == m({{0.0, 0.5, 1.0}}));
}

TEST_CASE("sigmoid stays finite for large magnitudes") {
  Tape tape;
  const Matrix v = tape.value(tape.sigmoid(tape.constant(m({{-800.0, 800.0}}))));
  CHECK(v(0, 0) == 0.0);
  CHECK(v(0, 1) == 1.0);
}

TEST_CASE("shape mismatches and non-finite values are rejected") {
  Tape tape;
  Var a = tape.constant(Matrix::Ones(2, 3));
  Var b = tape.constant(Matrix::Ones(2, 3));
  CHECK_THROWS_AS(tape.matmul(a, b), ShapeError);
  CHECK_THROWS_AS(tape.add(a, tape.constant(Matrix::Ones(1, 2))), ShapeError);
  CHECK_THROWS_AS(tape.sub(a, tape.constant(Matrix::Ones(3, 2))), ShapeError);
  CHECK_THROWS_AS(tape.constant(m({{std::nan("")}})), NumericalError);
  CHECK_THROWS_AS(tape.scale(a, 1e308 * 10), NumericalError);
}

TEST_CASE("backward on x^2") {
  Tape tape;
  Var x = tape.variable(m({{3.0}}));
  Var loss = tape.mean(tape.mul(x, x));
  tape.backward(loss);
  CHECK(tape.grad(x)(0, 0) == 6.0);
}

TEST_CASE("parameters off the loss path get zero gradient") {
  ParameterSet params;
  auto& used = params.add("used", m({{2.0}}));
  auto& unused = params.add("unused", m({{5.0}}));
  Tape tape;
  Var u = tape.parameter(used);
  tape.parameter(unused);
  tape.backward(tape.mean(tape.scale(u, 3.0)));
  CHECK(used.grad(0, 0) == 3.0);
  CHECK(unused.grad(0, 0) == 0.0);
  CHECK(unused.grad_ready);
}

TEST_CASE("backward contract errors") {
  Tape tape;
  Var x = tape.variable(Matrix::Ones(2, 2));
  CHECK_THROWS_AS(tape.backward(x), ShapeError);
  Var loss = tape.mean(x);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), std::logic_error);
  CHECK_THROWS_AS(tape.mean(x), std::logic_error);
}

TEST_CASE("relu and hinge subgradient at zero is zero") {
  Tape tape;
  Var x = tape.variable(m({{0.0, 1.0, -1.0}}));
  tape.backward(tape.mean(tape.relu(x)));
  CHECK(tape.grad(x) == m({{0.0, 1.0 / 3.0, 0.0}}));
}

TEST_CASE("safe_log gradient vanishes in the clamped region") {
  Tape tape;
  Var x = tape.variable(m({{1e-9, 0.5}}));
  tape.backward(tape.mean(tape.safe_log(x)));
  CHECK(tape.grad(x)(0, 0) == 0.0);
  CHECK(tape.grad(x)(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("two-layer MLP gradients match central differences") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    ParameterSet params;
    params.add("w0", random_matrix(5, 7, rng));
    params.add("b0", random_matrix(1, 7, rng));
    params.add("w1", random_matrix(7, 3, rng));
    params.add("b1", random_matrix(1, 3, rng));
    const Matrix input = random_matrix(4, 5, rng);
    auto build = [&](Tape& t) {
      Var h = t.tanh(t.add(t.matmul(t.constant(input), t.parameter(params["w0"])),
                           t.parameter(params["b0"])));
      Var out = t.sigmoid(t.add(t.matmul(h, t.parameter(params["w1"])), t.parameter(params["b1"])));
      return t.mean(t.safe_log(out));
    };
    CHECK(check_parameter_gradients(params, build) < 1e-4);
  }
}

// Property: random compositions of every supported op on inputs of dimension
// <= 8 agree with finite differences.
TEST_CASE("random op compositions match central differences") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> pick(0, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index rows = dim(rng);
    const Eigen::Index cols = dim(rng);
    Matrix a0 = random_matrix(rows, cols, rng, 1.5);
    Matrix b0 = random_matrix(rows, cols, rng, 1.5);
    Matrix w0 = random_matrix(cols, cols, rng, 1.0);
    std::vector<int> ops;
    for (int i = 0; i < 4; ++i) ops.push_back(pick(rng));

    auto build = [&](Tape& t, Var a, Var b, Var w) {
      Var x = a;
      for (int op : ops) {
        switch (op) {
          case 0: x = t.matmul(x, w); break;
          case 1: x = t.add(x, b); break;
          case 2: x = t.tanh(x); break;
          case 3: x = t.sigmoid(x); break;
          case 4: x = t.relu(t.add_scalar(x, 0.25)); break;
          case 5: x = t.safe_log(t.add_scalar(t.mul(x, x), 0.5)); break;
          case 6: x = t.sub(x, b); break;
          case 7: x = t.scale(x, -0.7); break;
          default: x = t.mul(x, b); break;
        }
      }
      return t.mean(x);
    };

    Tape tape;
    Var a = tape.variable(a0);
    Var b = tape.variable(b0);
    Var w = tape.variable(w0);
    tape.backward(build(tape, a, b, w));

    auto value_with = [&](const Matrix& av, const Matrix& bv, const Matrix& wv) {
      Tape t;
      return t.scalar(build(t, t.constant(av), t.constant(bv), t.constant(wv)));
    };
    const Matrix na = numeric_gradient(a0, [&] { return value_with(a0, b0, w0); });
    const Matrix nb = numeric_gradient(b0, [&] { return value_with(a0, b0, w0); });
    const Matrix nw = numeric_gradient(w0, [&] { return value_with(a0, b0, w0); });
    INFO("trial " << trial);
    CHECK(max_relative_error(tape.grad(a), na) < 1e-4);
    CHECK(max_relative_error(tape.grad(b), nb) < 1e-4);
    CHECK(max_relative_error(tape.grad(w), nw) < 1e-4);
  }
}

TEST_CASE("identical op sequences are bit-identical") {
  auto run = [] {
    std::mt19937_64 rng(5);
    Tape t;
    Var x = t.variable(random_matrix(6, 4, rng));
    Var w = t.variable(random_matrix(4, 3, rng));
    Var loss = t.mean(t.tanh(t.matmul(x, w)));
    t.backward(loss);
    return std::make_pair(t.grad(x), t.grad(w));
  };
  const auto first = run();
  const auto second = run();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
}

TEST_CASE("sgd step") {
  ParameterSet params;
  auto& p = params.add("p", m({{1.0}}));
  p.grad(0, 0) = 0.5;
  p.grad_ready = true;
  optimizer_step(params, OptimizerKind::sgd, 0.1);
  CHECK(params["p"].value(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(params["p"].grad(0, 0) == 0.0);
  CHECK_FALSE(params["p"].grad_ready);

  params["p"].grad_ready = true;
  optimizer_step(params, OptimizerKind::sgd, 0.1);
  CHECK(params["p"].value(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("optimizer step without gradients is rejected") {
  ParameterSet params;
  params.add("p", m({{1.0}}));
  CHECK_THROWS_AS(optimizer_step(params, OptimizerKind::adam, 0.1), std::logic_error);
}

TEST_CASE("adam first step has magnitude lr regardless of gradient scale") {
  // Expected values evaluated independently from the bias-corrected update
  // lr * g / (|g| + eps) with betas (0.9, 0.999), eps 1e-8.
  struct Case {
    double grad;
    double expected_step;
  };
  for (auto c : {Case{1e-3, 0.00999990000099999}, Case{250.0, 0.009999999999599997}}) {
    ParameterSet params;
    auto& p = params.add("p", m({{0.0}}));
    p.grad(0, 0) = c.grad;
    p.grad_ready = true;
    optimizer_step(params, OptimizerKind::adam, 0.01);
    CHECK(-params["p"].value(0, 0) == doctest::Approx(c.expected_step).epsilon(1e-12));
  }
}

TEST_CASE("parameter names are unique") {
  ParameterSet params;
  params.add("w", Matrix::Zero(1, 1));
  CHECK_THROWS_AS(params.add("w", Matrix::Zero(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(params["missing"], std::out_of_range);
}
