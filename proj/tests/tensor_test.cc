// Copyright 2026 The MCRF Authors.
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

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "mcrf/errors.h"
#include "mcrf/grad_check.h"
#include "mcrf/tensor.h"
#include "test_util.h"

namespace mcrf {
namespace {

using testing::random_tensor;

// Contracts an op's output with fixed random weights so every output entry
// contributes to the gradient.
Tensor contract(const Tensor& y, const Tensor& w) { return sum(mul(y, w)); }

void check_primitive(const std::string& name,
                     const std::function<Tensor(std::span<const Tensor>)>& op,
                     std::vector<Tensor> inputs, Rng& rng) {
  const Tensor probe = op(inputs);
  const Tensor w = random_tensor(probe.shape(), rng, 0.5, 1.5);
  std::vector<NamedTensor> params;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    params.push_back({name + "." + std::to_string(i), inputs[i]});
  }
  const GradCheckReport report =
      grad_check([&] { return contract(op(inputs), w); }, params,
                 {.epsilon = 1e-5, .tolerance = 1e-5, .floor = 1e-3});
  INFO(name << " max rel error " << report.max_rel_error);
  CHECK(report.passed());
}

TEST_CASE("matmul agrees with a triple loop") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
    const Tensor a = random_tensor({m, k}, rng);
    const Tensor b = random_tensor({k, n}, rng);
    const Tensor c = matmul(a, b);
    REQUIRE(c.shape() == Shape{m, n});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
        CHECK(c.at(i, j) == doctest::Approx(acc).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("matmul names both shapes on mismatch") {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(std::string(e.category()) == "dimension");
  }
  CHECK_THROWS_AS(add(a, Tensor::zeros({3, 2})), DimensionError);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0}), DimensionError);
}

TEST_CASE("log_sum_exp of small vectors") {
  CHECK(log_sum_exp(Tensor::row_vector({0.0, 0.0})).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(Tensor::row_vector({1000.0, 1000.0})).item() ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(Tensor::row_vector({-1000.0, 0.0})).item() ==
        doctest::Approx(0.0));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(Tensor::row_vector({-inf, 2.0})).item() == 2.0);
  CHECK(std::isinf(log_sum_exp(Tensor::row_vector({-inf, -inf})).item()));
}

TEST_CASE("log_sum_exp is shift invariant") {
  Rng rng(11);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor v = random_tensor({1, 7}, rng, -5.0, 5.0);
    const double c = shift(rng);
    std::vector<double> shifted(v.values().begin(), v.values().end());
    for (double& x : shifted) x += c;
    const double lhs = log_sum_exp(Tensor::row_vector(shifted)).item();
    CHECK(std::abs(lhs - (log_sum_exp(v).item() + c)) < 1e-10);
  }
}

TEST_CASE("axis log_sum_exp reduces the right dimension") {
  const Tensor m = Tensor::from({2, 3}, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  const Tensor by_rows = log_sum_exp(m, Axis::kRows);
  const Tensor by_cols = log_sum_exp(m, Axis::kCols);
  REQUIRE(by_rows.shape() == Shape{1, 3});
  REQUIRE(by_cols.shape() == Shape{1, 2});
  for (std::size_t c = 0; c < 3; ++c) {
    const double expect = std::log(std::exp(m.at(0, c)) + std::exp(m.at(1, c)));
    CHECK(by_rows.at(0, c) == doctest::Approx(expect).epsilon(1e-14));
  }
  for (std::size_t r = 0; r < 2; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < 3; ++c) acc += std::exp(m.at(r, c));
    CHECK(by_cols.at(0, r) == doctest::Approx(std::log(acc)).epsilon(1e-14));
  }
}

TEST_CASE("softmax rows sum to one and ignore shifts") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor a = random_tensor({3, 5}, rng, -20.0, 20.0);
    const Tensor s = softmax(a);
    const Tensor shifted = softmax(add(a, Tensor::filled(a.shape(), 7.5)));
    for (std::size_t r = 0; r < 3; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < 5; ++c) {
        total += s.at(r, c);
        CHECK(s.at(r, c) >= 0.0);
        CHECK(std::abs(s.at(r, c) - shifted.at(r, c)) < 1e-12);
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
    const Tensor ls = log_softmax(a);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(std::abs(std::exp(ls.values()[i]) - s.values()[i]) < 1e-12);
    }
  }
}

TEST_CASE("concat and split are inverse, bit for bit") {
  Rng rng(9);
  const Tensor a = random_tensor({2, 3}, rng);
  const Tensor b = random_tensor({2, 1}, rng);
  const Tensor c = random_tensor({2, 4}, rng);
  const std::vector<Tensor> parts{a, b, c};
  const Tensor joined = concat_cols(parts);
  REQUIRE(joined.shape() == Shape{2, 8});
  const std::vector<std::size_t> widths{3, 1, 4};
  const std::vector<Tensor> back = split_cols(joined, widths);
  REQUIRE(back.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back[k].shape() == parts[k].shape());
    for (std::size_t i = 0; i < parts[k].size(); ++i) {
      CHECK(back[k].values()[i] == parts[k].values()[i]);
    }
  }
  const std::vector<std::size_t> wrong{3, 3};
  CHECK_THROWS_AS(split_cols(joined, wrong), DimensionError);
}

TEST_CASE("primitive gradients match central differences") {
  Rng rng(17);
  auto rt = [&rng](Shape s) { return random_tensor(s, rng); };
  using In = std::span<const Tensor>;

  check_primitive("matmul", [](In x) { return matmul(x[0], x[1]); },
                  {rt({3, 4}), rt({4, 2})}, rng);
  check_primitive("add", [](In x) { return add(x[0], x[1]); }, {rt({2, 3}), rt({2, 3})},
                  rng);
  check_primitive("sub", [](In x) { return sub(x[0], x[1]); }, {rt({2, 3}), rt({2, 3})},
                  rng);
  check_primitive("mul", [](In x) { return mul(x[0], x[1]); }, {rt({2, 3}), rt({2, 3})},
                  rng);
  check_primitive("add_row", [](In x) { return add_row(x[0], x[1]); },
                  {rt({4, 3}), rt({1, 3})}, rng);
  check_primitive("add_col", [](In x) { return add_col(x[0], x[1]); },
                  {rt({4, 3}), rt({1, 4})}, rng);
  check_primitive("sub_scalar", [](In x) { return sub_scalar(x[0], x[1]); },
                  {rt({2, 3}), rt({1, 1})}, rng);
  check_primitive("scale", [](In x) { return scale(x[0], -1.7); }, {rt({2, 3})}, rng);
  const std::vector<double> factors{0.25, 1.0, 0.5};
  check_primitive("scale_rows", [&](In x) { return scale_rows(x[0], factors); },
                  {rt({3, 2})}, rng);
  check_primitive("sigmoid", [](In x) { return sigmoid(x[0]); }, {rt({2, 4})}, rng);
  check_primitive("tanh", [](In x) { return tanh(x[0]); }, {rt({2, 4})}, rng);
  check_primitive("exp", [](In x) { return exp(x[0]); }, {rt({2, 4})}, rng);
  check_primitive("log", [](In x) { return log(x[0]); },
                  {random_tensor({2, 4}, rng, 0.5, 2.0)}, rng);
  check_primitive("softmax", [](In x) { return softmax(x[0]); }, {rt({3, 4})}, rng);
  check_primitive("log_softmax", [](In x) { return log_softmax(x[0]); }, {rt({3, 4})},
                  rng);
  check_primitive("log_sum_exp", [](In x) { return log_sum_exp(x[0]); }, {rt({2, 5})},
                  rng);
  check_primitive("lse_rows", [](In x) { return log_sum_exp(x[0], Axis::kRows); },
                  {rt({3, 4})}, rng);
  check_primitive("lse_cols", [](In x) { return log_sum_exp(x[0], Axis::kCols); },
                  {rt({3, 4})}, rng);
  check_primitive("sum", [](In x) { return sum(x[0]); }, {rt({3, 4})}, rng);
  check_primitive("mean_rows", [](In x) { return mean_rows(x[0]); }, {rt({3, 4})}, rng);
  check_primitive("concat_cols", [](In x) { return concat_cols(x); },
                  {rt({2, 3}), rt({2, 1})}, rng);
  check_primitive("concat_rows", [](In x) { return concat_rows(x); },
                  {rt({1, 3}), rt({2, 3})}, rng);
  check_primitive("slice_cols", [](In x) { return slice_cols(x[0], 1, 2); },
                  {rt({3, 4})}, rng);
  check_primitive("row", [](In x) { return row(x[0], 2); }, {rt({3, 4})}, rng);
  check_primitive("element", [](In x) { return element(x[0], 1, 3); }, {rt({3, 4})},
                  rng);
  check_primitive("reshape", [](In x) { return reshape(x[0], {2, 6}); }, {rt({3, 4})},
                  rng);
  const std::vector<int> ids{2, 0, 2, 1};
  check_primitive("gather_rows", [&](In x) { return gather_rows(x[0], ids); },
                  {rt({3, 4})}, rng);
}

TEST_CASE("gradients accumulate across uses of one tensor") {
  Tensor x = Tensor::row_vector({1.5, -2.0});
  x.set_requires_grad(true);
  Tape tape;
  {
    TapeScope scope(tape);
    const Tensor y = sum(add(mul(x, x), scale(x, 3.0)));
    tape.backward(y);
  }
  CHECK(x.grad()[0] == doctest::Approx(2 * 1.5 + 3.0));
  CHECK(x.grad()[1] == doctest::Approx(2 * -2.0 + 3.0));
}

TEST_CASE("no tape means no recording") {
  Tensor x = Tensor::row_vector({1.0, 2.0});
  x.set_requires_grad(true);
  const Tensor y = sum(mul(x, x));
  CHECK(y.item() == 5.0);
  CHECK(active_tape() == nullptr);
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("grad_check on a quadratic and a constant") {
  Tensor x = Tensor::row_vector({0.3, -1.2, 2.0});
  const std::vector<NamedTensor> params{{"x", x}};
  const GradCheckReport quad = grad_check([&] { return sum(mul(x, x)); }, params);
  CHECK(quad.passed());
  CHECK(quad.coordinates == 3);
  CHECK(quad.max_rel_error < 1e-8);

  // Constant loss: analytic and numeric gradients are both exactly zero.
  const GradCheckReport flat =
      grad_check([&] { return Tensor::scalar(4.0); }, params);
  CHECK(flat.passed());
  CHECK(flat.max_rel_error == 0.0);
  CHECK_FALSE(x.requires_grad());

  CHECK_THROWS_AS(grad_check([&] { return sum(x); }, params, {.epsilon = 1e-2}),
                  ContractViolation);
  CHECK_THROWS_AS(grad_check([&] { return log(Tensor::scalar(-1.0)); }, params),
                  NumericError);
}

TEST_CASE("grad_check reports a wrong gradient") {
  // d/dx of x^2 recorded as 3x: the checker must notice.
  Tensor x = Tensor::row_vector({1.0, -0.5});
  auto bad_square = [&] {
    Tensor y = Tensor::scalar(x.values()[0] * x.values()[0] + x.values()[1] * x.values()[1]);
    if (Tape* tape = active_tape()) {
      Tensor out = y;
      out.set_requires_grad(true);
      tape->record([out, xs = x]() mutable {
        const double g = out.grad()[0];
        auto gx = xs.mutable_grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * 3.0 * xs.values()[i];
      });
    }
    return y;
  };
  const std::vector<NamedTensor> params{{"x", x}};
  const GradCheckReport report = grad_check(bad_square, params);
  CHECK_FALSE(report.passed());
  CHECK(report.failures.size() == 2);
  CHECK(report.failures[0].numeric == doctest::Approx(2.0));
}

TEST_CASE("dropout") {
  Rng rng(1);
  const Tensor a = Tensor::filled({10, 10}, 1.0);
  CHECK(dropout(a, 0.0, rng).same_storage(a));
  const Tensor d = dropout(a, 0.5, rng);
  std::size_t kept = 0;
  for (double v : d.values()) {
    CHECK((v == 0.0 || v == 2.0));
    kept += v != 0.0;
  }
  CHECK(kept > 20);
  CHECK(kept < 80);
  CHECK_THROWS_AS(dropout(a, 1.0, rng), ContractViolation);
  CHECK_THROWS_AS(dropout(a, -0.1, rng), ContractViolation);
}

TEST_CASE("clone is independent, copies alias") {
  Tensor a = Tensor::row_vector({1.0, 2.0});
  Tensor alias = a;
  Tensor copy = a.clone();
  a.mutable_values()[0] = 9.0;
  CHECK(alias.values()[0] == 9.0);
  CHECK(copy.values()[0] == 1.0);
  CHECK(alias.same_storage(a));
  CHECK_FALSE(copy.same_storage(a));
}

}  // namespace
}  // namespace mcrf
