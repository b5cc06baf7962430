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
#include <random>
#include <vector>

#include "doctest.h"
#include "mcrf/encoder.h"
#include "mcrf/errors.h"
#include "mcrf/grad_check.h"
#include "test_util.h"

namespace mcrf {
namespace {

using testing::random_tensor;
using testing::toy_instance;

// Scalar GRU step written from the gate equations, one unit at a time.
// Gate blocks in the packed weights are ordered (reset, update, candidate).
std::vector<double> reference_step(const GruCell& c, const std::vector<double>& x,
                                   const std::vector<double>& h) {
  const std::size_t H = h.size();
  auto input = [&](std::size_t col) {
    double s = c.b_input.at(0, col);
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * c.w_input.at(k, col);
    return s;
  };
  auto recur = [&](std::size_t col) {
    double s = c.b_hidden.at(0, col);
    for (std::size_t k = 0; k < H; ++k) s += h[k] * c.w_hidden.at(k, col);
    return s;
  };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> out(H);
  for (std::size_t u = 0; u < H; ++u) {
    const double r = sig(input(u) + recur(u));
    const double z = sig(input(H + u) + recur(H + u));
    const double n = std::tanh(input(2 * H + u) + r * recur(2 * H + u));
    out[u] = (1.0 - z) * n + z * h[u];
  }
  return out;
}

GruCell random_cell(std::size_t d, std::size_t H, Rng& rng) {
  return {random_tensor({d, 3 * H}, rng, -0.5, 0.5), random_tensor({H, 3 * H}, rng, -0.5, 0.5),
          random_tensor({1, 3 * H}, rng, -0.5, 0.5), random_tensor({1, 3 * H}, rng, -0.5, 0.5)};
}

TEST_CASE("decay hand values") {
  const DecaySpec spec{2, 20};
  CHECK(std::abs(decay_weight(3, 5, 6, spec) - 0.81) < 1e-12);
  CHECK(std::abs(decay_weight(10, 5, 6, spec) - 0.64) < 1e-12);
  for (std::size_t t = 5; t <= 6; ++t) CHECK(decay_weight(t, 5, 6, spec) == 1.0);
  CHECK(decay_weight(0, 0, 0, {3, 1}) == 1.0);
}

TEST_CASE("decay never reaches zero inside the clamp") {
  // Distance L-1 is the largest the clamp allows.
  const DecaySpec spec{1, 10};
  CHECK(decay_weight(0, 9, 9, spec) == doctest::Approx(0.1));
  CHECK(decay_weight(0, 50, 50, spec) == doctest::Approx(0.1));
}

TEST_CASE("decay is monotone in gamma and distance") {
  Rng rng(23);
  std::uniform_int_distribution<std::size_t> length(1, 80);
  std::uniform_int_distribution<int> gamma(0, 4);
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t L = length(rng);
    std::uniform_int_distribution<std::size_t> pos(0, L - 1);
    std::size_t i = pos(rng), j = pos(rng);
    if (i > j) std::swap(i, j);
    const std::size_t t = pos(rng);
    const int g = gamma(rng);
    const double w = decay_weight(t, i, j, {g, L});
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    CHECK(decay_weight(t, i, j, {g + 1, L}) <= w + 1e-12);
    if (t > j) CHECK(decay_weight(t - 1, i, j, {g, L}) >= w - 1e-12);
    if (t < i) CHECK(decay_weight(t + 1, i, j, {g, L}) >= w - 1e-12);
  }
}

TEST_CASE("gamma zero and all-aspect sentences leave states unchanged") {
  Rng rng(2);
  const Tensor h = random_tensor({6, 4}, rng);
  const AspectInstance inst = toy_instance(6, 2, 3);
  const Tensor same = apply_decay(h, inst, {0, 6});
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(same.values()[k] == h.values()[k]);

  const AspectInstance all = toy_instance(6, 0, 5);
  const Tensor also = apply_decay(h, all, {3, 6});
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(also.values()[k] == h.values()[k]);

  CHECK_THROWS_AS(apply_decay(h, toy_instance(5, 0, 0), {1, 6}), DimensionError);
}

TEST_CASE("gru_direction matches the scalar reference") {
  Rng rng(31);
  const std::size_t d = 3, H = 4, n = 5;
  const GruCell cell = random_cell(d, H, rng);
  const Tensor x = random_tensor({n, d}, rng);

  for (bool reverse : {false, true}) {
    const Tensor out = gru_direction(x, cell, reverse);
    REQUIRE(out.shape() == Shape{n, H});
    std::vector<double> h(H, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t t = reverse ? n - 1 - step : step;
      std::vector<double> xt(d);
      for (std::size_t k = 0; k < d; ++k) xt[k] = x.at(t, k);
      h = reference_step(cell, xt, h);
      for (std::size_t u = 0; u < H; ++u) CHECK(std::abs(out.at(t, u) - h[u]) < 1e-14);
    }
  }
}

TEST_CASE("the backward direction reads the sentence reversed") {
  Rng rng(8);
  const GruCell cell = random_cell(2, 3, rng);
  const Tensor x = random_tensor({4, 2}, rng);
  std::vector<Tensor> rows;
  for (std::size_t t = 4; t-- > 0;) rows.push_back(row(x, t));
  const Tensor flipped = concat_rows(rows);
  const Tensor back = gru_direction(x, cell, true);
  const Tensor fwd = gru_direction(flipped, cell, false);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t u = 0; u < 3; ++u) CHECK(back.at(t, u) == fwd.at(3 - t, u));
  }
}

TEST_CASE("zero parameters give zero states") {
  Rng rng(1);
  EncoderParams p = EncoderParams::create(Tensor::zeros({10, 3}), 2, 4, 2, rng);
  for (GruLayer& layer : p.layers) {
    for (GruCell* c : {&layer.forward, &layer.backward}) {
      for (Tensor* t : {&c->w_input, &c->w_hidden, &c->b_input, &c->b_hidden}) {
        for (double& v : t->mutable_values()) v = 0.0;
      }
    }
  }
  const Tensor h = bigru_encode(random_tensor({5, 5}, rng), p);
  CHECK(h.shape() == Shape{5, 8});
  for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("shapes for one token and for stacked layers") {
  Rng rng(4);
  const EncoderParams one = EncoderParams::create(random_tensor({12, 6}, rng), 3, 5, 1, rng);
  CHECK(one.input_dim() == 9);
  const AspectInstance single = toy_instance(1, 0, 0);
  const Tensor x = embed_input(single, one);
  CHECK(x.shape() == Shape{1, 9});
  CHECK(bigru_encode(x, one).shape() == Shape{1, 10});

  const EncoderParams deep = EncoderParams::create(random_tensor({12, 6}, rng), 3, 5, 3, rng);
  CHECK(deep.layers[1].forward.w_input.rows() == 10);
  CHECK(bigru_encode(embed_input(toy_instance(7, 2, 4), deep), deep).shape() ==
        Shape{7, 10});
}

TEST_CASE("indicator rows follow the aspect span") {
  Rng rng(6);
  const EncoderParams p = EncoderParams::create(random_tensor({12, 2}, rng), 3, 2, 1, rng);
  const AspectInstance inst = toy_instance(5, 1, 2);
  const Tensor x = embed_input(inst, p);
  for (std::size_t t = 0; t < 5; ++t) {
    const std::size_t row_id = inst.in_aspect(t) ? 0 : 1;
    for (std::size_t k = 0; k < 3; ++k) CHECK(x.at(t, 2 + k) == p.indicator.at(row_id, k));
    CHECK(x.at(t, 0) == p.word_embeddings.at(inst.tokens[t], 0));
  }
  const Tensor shared = embed_input(inst, p, IndicatorMode::kShared);
  for (std::size_t t = 0; t < 5; ++t) CHECK(shared.at(t, 2) == p.indicator.at(0, 0));

  AspectInstance unindexed = inst;
  unindexed.tokens.clear();
  CHECK_THROWS_AS(embed_input(unindexed, p), ContractViolation);
  AspectInstance outside = inst;
  outside.aspect_end = 9;
  CHECK_THROWS_AS(embed_input(outside, p), ContractViolation);
}

TEST_CASE("encoder gradients") {
  Rng rng(12);
  const EncoderParams p = EncoderParams::create(random_tensor({8, 3}, rng), 2, 3, 2, rng);
  const AspectInstance inst = toy_instance(4, 1, 1);
  const Tensor w = random_tensor({4, 6}, rng);
  std::vector<NamedTensor> params;
  p.collect(params);
  const GradCheckReport report = grad_check(
      [&] { return sum(mul(apply_decay(bigru_encode(embed_input(inst, p), p), inst, {2, 4}), w)); },
      params);
  INFO("max rel error " << report.max_rel_error);
  CHECK(report.passed());
  CHECK(report.groups.size() == params.size());
}

}  // namespace
}  // namespace mcrf
