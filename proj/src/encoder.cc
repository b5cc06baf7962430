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

#include "mcrf/encoder.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {
namespace {

Tensor uniform(Shape shape, double range, Rng& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<double> v(shape.size());
  for (double& x : v) x = u(rng);
  Tensor t = Tensor::from(shape, std::move(v));
  t.set_requires_grad(true);
  return t;
}

GruCell make_cell(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  const double range = 1.0 / std::sqrt(static_cast<double>(hidden));
  GruCell cell;
  cell.w_input = uniform({input_dim, 3 * hidden}, range, rng);
  cell.w_hidden = uniform({hidden, 3 * hidden}, range, rng);
  cell.b_input = uniform({1, 3 * hidden}, range, rng);
  cell.b_hidden = uniform({1, 3 * hidden}, range, rng);
  return cell;
}

void collect_cell(const GruCell& cell, const std::string& prefix,
                  std::vector<NamedTensor>& out) {
  out.push_back({prefix + ".w_input", cell.w_input});
  out.push_back({prefix + ".w_hidden", cell.w_hidden});
  out.push_back({prefix + ".b_input", cell.b_input});
  out.push_back({prefix + ".b_hidden", cell.b_hidden});
}

}  // namespace

EncoderParams EncoderParams::create(Tensor word_embeddings, std::size_t aspect_dim,
                                    std::size_t hidden, std::size_t num_layers,
                                    Rng& rng) {
  if (hidden == 0 || num_layers == 0 || aspect_dim == 0) {
    throw ContractViolation("encoder needs positive hidden, layer and indicator sizes");
  }
  EncoderParams p;
  p.word_embeddings = std::move(word_embeddings);
  p.hidden = hidden;
  p.indicator = uniform({2, aspect_dim}, 0.1, rng);
  std::size_t in = p.input_dim();
  for (std::size_t l = 0; l < num_layers; ++l) {
    GruLayer layer;
    layer.forward = make_cell(in, hidden, rng);
    layer.backward = make_cell(in, hidden, rng);
    p.layers.push_back(std::move(layer));
    in = 2 * hidden;
  }
  return p;
}

void EncoderParams::collect(std::vector<NamedTensor>& out) const {
  out.push_back({"encoder.word_embeddings", word_embeddings});
  out.push_back({"encoder.indicator", indicator});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    collect_cell(layers[l].forward, fmt::format("encoder.gru{}.fwd", l), out);
    collect_cell(layers[l].backward, fmt::format("encoder.gru{}.bwd", l), out);
  }
}

double decay_weight(std::size_t t, std::size_t i, std::size_t j, const DecaySpec& spec) {
  if (spec.max_length == 0 || spec.gamma < 0 || i > j) {
    throw ContractViolation(fmt::format(
        "decay: invalid spec (L={}, gamma={}) or span [{}, {}]", spec.max_length,
        spec.gamma, i, j));
  }
  if (t >= i && t <= j) return 1.0;
  if (spec.gamma == 0) return 1.0;
  const std::size_t distance = t < i ? i - t : t - j;
  const std::size_t clamped = std::min(distance, spec.max_length - 1);
  const double length = static_cast<double>(spec.max_length);
  const double base = (length - static_cast<double>(clamped)) / length;
  return std::pow(base, spec.gamma);
}

std::vector<double> decay_weights(const AspectInstance& instance, const DecaySpec& spec) {
  std::vector<double> w(instance.length());
  for (std::size_t t = 0; t < w.size(); ++t) {
    w[t] = decay_weight(t, instance.aspect_start, instance.aspect_end, spec);
  }
  return w;
}

Tensor embed_input(const AspectInstance& instance, const EncoderParams& params,
                   IndicatorMode mode) {
  const std::size_t n = instance.length();
  if (n == 0) throw ContractViolation("embed_input: empty sentence");
  if (instance.tokens.size() != n) {
    throw ContractViolation("embed_input: instance has not been indexed");
  }
  if (instance.aspect_start > instance.aspect_end || instance.aspect_end >= n) {
    throw ContractViolation(fmt::format("embed_input: aspect [{}, {}] outside n={}",
                                        instance.aspect_start, instance.aspect_end, n));
  }
  std::vector<int> rows(n, 0);
  if (mode == IndicatorMode::kInsideOutside) {
    for (std::size_t t = 0; t < n; ++t) rows[t] = instance.in_aspect(t) ? 0 : 1;
  }
  const Tensor parts[] = {gather_rows(params.word_embeddings, instance.tokens),
                          gather_rows(params.indicator, rows)};
  return concat_cols(parts);
}

Tensor gru_direction(const Tensor& x, const GruCell& cell, bool reverse) {
  const std::size_t n = x.rows();
  const std::size_t hidden = cell.w_hidden.rows();
  if (x.cols() != cell.w_input.rows()) {
    throw DimensionError(fmt::format("gru: input {} vs weights {}", x.shape().str(),
                                     cell.w_input.shape().str()));
  }
  // Input projections for every position at once.
  const Tensor projected = add_row(matmul(x, cell.w_input), cell.b_input);

  std::vector<Tensor> states(n);
  Tensor h = Tensor::zeros({1, hidden});
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    const Tensor xt = row(projected, t);
    const Tensor ht = add(matmul(h, cell.w_hidden), cell.b_hidden);
    const Tensor gates =
        sigmoid(add(slice_cols(xt, 0, 2 * hidden), slice_cols(ht, 0, 2 * hidden)));
    const Tensor reset = slice_cols(gates, 0, hidden);
    const Tensor update = slice_cols(gates, hidden, hidden);
    const Tensor candidate = tanh(add(slice_cols(xt, 2 * hidden, hidden),
                                      mul(reset, slice_cols(ht, 2 * hidden, hidden))));
    // h' = (1 - z) * n + z * h
    h = add(candidate, mul(update, sub(h, candidate)));
    states[t] = h;
  }
  return concat_rows(states);
}

Tensor bigru_encode(const Tensor& x, const EncoderParams& params) {
  if (x.rows() == 0) throw ContractViolation("bigru_encode: empty sequence");
  Tensor current = x;
  for (const GruLayer& layer : params.layers) {
    const Tensor both[] = {gru_direction(current, layer.forward, false),
                           gru_direction(current, layer.backward, true)};
    current = concat_cols(both);
  }
  return current;
}

Tensor apply_decay(const Tensor& h, const AspectInstance& instance, const DecaySpec& spec) {
  if (h.rows() != instance.length()) {
    throw DimensionError(fmt::format("apply_decay: {} for a {}-token instance",
                                     h.shape().str(), instance.length()));
  }
  const std::vector<double> w = decay_weights(instance, spec);
  return scale_rows(h, w);
}

}  // namespace mcrf
