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

#include "mcrf/crf_attention.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {
namespace {

void check_potentials(const CrfPotentials& p) {
  if (p.emissions.rows() == 0 || p.emissions.cols() != kNumSpanLabels) {
    throw DimensionError(
        fmt::format("crf: emissions must be n x 2, got {}", p.emissions.shape().str()));
  }
  if (p.transitions.shape() != Shape{2, 2} || p.start.size() != 2 || p.end.size() != 2) {
    throw DimensionError(fmt::format("crf: transitions {}, start {}, end {}",
                                     p.transitions.shape().str(),
                                     p.start.shape().str(), p.end.shape().str()));
  }
}

}  // namespace

std::array<std::array<double, 4>, 4> CrfPotentials::transition_matrix() const {
  constexpr double kMasked = -std::numeric_limits<double>::infinity();
  std::array<std::array<double, 4>, 4> m;
  for (auto& r : m) r.fill(kMasked);
  // 0 = START, 1 = Yes, 2 = No, 3 = END
  for (std::size_t a = 0; a < 2; ++a) {
    m[0][a + 1] = start.values()[a];
    m[a + 1][3] = end.values()[a];
    for (std::size_t b = 0; b < 2; ++b) m[a + 1][b + 1] = transitions.at(a, b);
  }
  return m;
}

double score_sequence(const CrfPotentials& potentials, std::span<const SpanLabel> labels) {
  check_potentials(potentials);
  const std::size_t n = potentials.length();
  if (labels.size() != n) {
    throw ContractViolation(
        fmt::format("score_sequence: {} labels for {} positions", labels.size(), n));
  }
  auto idx = [](SpanLabel l) {
    const auto i = static_cast<std::size_t>(l);
    if (i >= kNumSpanLabels) throw ContractViolation("score_sequence: invalid label");
    return i;
  };
  double score = potentials.start.values()[idx(labels[0])];
  for (std::size_t t = 0; t < n; ++t) {
    score += potentials.emissions.at(t, idx(labels[t]));
    if (t + 1 < n) score += potentials.transitions.at(idx(labels[t]), idx(labels[t + 1]));
  }
  score += potentials.end.values()[idx(labels[n - 1])];
  return score;
}

namespace {

// alpha_t(y) = E[t, y] + logsumexp_y' (alpha_{t-1}(y') + T[y', y])
std::vector<Tensor> forward_messages(const CrfPotentials& p) {
  const std::size_t n = p.length();
  std::vector<Tensor> alpha(n);
  alpha[0] = add(reshape(p.start, {1, 2}), row(p.emissions, 0));
  for (std::size_t t = 1; t < n; ++t) {
    const Tensor reach = log_sum_exp(add_col(p.transitions, alpha[t - 1]), Axis::kRows);
    alpha[t] = add(row(p.emissions, t), reach);
  }
  return alpha;
}

}  // namespace

Tensor log_partition(const CrfPotentials& potentials) {
  check_potentials(potentials);
  const std::vector<Tensor> alpha = forward_messages(potentials);
  return log_sum_exp(add(alpha.back(), reshape(potentials.end, {1, 2})));
}

CrfMarginals marginals(const CrfPotentials& potentials) {
  check_potentials(potentials);
  const std::size_t n = potentials.length();
  const std::vector<Tensor> alpha = forward_messages(potentials);
  const Tensor end = reshape(potentials.end, {1, 2});
  const Tensor log_z = log_sum_exp(add(alpha.back(), end));

  // beta_t(y) = logsumexp_y' (T[y, y'] + E[t+1, y'] + beta_{t+1}(y'))
  std::vector<Tensor> beta(n);
  beta[n - 1] = end;
  for (std::size_t t = n - 1; t-- > 0;) {
    const Tensor ahead = add(row(potentials.emissions, t + 1), beta[t + 1]);
    beta[t] = log_sum_exp(add_row(potentials.transitions, ahead), Axis::kCols);
  }

  const Tensor table =
      exp(sub_scalar(add(concat_rows(alpha), concat_rows(beta)), log_z));
  return {reshape(slice_cols(table, 0, 1), {1, n}), table, log_z};
}

Tensor pool_sentence(const Tensor& yes, const Tensor& r) {
  if (yes.size() != r.rows()) {
    throw DimensionError(fmt::format("pool_sentence: marginals {} vs representations {}",
                                     yes.shape().str(), r.shape().str()));
  }
  return matmul(reshape(yes, {1, yes.size()}), r);
}

CrfPotentials CrfHead::potentials(const Tensor& r) const {
  return {add_row(matmul(r, emit_weight), emit_bias), transitions, start, end};
}

MultiHeadParams MultiHeadParams::create(std::size_t input_dim, std::size_t num_heads,
                                        bool shared_transitions, Rng& rng) {
  if (num_heads == 0) throw ContractViolation("multi_head: need at least one head");
  auto param = [](Tensor t) {
    t.set_requires_grad(true);
    return t;
  };
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  MultiHeadParams p;
  p.shared_transitions = shared_transitions;
  for (std::size_t k = 0; k < num_heads; ++k) {
    CrfHead head;
    std::vector<double> w(input_dim * 2);
    for (double& x : w) x = u(rng);
    head.emit_weight = param(Tensor::from({input_dim, 2}, std::move(w)));
    head.emit_bias = param(Tensor::zeros({1, 2}));
    if (shared_transitions && k > 0) {
      head.transitions = p.heads[0].transitions;
      head.start = p.heads[0].start;
      head.end = p.heads[0].end;
    } else {
      head.transitions = param(Tensor::zeros({2, 2}));
      head.start = param(Tensor::zeros({1, 2}));
      head.end = param(Tensor::zeros({1, 2}));
    }
    p.heads.push_back(std::move(head));
  }
  return p;
}

void MultiHeadParams::collect(std::vector<NamedTensor>& out) const {
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const std::string prefix = fmt::format("crf{}", k);
    out.push_back({prefix + ".emit_weight", heads[k].emit_weight});
    out.push_back({prefix + ".emit_bias", heads[k].emit_bias});
    if (shared_transitions && k > 0) continue;
    out.push_back({prefix + ".transitions", heads[k].transitions});
    out.push_back({prefix + ".start", heads[k].start});
    out.push_back({prefix + ".end", heads[k].end});
  }
}

MultiHeadOutput multi_head(const Tensor& r, const MultiHeadParams& params) {
  if (params.heads.empty()) throw ContractViolation("multi_head: no heads");
  MultiHeadOutput out;
  std::vector<Tensor> pooled;
  pooled.reserve(params.heads.size());
  for (const CrfHead& head : params.heads) {
    CrfMarginals m = marginals(head.potentials(r));
    pooled.push_back(pool_sentence(m.yes, r));
    out.heads.push_back(std::move(m));
  }
  out.q = concat_cols(pooled);
  return out;
}

MarginalTable marginal_table(std::span<const CrfMarginals> heads) {
  MarginalTable table;
  for (const CrfMarginals& m : heads) {
    const auto yes = m.yes.values();
    table.yes.emplace_back(yes.begin(), yes.end());
    table.log_z.push_back(m.log_z.item());
  }
  return table;
}

}  // namespace mcrf
