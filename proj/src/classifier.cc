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

#include "mcrf/classifier.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mcrf/errors.h"

namespace mcrf {

ClassifierParams ClassifierParams::create(std::size_t input_dim, Rng& rng) {
  const double range = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<double> w(input_dim * kNumPolarities);
  for (double& x : w) x = u(rng);
  ClassifierParams p;
  p.weight = Tensor::from({input_dim, kNumPolarities}, std::move(w));
  p.bias = Tensor::zeros({1, kNumPolarities});
  p.weight.set_requires_grad(true);
  p.bias.set_requires_grad(true);
  return p;
}

void ClassifierParams::collect(std::vector<NamedTensor>& out) const {
  out.push_back({"classifier.weight", weight});
  out.push_back({"classifier.bias", bias});
}

Tensor classifier_logits(const Tensor& q, const ClassifierParams& params) {
  if (q.size() != params.input_dim()) {
    throw DimensionError(fmt::format("classifier: input {} vs weight {}",
                                     q.shape().str(), params.weight.shape().str()));
  }
  return add(matmul(reshape(q, {1, q.size()}), params.weight), params.bias);
}

Prediction prediction_from_logits(std::span<const double> logits) {
  if (logits.size() != kNumPolarities) {
    throw DimensionError(fmt::format("prediction: {} logits", logits.size()));
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  Prediction p;
  for (int k = 0; k < kNumPolarities; ++k) {
    p.probabilities[k] = std::exp(logits[k] - mx);
    total += p.probabilities[k];
  }
  for (double& x : p.probabilities) x /= total;
  const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
  p.label = static_cast<Polarity>(best);
  return p;
}

Prediction predict(const Tensor& q, const ClassifierParams& params) {
  return prediction_from_logits(classifier_logits(q, params).values());
}

Tensor nll_loss(const Tensor& logits, Polarity gold) {
  const auto g = static_cast<std::size_t>(gold);
  if (logits.size() != kNumPolarities || g >= kNumPolarities) {
    throw ContractViolation("nll_loss: expects 3 logits and a valid gold label");
  }
  const Tensor log_p = element(log_softmax(reshape(logits, {1, kNumPolarities})), 0, g);
  if (log_p.item() < std::log(kProbabilityFloor)) {
    spdlog::warn("nll_loss: p_gold {:.3g} below floor, loss clamped",
                 std::exp(log_p.item()));
    return Tensor::scalar(-std::log(kProbabilityFloor));
  }
  return scale(log_p, -1.0);
}

double nll_loss(const Prediction& prediction, Polarity gold) {
  const double p = prediction.probabilities[static_cast<std::size_t>(gold)];
  if (p < kProbabilityFloor) {
    spdlog::warn("nll_loss: p_gold {:.3g} below floor, loss clamped", p);
    return -std::log(kProbabilityFloor);
  }
  return -std::log(p);
}

Metrics metrics(std::span<const Polarity> predicted, std::span<const Polarity> gold) {
  if (predicted.size() != gold.size() || gold.empty()) {
    throw ContractViolation(fmt::format("metrics: {} predictions for {} golds",
                                        predicted.size(), gold.size()));
  }
  std::array<std::size_t, kNumPolarities> tp{}, pred_count{}, gold_count{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto p = static_cast<std::size_t>(predicted[i]);
    const auto g = static_cast<std::size_t>(gold[i]);
    ++pred_count[p];
    ++gold_count[g];
    if (p == g) {
      ++tp[g];
      ++correct;
    }
  }
  double f1_sum = 0.0;
  for (int k = 0; k < kNumPolarities; ++k) {
    const double precision =
        pred_count[k] ? static_cast<double>(tp[k]) / static_cast<double>(pred_count[k]) : 0.0;
    const double recall =
        gold_count[k] ? static_cast<double>(tp[k]) / static_cast<double>(gold_count[k]) : 0.0;
    if (precision + recall > 0.0) {
      f1_sum += 2.0 * precision * recall / (precision + recall);
    }
  }
  return {static_cast<double>(correct) / static_cast<double>(gold.size()),
          f1_sum / kNumPolarities};
}

}  // namespace mcrf
