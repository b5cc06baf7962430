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

#ifndef MCRF_CLASSIFIER_H_
#define MCRF_CLASSIFIER_H_

#include <array>
#include <span>
#include <vector>

#include "mcrf/corpus.h"
#include "mcrf/crf_attention.h"
#include "mcrf/tensor.h"

namespace mcrf {

// Affine map onto the three polarities. Stored input-major (d x 3) so that
// logits = q W + b for a 1 x d row q.
struct ClassifierParams {
  Tensor weight;  // d x 3
  Tensor bias;    // 1 x 3

  std::size_t input_dim() const { return weight.rows(); }

  // Weight uniform in [-1/sqrt(d), 1/sqrt(d)], bias zero.
  static ClassifierParams create(std::size_t input_dim, Rng& rng);
  void collect(std::vector<NamedTensor>& out) const;
};

struct Prediction {
  std::array<double, kNumPolarities> probabilities{};
  Polarity label = Polarity::kPositive;
  MarginalTable marginals;
};

Tensor classifier_logits(const Tensor& q, const ClassifierParams& params);

// Softmax of the logits; argmax ties resolve to the earlier label.
Prediction predict(const Tensor& q, const ClassifierParams& params);
Prediction prediction_from_logits(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

// -log p_gold from logits, differentiable. When p_gold underflows the floor
// the loss is clamped to -log(1e-12) and a warning is logged.
Tensor nll_loss(const Tensor& logits, Polarity gold);
double nll_loss(const Prediction& prediction, Polarity gold);

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Macro F1 averages all three classes. A class with no predictions has
// precision 0, with no gold instances recall 0; F1 is 0 whenever
// precision + recall is 0.
Metrics metrics(std::span<const Polarity> predicted, std::span<const Polarity> gold);

}  // namespace mcrf

#endif  // MCRF_CLASSIFIER_H_
