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

#ifndef MCRF_MODEL_H_
#define MCRF_MODEL_H_

#include <cstddef>
#include <vector>

#include "mcrf/classifier.h"
#include "mcrf/config.h"
#include "mcrf/corpus.h"
#include "mcrf/crf_attention.h"
#include "mcrf/encoder.h"
#include "mcrf/tensor.h"

namespace mcrf {

// Architecture of one model. Ablations are already folded in: no_decay shows
// up as gamma 0, no_aspect_indicator as a shared indicator row, and
// no_structured_attention as mean pooling over r_t.
struct ModelOptions {
  std::size_t word_dim = 300;
  std::size_t aspect_dim = 50;
  std::size_t hidden = 64;
  std::size_t gru_layers = 1;
  std::size_t heads = 4;
  bool shared_transitions = false;
  bool structured_attention = true;
  IndicatorMode indicator = IndicatorMode::kInsideOutside;
  DecaySpec decay;
  double dropout = 0.0;
  bool train_embeddings = true;

  static ModelOptions from_config(const RunConfig& config, std::size_t max_length);
};

struct ModelOutput {
  Tensor logits;  // 1 x 3
  Tensor q;
  MultiHeadOutput attention;  // empty heads without structured attention
  Prediction prediction;
};

class Model {
 public:
  // `word_embeddings` becomes owned (aliased) by the model.
  static Model create(const ModelOptions& options, Tensor word_embeddings, Rng& rng);

  // With a dropout generator the pass runs in training mode; without one
  // dropout is the identity.
  ModelOutput forward(const AspectInstance& instance, Rng* dropout_rng = nullptr) const;
  Prediction predict(const AspectInstance& instance) const;

  // Tensors updated by the optimizer.
  std::vector<NamedTensor> parameters() const;
  // Every tensor needed to rebuild the model, trainable or not.
  std::vector<NamedTensor> tensors() const;

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  const ModelOptions& options() const { return options_; }
  const EncoderParams& encoder() const { return encoder_; }
  const MultiHeadParams& attention() const { return attention_; }
  const ClassifierParams& classifier() const { return classifier_; }

 private:
  ModelOptions options_;
  EncoderParams encoder_;
  MultiHeadParams attention_;
  ClassifierParams classifier_;
};

}  // namespace mcrf

#endif  // MCRF_MODEL_H_
