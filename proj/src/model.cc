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

#include "mcrf/model.h"

#include <algorithm>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {

ModelOptions ModelOptions::from_config(const RunConfig& config, std::size_t max_length) {
  ModelOptions o;
  o.word_dim = static_cast<std::size_t>(config.word_dim);
  o.aspect_dim = static_cast<std::size_t>(config.aspect_dim);
  o.hidden = static_cast<std::size_t>(config.hidden);
  o.gru_layers = static_cast<std::size_t>(config.gru_layers);
  o.heads = static_cast<std::size_t>(config.crf_heads);
  o.shared_transitions = config.shared_transitions;
  o.structured_attention = !config.no_structured_attention;
  o.indicator = config.no_aspect_indicator ? IndicatorMode::kShared
                                           : IndicatorMode::kInsideOutside;
  o.decay = {config.no_decay ? 0 : config.gamma, std::max<std::size_t>(max_length, 1)};
  o.dropout = config.dropout;
  o.train_embeddings = config.embeddings_trainable;
  return o;
}

Model Model::create(const ModelOptions& options, Tensor word_embeddings, Rng& rng) {
  if (word_embeddings.cols() != options.word_dim) {
    throw DimensionError(fmt::format("model: embeddings {} but word_dim {}",
                                     word_embeddings.shape().str(), options.word_dim));
  }
  Model m;
  m.options_ = options;
  word_embeddings.set_requires_grad(options.train_embeddings);
  m.encoder_ = EncoderParams::create(std::move(word_embeddings), options.aspect_dim,
                                     options.hidden, options.gru_layers, rng);
  const std::size_t rep_dim = m.encoder_.output_dim();
  std::size_t q_dim = rep_dim;
  if (options.structured_attention) {
    m.attention_ =
        MultiHeadParams::create(rep_dim, options.heads, options.shared_transitions, rng);
    q_dim = rep_dim * options.heads;
  }
  m.classifier_ = ClassifierParams::create(q_dim, rng);
  return m;
}

ModelOutput Model::forward(const AspectInstance& instance, Rng* dropout_rng) const {
  Tensor x = embed_input(instance, encoder_, options_.indicator);
  if (dropout_rng != nullptr) x = dropout(x, options_.dropout, *dropout_rng);
  Tensor h = bigru_encode(x, encoder_);
  if (dropout_rng != nullptr) h = dropout(h, options_.dropout, *dropout_rng);
  const Tensor r = apply_decay(h, instance, options_.decay);

  ModelOutput out;
  if (options_.structured_attention) {
    out.attention = multi_head(r, attention_);
    out.q = out.attention.q;
  } else {
    out.q = mean_rows(r);
  }
  out.logits = classifier_logits(out.q, classifier_);
  out.prediction = prediction_from_logits(out.logits.values());
  out.prediction.marginals = marginal_table(out.attention.heads);
  return out;
}

Prediction Model::predict(const AspectInstance& instance) const {
  return forward(instance).prediction;
}

std::vector<NamedTensor> Model::tensors() const {
  std::vector<NamedTensor> out;
  encoder_.collect(out);
  attention_.collect(out);
  classifier_.collect(out);
  return out;
}

std::vector<NamedTensor> Model::parameters() const {
  std::vector<NamedTensor> out;
  for (NamedTensor& t : tensors()) {
    if (t.tensor.requires_grad()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<double>> Model::snapshot() const {
  std::vector<std::vector<double>> values;
  for (const NamedTensor& t : tensors()) {
    const auto v = t.tensor.values();
    values.emplace_back(v.begin(), v.end());
  }
  return values;
}

void Model::restore(const std::vector<std::vector<double>>& values) {
  std::vector<NamedTensor> all = tensors();
  if (values.size() != all.size()) {
    throw DimensionError(fmt::format("restore: {} tensors for a model with {}",
                                     values.size(), all.size()));
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    auto dst = all[k].tensor.mutable_values();
    if (dst.size() != values[k].size()) {
      throw DimensionError(fmt::format("restore: {} has {} values, got {}",
                                       all[k].name, dst.size(), values[k].size()));
    }
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

}  // namespace mcrf
