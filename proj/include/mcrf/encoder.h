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

#ifndef MCRF_ENCODER_H_
#define MCRF_ENCODER_H_

#include <cstddef>
#include <vector>

#include "mcrf/corpus.h"
#include "mcrf/tensor.h"

namespace mcrf {

// One GRU direction. Gate blocks are laid out [reset | update | candidate]
// along the 3H columns.
struct GruCell {
  Tensor w_input;   // d_in x 3H
  Tensor w_hidden;  // H x 3H
  Tensor b_input;   // 1 x 3H
  Tensor b_hidden;  // 1 x 3H
};

struct GruLayer {
  GruCell forward;
  GruCell backward;
};

struct EncoderParams {
  // Shared with the EmbeddingMatrix it was built from.
  Tensor word_embeddings;
  // Row 0: inside the aspect, row 1: outside.
  Tensor indicator;
  std::vector<GruLayer> layers;
  std::size_t hidden = 0;

  std::size_t word_dim() const { return word_embeddings.cols(); }
  std::size_t aspect_dim() const { return indicator.cols(); }
  std::size_t input_dim() const { return word_dim() + aspect_dim(); }
  std::size_t output_dim() const { return 2 * hidden; }

  // GRU weights uniform in [-1/sqrt(H), 1/sqrt(H)], indicator uniform in
  // [-0.1, 0.1]. Draw order is fixed so a seed pins every value.
  static EncoderParams create(Tensor word_embeddings, std::size_t aspect_dim,
                              std::size_t hidden, std::size_t num_layers, Rng& rng);

  void collect(std::vector<NamedTensor>& out) const;
};

struct DecaySpec {
  // 0 disables decay.
  int gamma = 1;
  // Longest sentence seen when the model was built.
  std::size_t max_length = 1;
};

// Position weight of token t for the aspect [i, j]: 1 inside the span,
// ((L - d) / L)^gamma at distance d outside it. d is clamped to L - 1 so the
// weight stays >= (1/L)^gamma for sentences longer than L.
double decay_weight(std::size_t t, std::size_t i, std::size_t j, const DecaySpec& spec);
std::vector<double> decay_weights(const AspectInstance& instance, const DecaySpec& spec);

enum class IndicatorMode {
  kInsideOutside,
  // Every token uses row 0; aspect position is invisible to the encoder.
  kShared,
};

// n x (word_dim + aspect_dim): word vector followed by the indicator row.
Tensor embed_input(const AspectInstance& instance, const EncoderParams& params,
                   IndicatorMode mode = IndicatorMode::kInsideOutside);

// Runs one direction over the rows of x (n x d_in) from a zero initial state.
// Output row t is the hidden state after reading position t, in input order.
Tensor gru_direction(const Tensor& x, const GruCell& cell, bool reverse);

// n x 2H stack of [forward ; backward] hidden states, layers applied in order.
Tensor bigru_encode(const Tensor& x, const EncoderParams& params);

// r_t = f(t) h_t. The factors are constants of the instance.
Tensor apply_decay(const Tensor& h, const AspectInstance& instance, const DecaySpec& spec);

}  // namespace mcrf

#endif  // MCRF_ENCODER_H_
