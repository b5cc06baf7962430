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

#ifndef MCRF_CRF_ATTENTION_H_
#define MCRF_CRF_ATTENTION_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mcrf/tensor.h"

namespace mcrf {

// Latent opinion-span label of one token.
enum class SpanLabel : std::size_t { kYes = 0, kNo = 1 };
inline constexpr std::size_t kNumSpanLabels = 2;

// Potentials of one linear-chain CRF over {Yes, No}. The boundary states
// START and END carry no emission; their transitions live in `start` and
// `end`.
struct CrfPotentials {
  Tensor emissions;    // n x 2, columns (Yes, No)
  Tensor transitions;  // 2 x 2, [from][to]
  Tensor start;        // 1 x 2, START -> label
  Tensor end;          // 1 x 2, label -> END

  std::size_t length() const { return emissions.rows(); }

  // Full 4 x 4 matrix over (START, Yes, No, END); transitions into START and
  // out of END, and START -> END, are -inf.
  std::array<std::array<double, 4>, 4> transition_matrix() const;
};

// T[START, z_1] + sum T[z_t, z_t+1] + T[z_n, END] + sum E[t, z_t].
double score_sequence(const CrfPotentials& potentials, std::span<const SpanLabel> labels);

// Differentiable log partition via the forward recursion in log space.
Tensor log_partition(const CrfPotentials& potentials);

struct CrfMarginals {
  Tensor yes;    // 1 x n, P(z_t = Yes | x)
  Tensor table;  // n x 2, columns (Yes, No)
  Tensor log_z;  // 1 x 1
};

// Forward-backward in log space, built from tape primitives so gradients
// reach emissions and transitions.
CrfMarginals marginals(const CrfPotentials& potentials);

// s = sum_t P(z_t = Yes) r_t  (1 x n times n x d -> 1 x d).
Tensor pool_sentence(const Tensor& yes, const Tensor& r);

// One CRF head: a linear emission layer on r_t plus its transition scores.
struct CrfHead {
  Tensor emit_weight;  // d x 2
  Tensor emit_bias;    // 1 x 2
  Tensor transitions;  // 2 x 2
  Tensor start;        // 1 x 2
  Tensor end;          // 1 x 2

  CrfPotentials potentials(const Tensor& r) const;
};

struct MultiHeadParams {
  std::vector<CrfHead> heads;
  // When set every head aliases the transition tensors of head 0.
  bool shared_transitions = false;

  // Emission weights uniform in [-0.1, 0.1]; biases and transitions zero.
  static MultiHeadParams create(std::size_t input_dim, std::size_t num_heads,
                                bool shared_transitions, Rng& rng);

  void collect(std::vector<NamedTensor>& out) const;
};

struct MultiHeadOutput {
  Tensor q;  // 1 x (heads * d), heads concatenated in order
  std::vector<CrfMarginals> heads;
};

MultiHeadOutput multi_head(const Tensor& r, const MultiHeadParams& params);

// Per-head Yes marginals and log partitions as plain numbers.
struct MarginalTable {
  std::vector<std::vector<double>> yes;
  std::vector<double> log_z;

  std::size_t heads() const { return yes.size(); }
};

MarginalTable marginal_table(std::span<const CrfMarginals> heads);

}  // namespace mcrf

#endif  // MCRF_CRF_ATTENTION_H_
