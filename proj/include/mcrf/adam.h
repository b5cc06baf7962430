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

#ifndef MCRF_ADAM_H_
#define MCRF_ADAM_H_

#include <cstddef>
#include <vector>

#include "mcrf/tensor.h"

namespace mcrf {

struct AdamOptions {
  double lr = 0.008;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments. Parameters without a gradient buffer are
// left untouched by a step.
class Adam {
 public:
  Adam(std::vector<NamedTensor> params, AdamOptions options);

  void step();
  void zero_grad();

  // Global L2 norm of all gradients.
  double grad_norm() const;
  // Rescales gradients so their global norm is at most max_norm. Returns true
  // when scaling happened.
  bool clip_grad_norm(double max_norm);

  std::size_t steps() const { return steps_; }
  const std::vector<NamedTensor>& params() const { return params_; }

 private:
  std::vector<NamedTensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::size_t steps_ = 0;
};

}  // namespace mcrf

#endif  // MCRF_ADAM_H_
