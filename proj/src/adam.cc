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

#include "mcrf/adam.h"

#include <cmath>

namespace mcrf {

Adam::Adam(std::vector<NamedTensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const NamedTensor& p : params_) {
    first_.emplace_back(p.tensor.size(), 0.0);
    second_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correct1 = 1.0 - std::pow(options_.beta1, t);
  const double correct2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor p = params_[k].tensor;
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto v = p.mutable_values();
    auto& m1 = first_[k];
    auto& m2 = second_[k];
    for (std::size_t i = 0; i < v.size(); ++i) {
      m1[i] = options_.beta1 * m1[i] + (1.0 - options_.beta1) * g[i];
      m2[i] = options_.beta2 * m2[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double m_hat = m1[i] / correct1;
      const double v_hat = m2[i] / correct2;
      v[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (NamedTensor& p : params_) p.tensor.zero_grad();
}

double Adam::grad_norm() const {
  double total = 0.0;
  for (const NamedTensor& p : params_) {
    for (double g : p.tensor.grad()) total += g * g;
  }
  return std::sqrt(total);
}

bool Adam::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm <= 0.0 || norm <= max_norm) return false;
  const double factor = max_norm / norm;
  for (NamedTensor& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double& g : p.tensor.mutable_grad()) g *= factor;
  }
  return true;
}

}  // namespace mcrf
