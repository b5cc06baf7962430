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

#ifndef MCRF_GRAD_CHECK_H_
#define MCRF_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mcrf/tensor.h"

namespace mcrf {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
};

struct GradCheckReport {
  struct Coordinate {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
  };
  struct Group {
    std::string param;
    std::size_t coordinates = 0;
    double max_rel_error = 0.0;
  };

  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::vector<Group> groups;
  std::vector<Coordinate> failures;

  bool passed() const { return failures.empty(); }
};

// Compares tape gradients of `loss` against central finite differences on
// every coordinate of every tensor in `params`. `loss` must be deterministic
// and return a 1 x 1 tensor; it is invoked once under a tape and twice per
// coordinate without one. Parameters are restored on return.
GradCheckReport grad_check(const std::function<Tensor()>& loss,
                           std::span<const NamedTensor> params,
                           const GradCheckOptions& options = {});

}  // namespace mcrf

#endif  // MCRF_GRAD_CHECK_H_
