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

#include "mcrf/grad_check.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {
namespace {

double evaluate(const std::function<Tensor()>& loss, const char* where) {
  const Tensor value = loss();
  if (value.size() != 1) {
    throw DimensionError(
        fmt::format("grad_check: loss is {}, not a scalar", value.shape().str()));
  }
  const double v = value.item();
  if (!std::isfinite(v)) {
    throw NumericError(fmt::format("grad_check: non-finite loss {} ({})", v, where));
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& loss,
                           std::span<const NamedTensor> params,
                           const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-6 && options.epsilon <= 1e-3)) {
    throw ContractViolation(
        fmt::format("grad_check: epsilon {} outside [1e-6, 1e-3]", options.epsilon));
  }

  std::vector<bool> previous_flags;
  for (const NamedTensor& p : params) {
    previous_flags.push_back(p.tensor.requires_grad());
    Tensor t = p.tensor;
    t.set_requires_grad(true);
    t.zero_grad();
  }

  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor value = loss();
    if (!std::isfinite(value.item())) {
      throw NumericError(
          fmt::format("grad_check: non-finite loss {} at base point", value.item()));
    }
    tape.backward(value);
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad()) {
      const auto g = t.grad();
      std::copy(g.begin(), g.end(), analytic.begin());
    }
    GradCheckReport::Group group{params[k].name, t.size(), 0.0};
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + options.epsilon;
      const double up = evaluate(loss, "+epsilon");
      values[i] = original - options.epsilon;
      const double down = evaluate(loss, "-epsilon");
      values[i] = original;

      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double denom = std::max(
          {std::abs(analytic[i]), std::abs(numeric), options.floor});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      group.max_rel_error = std::max(group.max_rel_error, rel);
      if (rel > options.tolerance) {
        report.failures.push_back({params[k].name, i, analytic[i], numeric, rel});
      }
    }
    report.coordinates += group.coordinates;
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(group);
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    t.zero_grad();
    t.set_requires_grad(previous_flags[k]);
  }
  return report;
}

}  // namespace mcrf
