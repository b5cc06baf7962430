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

#include "mcrf/crf_oracle.h"

#include <cmath>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {

PlainPotentials PlainPotentials::from(const CrfPotentials& p) {
  PlainPotentials out;
  for (std::size_t t = 0; t < p.emissions.rows(); ++t) {
    out.emissions.push_back({p.emissions.at(t, 0), p.emissions.at(t, 1)});
  }
  for (std::size_t a = 0; a < 2; ++a) {
    out.start[a] = p.start.values()[a];
    out.end[a] = p.end.values()[a];
    for (std::size_t b = 0; b < 2; ++b) out.transitions[a][b] = p.transitions.at(a, b);
  }
  return out;
}

CrfPotentials PlainPotentials::to_tensors() const {
  std::vector<double> e;
  for (const auto& row : emissions) e.insert(e.end(), row.begin(), row.end());
  CrfPotentials p{
      Tensor::from({emissions.size(), 2}, std::move(e)),
      Tensor::from({2, 2}, {transitions[0][0], transitions[0][1], transitions[1][0],
                            transitions[1][1]}),
      Tensor::row_vector({start[0], start[1]}),
      Tensor::row_vector({end[0], end[1]})};
  for (Tensor* t : {&p.emissions, &p.transitions, &p.start, &p.end}) {
    t->set_requires_grad(true);
  }
  return p;
}

OracleResult brute_force_oracle(const PlainPotentials& potentials) {
  const std::size_t n = potentials.length();
  if (n == 0 || n > kOracleMaxLength) {
    throw ContractViolation(fmt::format(
        "brute_force_oracle: n = {} outside [1, {}]", n, kOracleMaxLength));
  }
  const std::size_t count = std::size_t{1} << n;
  // Bit t of `code` set means z_t = No.
  std::vector<long double> scores(count);
  long double best = -INFINITY;
  for (std::size_t code = 0; code < count; ++code) {
    auto label = [code](std::size_t t) { return (code >> t) & 1u; };
    long double s = potentials.start[label(0)];
    for (std::size_t t = 0; t < n; ++t) {
      s += potentials.emissions[t][label(t)];
      if (t + 1 < n) s += potentials.transitions[label(t)][label(t + 1)];
    }
    s += potentials.end[label(n - 1)];
    scores[code] = s;
    if (s > best) best = s;
  }

  long double z = 0.0L;
  std::vector<long double> yes_mass(n, 0.0L);
  for (std::size_t code = 0; code < count; ++code) {
    const long double w = std::exp(scores[code] - best);
    z += w;
    for (std::size_t t = 0; t < n; ++t) {
      if (((code >> t) & 1u) == 0) yes_mass[t] += w;
    }
  }

  OracleResult out;
  out.log_z = static_cast<double>(best + std::log(z));
  for (long double m : yes_mass) out.yes.push_back(static_cast<double>(m / z));
  return out;
}

}  // namespace mcrf
