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

#ifndef MCRF_CRF_ORACLE_H_
#define MCRF_CRF_ORACLE_H_

#include <array>
#include <cstddef>
#include <vector>

#include "mcrf/crf_attention.h"

namespace mcrf {

// CRF potentials as plain numbers, independent of the tensor machinery.
struct PlainPotentials {
  std::vector<std::array<double, 2>> emissions;  // per position (Yes, No)
  std::array<std::array<double, 2>, 2> transitions{};
  std::array<double, 2> start{};
  std::array<double, 2> end{};

  std::size_t length() const { return emissions.size(); }

  static PlainPotentials from(const CrfPotentials& p);
  // Leaf tensors with requires_grad set.
  CrfPotentials to_tensors() const;
};

struct OracleResult {
  double log_z = 0.0;
  std::vector<double> yes;
};

inline constexpr std::size_t kOracleMaxLength = 12;

// Enumerates all 2^n label sequences in extended precision. Refuses
// n > 12 or n == 0 with a ContractViolation.
OracleResult brute_force_oracle(const PlainPotentials& potentials);

}  // namespace mcrf

#endif  // MCRF_CRF_ORACLE_H_
