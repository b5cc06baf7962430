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

#ifndef MCRF_SYNTHETIC_H_
#define MCRF_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "mcrf/corpus.h"

namespace mcrf {

// Generated review sentences with one to three aspects. Each aspect has a
// single opinion word within two tokens of it that fixes its polarity; the
// other aspects' opinion words in the same sentence act as distractors and
// are always at least four tokens away.
struct SyntheticOptions {
  std::size_t instances = 500;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<AspectInstance> instances;
  // Token index of the opinion word that determines each instance's label.
  std::vector<std::size_t> opinion_token;
};

SyntheticCorpus generate_synthetic(const SyntheticOptions& options);

}  // namespace mcrf

#endif  // MCRF_SYNTHETIC_H_
