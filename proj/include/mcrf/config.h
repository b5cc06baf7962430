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

#ifndef MCRF_CONFIG_H_
#define MCRF_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace mcrf {

enum class Ablation { kNone, kAspectIndicator, kDecay, kStructuredAttention };

std::string_view ablation_name(Ablation a);
// Accepts the command line spellings: indicator, decay, attention, none.
Ablation parse_ablation(std::string_view name);

enum class SelectionMetric { kAccuracy, kMacroF1 };

// Hyperparameters, ablation switches and data paths of one training run.
// Serialized as a flat JSON object with sorted keys; unknown keys are
// rejected.
struct RunConfig {
  int hidden = 64;
  int batch = 64;
  double dropout = 0.5;
  int aspect_dim = 50;
  int gamma = 1;
  int gru_layers = 1;
  int crf_heads = 4;
  double lr = 0.008;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  int word_dim = 300;
  double clip_norm = 5.0;

  bool no_aspect_indicator = false;
  bool no_decay = false;
  bool no_structured_attention = false;

  bool embeddings_trainable = true;
  bool shared_transitions = false;
  SelectionMetric selection = SelectionMetric::kAccuracy;
  // Adds wall-clock seconds to each epoch record; off by default because it
  // makes logs differ between otherwise identical runs.
  bool log_seconds = false;

  std::string dataset = "dev";
  std::string train_path;
  std::string test_path;
  std::string embeddings_path;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  Ablation ablation() const;
  RunConfig with_ablation(Ablation a) const;

  nlohmann::json to_json() const;
  // Canonical text: compact JSON, keys sorted.
  std::string canonical() const;
  // FNV-1a of canonical(), 16 hex digits.
  std::string digest() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace mcrf

#endif  // MCRF_CONFIG_H_
