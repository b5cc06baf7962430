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

#ifndef MCRF_TRAINER_H_
#define MCRF_TRAINER_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrf/checkpoint.h"
#include "mcrf/classifier.h"
#include "mcrf/config.h"
#include "mcrf/corpus.h"
#include "mcrf/model.h"
#include "mcrf/vocab.h"

namespace mcrf {

struct Dataset {
  Vocabulary vocab;
  EmbeddingMatrix embeddings;
  std::vector<AspectInstance> train;
  std::vector<AspectInstance> dev;
  std::vector<AspectInstance> test;
  // Longest sentence over every loaded split; the decay length L.
  std::size_t max_length = 1;
  DropReport train_report;
  DropReport test_report;
};

// Splits one sixth of `pool` off as dev (seeded by config.seed), builds the
// vocabulary over all instances, initializes word vectors (from
// config.embeddings_path when set) and indexes every split.
Dataset build_dataset(std::span<const AspectInstance> pool,
                      std::span<const AspectInstance> test, const RunConfig& config);

// Parses config.train_path and, if set, config.test_path, then build_dataset.
Dataset prepare_dataset(const RunConfig& config);

// Indexes `instances` with `vocab` and checks them against the model.
std::vector<AspectInstance> index_for_model(std::vector<AspectInstance> instances,
                                            const Vocabulary& vocab);

Metrics evaluate(const Model& model, std::span<const AspectInstance> instances,
                 std::vector<Prediction>* predictions = nullptr);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  Metrics dev;
  double seconds = 0.0;
  int clipped_steps = 0;
  std::optional<std::size_t> aborted_batch;

  nlohmann::json to_json(bool with_seconds) const;
};

struct TrainResult {
  Model model;  // best-dev parameters
  Metrics best_dev;
  int best_epoch = 0;
  std::vector<EpochRecord> epochs;
  // One JSON object per epoch.
  std::string log_jsonl;

  CheckpointMeta meta(std::size_t max_length) const {
    return {max_length, best_dev, best_epoch};
  }
};

// Mini-batch Adam on the mean NLL with dev-set early stopping. Deterministic
// in (config, dataset).
TrainResult train(const RunConfig& config, const Dataset& data);

struct LeaderboardEntry {
  RunConfig config;
  Metrics dev;
  int best_epoch = 0;
};

// Expands `grid` (object of field -> array of values) into the cartesian
// product over `base`, trains each candidate and ranks them by dev accuracy,
// then dev macro-F1, then smaller hidden size.
std::vector<LeaderboardEntry> grid_search(const RunConfig& base,
                                          const nlohmann::json& grid,
                                          const Dataset& data);
std::vector<RunConfig> expand_grid(const RunConfig& base, const nlohmann::json& grid);

}  // namespace mcrf

#endif  // MCRF_TRAINER_H_
