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

#ifndef MCRF_CHECKPOINT_H_
#define MCRF_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mcrf/classifier.h"
#include "mcrf/config.h"
#include "mcrf/model.h"
#include "mcrf/vocab.h"

namespace mcrf {

// Layout (little-endian):
//   8 bytes  magic "MCRFCKPT"
//   u32      format version
//   u64+data canonical config JSON
//   u64+data metadata JSON (max_length, vocab hash/size, dev metrics, ...)
//   u64      vocabulary size, then u32+data per token in id order
//   u64      tensor count, then per tensor: u32+name, u64 rows, u64 cols,
//            rows*cols IEEE-754 doubles
inline constexpr std::string_view kCheckpointMagic = "MCRFCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::size_t max_length = 1;
  Metrics dev;
  int best_epoch = 0;
};

struct LoadedCheckpoint {
  RunConfig config;
  Vocabulary vocab;
  CheckpointMeta meta;
  Model model;
};

std::string serialize_checkpoint(const Model& model, const RunConfig& config,
                                 const Vocabulary& vocab, const CheckpointMeta& meta);
LoadedCheckpoint deserialize_checkpoint(std::string_view bytes);

// Writes through a temporary file and renames, so a failed save never leaves
// a partial checkpoint at `path`.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const RunConfig& config, const Vocabulary& vocab,
                     const CheckpointMeta& meta);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mcrf

#endif  // MCRF_CHECKPOINT_H_
