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

#ifndef MCRF_COMMANDS_H_
#define MCRF_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrf/classifier.h"
#include "mcrf/config.h"

namespace mcrf {

// One result line: percentages with two decimals.
struct ReportRow {
  std::string dataset;
  double accuracy = 0.0;  // fraction
  double macro_f1 = 0.0;  // fraction
  std::string config_digest;
  std::uint64_t seed = 0;

  std::string format() const;
  static std::string header();
};

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  ReportRow dev;
  std::optional<ReportRow> test;
};

// Trains, writes <out_dir>/model.ckpt and <out_dir>/train_log.jsonl and
// prints the dev row (plus a test row when the config names a test corpus).
TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       std::ostream& out);

ReportRow cmd_eval(const std::filesystem::path& checkpoint,
                   const std::filesystem::path& test_corpus, std::ostream& out);

struct ExplainRecord {
  std::vector<std::string> tokens;
  std::size_t aspect_start = 0;
  std::size_t aspect_end = 0;
  std::vector<std::vector<double>> marginals;  // heads x n, P(Yes)
  Prediction prediction;

  nlohmann::json to_json() const;
  // Header of tokens, then one row per head.
  std::string to_tsv() const;
};

// `char_start`/`char_end` delimit the aspect in code points, end exclusive.
ExplainRecord cmd_explain(const std::filesystem::path& checkpoint, const std::string& text,
                          std::size_t char_start, std::size_t char_end, std::ostream& out,
                          const std::optional<std::filesystem::path>& json_path = {});

struct SweepRow {
  int heads = 0;
  Metrics dev;
  std::optional<Metrics> test;
};

// One model per head count, in the order given. Writes a TSV table.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::span<const int> heads,
                                std::ostream& out);

struct AblationOutcome {
  ReportRow dev;
  std::optional<ReportRow> test;
};

AblationOutcome cmd_ablate(const RunConfig& config, Ablation flag, std::ostream& out);

// Positive / neutral / negative counts per corpus. With `split_seed` each
// corpus is also shown as its train/dev partition.
void cmd_stats(std::span<const std::filesystem::path> corpora,
               std::optional<std::uint64_t> split_seed, std::ostream& out);

void cmd_grid(const RunConfig& config, const nlohmann::json& grid, std::ostream& out);

void cmd_synth(const std::filesystem::path& path, std::size_t count, std::uint64_t seed);

}  // namespace mcrf

#endif  // MCRF_COMMANDS_H_
