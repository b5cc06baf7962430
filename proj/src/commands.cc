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

#include "mcrf/commands.h"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mcrf/checkpoint.h"
#include "mcrf/errors.h"
#include "mcrf/synthetic.h"
#include "mcrf/trainer.h"

namespace mcrf {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

ReportRow row_for(std::string dataset, const Metrics& m, const RunConfig& config) {
  return {std::move(dataset), m.accuracy, m.macro_f1, config.digest(), config.seed};
}

std::string split_label(const RunConfig& config, std::string_view split) {
  return config.dataset == "dev" ? std::string(split)
                                 : fmt::format("{}/{}", config.dataset, split);
}

struct TrainedRun {
  Dataset data;
  TrainResult result;
};

TrainedRun run_training(const RunConfig& config) {
  config.validate();
  Dataset data = prepare_dataset(config);
  spdlog::info("train {} / dev {} / test {} instances, vocab {}, L = {}",
               data.train.size(), data.dev.size(), data.test.size(), data.vocab.size(),
               data.max_length);
  TrainResult result = train(config, data);
  return {std::move(data), std::move(result)};
}

}  // namespace

std::string ReportRow::header() { return "dataset\taccuracy\tmacro_f1\tconfig\tseed"; }

std::string ReportRow::format() const {
  return fmt::format("{}\t{:.2f}\t{:.2f}\t{}\t{}", dataset, 100.0 * accuracy,
                     100.0 * macro_f1, config_digest, seed);
}

TrainOutcome cmd_train(const RunConfig& config, const fs::path& out_dir,
                       std::ostream& out) {
  TrainedRun run = run_training(config);

  fs::create_directories(out_dir);
  TrainOutcome outcome;
  outcome.checkpoint = out_dir / "model.ckpt";
  outcome.log = out_dir / "train_log.jsonl";
  save_checkpoint(outcome.checkpoint, run.result.model, config, run.data.vocab,
                  run.result.meta(run.data.max_length));
  write_file(outcome.log, run.result.log_jsonl);

  outcome.dev = row_for(split_label(config, "dev"), run.result.best_dev, config);
  out << ReportRow::header() << '\n' << outcome.dev.format() << '\n';
  if (!run.data.test.empty()) {
    outcome.test = row_for(split_label(config, "test"),
                           evaluate(run.result.model, run.data.test), config);
    out << outcome.test->format() << '\n';
  }
  return outcome;
}

ReportRow cmd_eval(const fs::path& checkpoint, const fs::path& test_corpus,
                   std::ostream& out) {
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
  ParsedCorpus corpus = parse_corpus(test_corpus);
  if (corpus.instances.empty()) {
    throw ContractViolation(fmt::format("{}: no usable instances", test_corpus.string()));
  }
  ckpt.vocab.index(corpus.instances);
  const Metrics m = evaluate(ckpt.model, corpus.instances);
  ReportRow row = row_for(test_corpus.stem().string(), m, ckpt.config);
  out << ReportRow::header() << '\n' << row.format() << '\n';
  return row;
}

nlohmann::json ExplainRecord::to_json() const {
  nlohmann::json j;
  j["tokens"] = tokens;
  j["aspect_span"] = {aspect_start, aspect_end};
  j["per_head_marginals"] = marginals;
  j["predicted"] = std::string(polarity_name(prediction.label));
  j["probabilities"] = prediction.probabilities;
  return j;
}

std::string ExplainRecord::to_tsv() const {
  std::string s = "head";
  for (const std::string& t : tokens) s += "\t" + t;
  s += '\n';
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    s += fmt::format("a{}", k + 1);
    for (double v : marginals[k]) s += fmt::format("\t{:.4f}", v);
    s += '\n';
  }
  return s;
}

ExplainRecord cmd_explain(const fs::path& checkpoint, const std::string& text,
                          std::size_t char_start, std::size_t char_end, std::ostream& out,
                          const std::optional<fs::path>& json_path) {
  if (char_end <= char_start) {
    throw ContractViolation(
        fmt::format("aspect span [{}, {}) is empty", char_start, char_end));
  }
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
  std::optional<AspectInstance> inst =
      make_instance(text, char_start, char_end, Polarity::kPositive);
  if (!inst) {
    throw ParseError(fmt::format("aspect span [{}, {}) does not cover any token",
                                 char_start, char_end));
  }
  ckpt.vocab.index(*inst);
  const ModelOutput output = ckpt.model.forward(*inst);

  ExplainRecord record;
  record.tokens = inst->words;
  record.aspect_start = inst->aspect_start;
  record.aspect_end = inst->aspect_end;
  record.prediction = output.prediction;
  for (const CrfMarginals& head : output.attention.heads) {
    const auto v = head.yes.values();
    record.marginals.emplace_back(v.begin(), v.end());
  }

  const auto& p = record.prediction.probabilities;
  out << fmt::format("# predicted {} (positive {:.4f}, neutral {:.4f}, negative {:.4f})\n",
                     polarity_name(record.prediction.label), p[0], p[1], p[2]);
  out << record.to_tsv();
  if (json_path) write_file(*json_path, record.to_json().dump(2) + "\n");
  return record;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::span<const int> heads,
                                std::ostream& out) {
  if (heads.empty()) throw ContractViolation("sweep: no head counts given");
  if (config.no_structured_attention) {
    throw ConfigError("no_structured_attention: a head sweep needs structured attention");
  }
  for (int k : heads) {
    RunConfig c = config;
    c.crf_heads = k;
    c.validate();
  }
  config.validate();
  Dataset data = prepare_dataset(config);

  std::vector<SweepRow> rows;
  out << "heads\tdev_acc\tdev_f1\ttest_acc\ttest_f1\n";
  for (int k : heads) {
    RunConfig c = config;
    c.crf_heads = k;
    spdlog::info("sweep: training with {} heads", k);
    TrainResult r = train(c, data);
    SweepRow row{k, r.best_dev, std::nullopt};
    if (!data.test.empty()) row.test = evaluate(r.model, data.test);
    auto pct = [](const std::optional<Metrics>& m, double Metrics::*f) {
      return m ? fmt::format("{:.2f}", 100.0 * (*m).*f) : std::string("-");
    };
    out << fmt::format("{}\t{:.2f}\t{:.2f}\t{}\t{}\n", k, 100.0 * row.dev.accuracy,
                       100.0 * row.dev.macro_f1, pct(row.test, &Metrics::accuracy),
                       pct(row.test, &Metrics::macro_f1));
    rows.push_back(row);
  }
  return rows;
}

AblationOutcome cmd_ablate(const RunConfig& config, Ablation flag, std::ostream& out) {
  if (flag == Ablation::kNone) throw ConfigError("ablate: no component named");
  if (config.ablation() != Ablation::kNone) {
    throw ConfigError(fmt::format("ablate: config already disables {}",
                                  ablation_name(config.ablation())));
  }
  const RunConfig ablated = config.with_ablation(flag);
  TrainedRun run = run_training(ablated);
  const std::string tag = fmt::format("-{}", ablation_name(flag));

  AblationOutcome outcome;
  outcome.dev = row_for(split_label(ablated, "dev") + tag, run.result.best_dev, ablated);
  out << ReportRow::header() << '\n' << outcome.dev.format() << '\n';
  if (!run.data.test.empty()) {
    outcome.test = row_for(split_label(ablated, "test") + tag,
                           evaluate(run.result.model, run.data.test), ablated);
    out << outcome.test->format() << '\n';
  }
  return outcome;
}

void cmd_stats(std::span<const fs::path> corpora, std::optional<std::uint64_t> split_seed,
               std::ostream& out) {
  if (corpora.empty()) throw ContractViolation("stats: no corpus given");
  out << "corpus\tpositive\tneutral\tnegative\ttotal\tdropped\n";
  auto line = [&out](const std::string& name, const PolarityCounts& c,
                     std::string_view dropped) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", name, c.positive, c.neutral,
                       c.negative, c.total(), dropped);
  };
  for (const fs::path& path : corpora) {
    const ParsedCorpus corpus = parse_corpus(path);
    const std::string name = path.filename().string();
    line(name, count_polarities(corpus.instances),
         fmt::format("{} conflict, {} unaligned", corpus.dropped.conflict,
                     corpus.dropped.unaligned));
    if (split_seed && !corpus.instances.empty()) {
      const TrainDevSplit split = split_train_dev(corpus.instances, *split_seed);
      line(name + ":train", count_polarities(split.train), "-");
      line(name + ":dev", count_polarities(split.dev), "-");
    }
  }
}

void cmd_grid(const RunConfig& config, const nlohmann::json& grid, std::ostream& out) {
  config.validate();
  Dataset data = prepare_dataset(config);
  const std::vector<LeaderboardEntry> board = grid_search(config, grid, data);
  out << "rank\tdev_acc\tdev_f1\tbest_epoch\tconfig\n";
  for (std::size_t i = 0; i < board.size(); ++i) {
    out << fmt::format("{}\t{:.2f}\t{:.2f}\t{}\t{}\n", i + 1,
                       100.0 * board[i].dev.accuracy, 100.0 * board[i].dev.macro_f1,
                       board[i].best_epoch, board[i].config.canonical());
  }
}

void cmd_synth(const fs::path& path, std::size_t count, std::uint64_t seed) {
  const SyntheticCorpus corpus = generate_synthetic({count, seed});
  write_file(path, to_jsonl(corpus.instances));
}

}  // namespace mcrf
