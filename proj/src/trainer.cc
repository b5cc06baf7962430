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

#include "mcrf/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mcrf/adam.h"
#include "mcrf/errors.h"

namespace mcrf {

Dataset build_dataset(std::span<const AspectInstance> pool,
                      std::span<const AspectInstance> test, const RunConfig& config) {
  if (pool.empty()) throw ContractViolation("training pool is empty");
  Dataset d;
  TrainDevSplit split = split_train_dev(pool, config.seed);
  d.train = std::move(split.train);
  d.dev = std::move(split.dev);
  d.test.assign(test.begin(), test.end());

  extend_vocabulary(d.vocab, d.train);
  extend_vocabulary(d.vocab, d.dev);
  extend_vocabulary(d.vocab, d.test);
  for (const auto* part : {&d.train, &d.dev, &d.test}) {
    for (const AspectInstance& inst : *part) {
      d.max_length = std::max(d.max_length, inst.length());
    }
  }
  d.vocab.index(d.train);
  d.vocab.index(d.dev);
  d.vocab.index(d.test);

  std::seed_seq seq{config.seed, std::uint64_t{0xE3B}};
  Rng rng(seq);
  const auto dim = static_cast<std::size_t>(config.word_dim);
  if (config.embeddings_path.empty()) {
    d.embeddings = random_embeddings(d.vocab, dim, rng);
  } else {
    d.embeddings = load_embeddings(config.embeddings_path, d.vocab, dim, rng);
    spdlog::info("embeddings: {:.2f}% of {} vocabulary rows pretrained",
                 100.0 * d.embeddings.coverage, d.vocab.size());
  }
  return d;
}

Dataset prepare_dataset(const RunConfig& config) {
  if (config.train_path.empty()) throw ConfigError("train_path: not set");
  ParsedCorpus train = parse_corpus(config.train_path);
  ParsedCorpus test;
  if (!config.test_path.empty()) test = parse_corpus(config.test_path);
  Dataset d = build_dataset(train.instances, test.instances, config);
  d.train_report = std::move(train.dropped);
  d.test_report = std::move(test.dropped);
  return d;
}

std::vector<AspectInstance> index_for_model(std::vector<AspectInstance> instances,
                                            const Vocabulary& vocab) {
  vocab.index(instances);
  return instances;
}

Metrics evaluate(const Model& model, std::span<const AspectInstance> instances,
                 std::vector<Prediction>* predictions) {
  std::vector<Polarity> predicted, gold;
  for (const AspectInstance& inst : instances) {
    Prediction p = model.predict(inst);
    predicted.push_back(p.label);
    gold.push_back(inst.label);
    if (predictions != nullptr) predictions->push_back(std::move(p));
  }
  return metrics(predicted, gold);
}

nlohmann::json EpochRecord::to_json(bool with_seconds) const {
  nlohmann::json j = {{"epoch", epoch},
                      {"train_loss", train_loss},
                      {"dev_acc", dev.accuracy},
                      {"dev_f1", dev.macro_f1},
                      {"clipped_steps", clipped_steps}};
  if (with_seconds) j["seconds"] = seconds;
  if (aborted_batch) j["aborted_batch"] = *aborted_batch;
  return j;
}

namespace {

double selection_score(const Metrics& m, SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracy ? m.accuracy : m.macro_f1;
}

}  // namespace

TrainResult train(const RunConfig& config, const Dataset& data) {
  config.validate();
  if (data.train.empty() || data.dev.empty()) {
    throw ContractViolation(fmt::format("train: {} train / {} dev instances",
                                        data.train.size(), data.dev.size()));
  }
  Rng rng(config.seed);
  Model model = Model::create(ModelOptions::from_config(config, data.max_length),
                              data.embeddings.table.clone(), rng);
  Adam adam(model.parameters(), AdamOptions{config.lr});

  TrainResult result{model, {}, 0, {}, {}};
  std::vector<std::vector<double>> best = model.snapshot();
  double best_score = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;
    std::shuffle(order.begin(), order.end(), rng);

    double loss_total = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t b = 0; b * batch < order.size(); ++b) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(order.size(), begin + batch);
      const double weight = 1.0 / static_cast<double>(end - begin);
      adam.zero_grad();
      double batch_loss = 0.0;
      bool finite = true;
      for (std::size_t k = begin; k < end && finite; ++k) {
        const AspectInstance& inst = data.train[order[k]];
        Tape tape;
        TapeScope scope(tape);
        const ModelOutput out = model.forward(inst, &rng);
        const Tensor loss = nll_loss(out.logits, inst.label);
        if (!std::isfinite(loss.item())) {
          finite = false;
          break;
        }
        batch_loss += loss.item();
        tape.backward(loss, weight);
      }
      if (finite && !std::isfinite(adam.grad_norm())) finite = false;
      if (!finite) {
        spdlog::error("epoch {}: non-finite loss or gradient in batch {}, epoch aborted",
                      epoch, b);
        record.aborted_batch = b;
        adam.zero_grad();
        break;
      }
      loss_total += batch_loss;
      loss_count += end - begin;
      if (adam.clip_grad_norm(config.clip_norm)) {
        ++record.clipped_steps;
        spdlog::debug("epoch {} batch {}: gradient norm clipped to {}", epoch, b,
                      config.clip_norm);
      }
      adam.step();
    }
    adam.zero_grad();
    if (record.clipped_steps > 0) {
      spdlog::info("epoch {}: gradient clipping triggered on {} steps", epoch,
                   record.clipped_steps);
    }

    record.train_loss = loss_count ? loss_total / static_cast<double>(loss_count) : 0.0;
    record.dev = evaluate(model, data.dev);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   started).count();
    result.epochs.push_back(record);
    result.log_jsonl += record.to_json(config.log_seconds).dump() + "\n";
    spdlog::info("epoch {:3d} loss {:.4f} dev acc {:.2f} f1 {:.2f}", epoch,
                 record.train_loss, 100.0 * record.dev.accuracy,
                 100.0 * record.dev.macro_f1);

    const double score = selection_score(record.dev, config.selection);
    if (score > best_score) {
      best_score = score;
      best = model.snapshot();
      result.best_dev = record.dev;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  model.restore(best);
  result.model = model;
  return result;
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const nlohmann::json& grid) {
  if (!grid.is_object()) throw ConfigError("grid: expected an object of field -> values");
  std::vector<nlohmann::json> candidates{base.to_json()};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError(fmt::format("grid.{}: expected a non-empty array", key));
    }
    std::vector<nlohmann::json> next;
    for (const nlohmann::json& c : candidates) {
      for (const nlohmann::json& v : values) {
        nlohmann::json copy = c;
        copy[key] = v;
        next.push_back(std::move(copy));
      }
    }
    candidates = std::move(next);
  }
  std::vector<RunConfig> configs;
  for (const nlohmann::json& c : candidates) configs.push_back(RunConfig::from_json(c));
  return configs;
}

std::vector<LeaderboardEntry> grid_search(const RunConfig& base,
                                          const nlohmann::json& grid,
                                          const Dataset& data) {
  std::vector<LeaderboardEntry> board;
  for (const RunConfig& candidate : expand_grid(base, grid)) {
    spdlog::info("grid: training {}", candidate.canonical());
    TrainResult r = train(candidate, data);
    board.push_back({candidate, r.best_dev, r.best_epoch});
  }
  std::stable_sort(board.begin(), board.end(),
                   [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                     if (a.dev.accuracy != b.dev.accuracy) return a.dev.accuracy > b.dev.accuracy;
                     if (a.dev.macro_f1 != b.dev.macro_f1) return a.dev.macro_f1 > b.dev.macro_f1;
                     return a.config.hidden < b.config.hidden;
                   });
  return board;
}

}  // namespace mcrf
