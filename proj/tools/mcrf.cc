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

// Command-line front end: train, eval, explain, sweep, ablate, stats.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mcrf/commands.h"
#include "mcrf/errors.h"

namespace {

namespace fs = std::filesystem;

// "START,END" in code points, END exclusive.
std::pair<std::size_t, std::size_t> parse_span(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw mcrf::ParseError(fmt::format("--aspect '{}': expected START,END", s));
  }
  auto number = [&s](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw mcrf::ParseError(fmt::format("--aspect '{}': expected START,END", s));
    }
    return v;
  };
  const std::string_view view(s);
  return {number(view.substr(0, comma)), number(view.substr(comma + 1))};
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mcrf::IoError(fmt::format("{}: cannot open", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw mcrf::ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("mcrf");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");

  CLI::App app{"Multi-head CRF attention aspect sentiment classifier"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path, out_dir = "runs/latest", ckpt_path, test_path, text, aspect,
                           json_path, flag, grid_path, synth_path;
  std::optional<std::uint64_t> seed;
  std::vector<int> heads;
  std::vector<std::string> corpora;
  std::size_t synth_count = 500;
  std::uint64_t synth_seed = 7;

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--config", config_path, "Run config (JSON)")->required();
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--out", out_dir, "Output directory");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a test corpus");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  eval->add_option("--test", test_path, "Corpus (SemEval XML or JSONL)")->required();

  auto* explain = app.add_subcommand("explain", "Per-head attention marginals");
  explain->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  explain->add_option("--text", text, "Sentence")->required();
  explain->add_option("--aspect", aspect, "Aspect character span START,END")->required();
  explain->add_option("--json", json_path, "Also write the record as JSON");

  auto* sweep = app.add_subcommand("sweep", "Train once per head count");
  sweep->add_option("--config", config_path, "Run config (JSON)")->required();
  sweep->add_option("--heads", heads, "Head counts, e.g. 1,2,4")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seed", seed, "Override the config seed");

  auto* ablate = app.add_subcommand("ablate", "Train with one component disabled");
  ablate->add_option("--config", config_path, "Run config (JSON)")->required();
  ablate->add_option("--flag", flag, "indicator, decay or attention")->required();
  ablate->add_option("--seed", seed, "Override the config seed");

  auto* stats = app.add_subcommand("stats", "Label counts per corpus");
  stats->add_option("corpora", corpora, "Corpus files")->required();
  stats->add_option("--split-seed", seed, "Also show the train/dev partition");

  auto* grid = app.add_subcommand("gridsearch", "Dev-set grid search");
  grid->add_option("--config", config_path, "Base run config (JSON)")->required();
  grid->add_option("--grid", grid_path, "Grid: JSON object of field -> value list")
      ->required();

  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus as JSONL");
  synth->add_option("--out", synth_path, "Output path")->required();
  synth->add_option("--count", synth_count, "Instances");
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  auto load_config = [&] {
    mcrf::RunConfig c = mcrf::RunConfig::load(config_path);
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  };

  try {
    if (*train) {
      mcrf::cmd_train(load_config(), out_dir, std::cout);
    } else if (*eval) {
      mcrf::cmd_eval(ckpt_path, test_path, std::cout);
    } else if (*explain) {
      const auto [begin, end] = parse_span(aspect);
      std::optional<fs::path> out_json;
      if (!json_path.empty()) out_json = json_path;
      mcrf::cmd_explain(ckpt_path, text, begin, end, std::cout, out_json);
    } else if (*sweep) {
      mcrf::cmd_sweep(load_config(), heads, std::cout);
    } else if (*ablate) {
      const mcrf::Ablation a = mcrf::parse_ablation(flag);
      mcrf::cmd_ablate(load_config(), a, std::cout);
    } else if (*stats) {
      std::vector<fs::path> paths(corpora.begin(), corpora.end());
      mcrf::cmd_stats(paths, seed, std::cout);
    } else if (*grid) {
      mcrf::cmd_grid(load_config(), read_json(grid_path), std::cout);
    } else if (*synth) {
      mcrf::cmd_synth(synth_path, synth_count, synth_seed);
    }
  } catch (const mcrf::Error& e) {
    std::cerr << fmt::format("error[{}]: {}\n", e.category(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error[internal]: {}\n", e.what());
    return 1;
  }
  return EXIT_SUCCESS;
}
