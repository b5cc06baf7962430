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

#include <string>

#include "doctest.h"
#include "mcrf/config.h"
#include "mcrf/errors.h"

namespace mcrf {
namespace {

std::string config_error(std::string_view text) {
  try {
    RunConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("defaults are the published setting") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.hidden == 64);
  CHECK(c.batch == 64);
  CHECK(c.lr == 0.008);
  CHECK(c.crf_heads == 4);
  CHECK(c.clip_norm == 5.0);
  CHECK(c.ablation() == Ablation::kNone);
}

TEST_CASE("JSON round trip keeps the digest") {
  RunConfig c;
  c.hidden = 32;
  c.gamma = 3;
  c.dropout = 0.4;
  c.seed = 99;
  c.selection = SelectionMetric::kMacroF1;
  c.train_path = "data/train.xml";
  const RunConfig back = RunConfig::parse(c.canonical());
  CHECK(back.canonical() == c.canonical());
  CHECK(back.digest() == c.digest());
  CHECK(back.selection == SelectionMetric::kMacroF1);
  CHECK(c.digest().size() == 16);

  RunConfig other = c;
  other.seed = 100;
  CHECK(other.digest() != c.digest());
}

TEST_CASE("every field is validated by name") {
  CHECK(config_error(R"({"hidden": 48})").rfind("hidden:", 0) == 0);
  CHECK(config_error(R"({"batch": 32})").rfind("batch:", 0) == 0);
  CHECK(config_error(R"({"dropout": 0.35})").rfind("dropout:", 0) == 0);
  CHECK(config_error(R"({"aspect_dim": 60})").rfind("aspect_dim:", 0) == 0);
  CHECK(config_error(R"({"gamma": 4})").rfind("gamma:", 0) == 0);
  CHECK(config_error(R"({"gru_layers": 0})").rfind("gru_layers:", 0) == 0);
  CHECK(config_error(R"({"crf_heads": 0})").rfind("crf_heads:", 0) == 0);
  CHECK(config_error(R"({"lr": -1})").rfind("lr:", 0) == 0);
  CHECK(config_error(R"({"max_epochs": 0})").rfind("max_epochs:", 0) == 0);
  CHECK(config_error(R"({"seed": -3})").rfind("seed:", 0) == 0);
  CHECK(config_error(R"({"selection_metric": "loss"})").rfind("selection_metric:", 0) == 0);
}

TEST_CASE("types and unknown keys") {
  CHECK(config_error(R"({"hidden": "64"})").rfind("hidden:", 0) == 0);
  CHECK(config_error(R"({"hidden": 64.5})").rfind("hidden:", 0) == 0);
  CHECK(config_error(R"({"no_decay": 1})").rfind("no_decay:", 0) == 0);
  CHECK(config_error(R"({"hiden": 64})").rfind("hiden:", 0) == 0);
  CHECK(config_error("[1, 2]").rfind("config:", 0) == 0);
  CHECK(config_error("{\"hidden\": ").rfind("config: malformed JSON", 0) == 0);
}

TEST_CASE("one ablation per run") {
  CHECK(config_error(R"({"no_decay": true, "no_aspect_indicator": true})")
            .rfind("ablation:", 0) == 0);
  const RunConfig c = RunConfig::parse(R"({"no_structured_attention": true})");
  CHECK(c.ablation() == Ablation::kStructuredAttention);

  const RunConfig d = RunConfig{}.with_ablation(Ablation::kDecay);
  CHECK(d.no_decay);
  CHECK_FALSE(d.no_aspect_indicator);
  CHECK(d.with_ablation(Ablation::kNone).ablation() == Ablation::kNone);

  CHECK(parse_ablation("indicator") == Ablation::kAspectIndicator);
  CHECK(ablation_name(Ablation::kStructuredAttention) == "attention");
  CHECK_THROWS_AS(parse_ablation("everything"), ConfigError);
}

TEST_CASE("missing config file") {
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/run.json"), IoError);
}

}  // namespace
}  // namespace mcrf
