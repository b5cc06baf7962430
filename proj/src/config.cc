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

#include "mcrf/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kNone: return "none";
    case Ablation::kAspectIndicator: return "indicator";
    case Ablation::kDecay: return "decay";
    case Ablation::kStructuredAttention: return "attention";
  }
  return "none";
}

Ablation parse_ablation(std::string_view name) {
  if (name == "none") return Ablation::kNone;
  if (name == "indicator") return Ablation::kAspectIndicator;
  if (name == "decay") return Ablation::kDecay;
  if (name == "attention") return Ablation::kStructuredAttention;
  throw ConfigError(fmt::format(
      "ablation: unknown flag '{}' (expected indicator, decay or attention)", name));
}

namespace {

template <typename T>
void require_in(std::string_view field, T value, std::initializer_list<T> allowed) {
  for (T a : allowed) {
    if (a == value) return;
  }
  std::string list;
  for (T a : allowed) list += (list.empty() ? "" : ", ") + fmt::format("{}", a);
  throw ConfigError(fmt::format("{}: {} not in {{{}}}", field, value, list));
}

void require(bool ok, std::string_view field, const std::string& why) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", field, why));
}

}  // namespace

void RunConfig::validate() const {
  require_in("hidden", hidden, {32, 64});
  require_in("batch", batch, {64, 96});
  bool dropout_ok = false;
  for (int k = 3; k <= 8; ++k) dropout_ok = dropout_ok || std::abs(dropout - k / 10.0) < 1e-9;
  require(dropout_ok, "dropout",
          fmt::format("{} not in 0.3 .. 0.8 (step 0.1)", dropout));
  require_in("aspect_dim", aspect_dim, {50, 70, 90});
  require_in("gamma", gamma, {0, 1, 2, 3});
  require_in("gru_layers", gru_layers, {1, 2, 3});
  require(crf_heads >= 1 && crf_heads <= 64, "crf_heads",
          fmt::format("{} not in [1, 64]", crf_heads));
  require(std::isfinite(lr) && lr >= 0.0, "lr", fmt::format("{} must be >= 0", lr));
  require(max_epochs >= 1, "max_epochs", "must be >= 1");
  require(patience >= 1, "patience", "must be >= 1");
  require(word_dim >= 1, "word_dim", "must be >= 1");
  require(std::isfinite(clip_norm) && clip_norm >= 0.0, "clip_norm",
          "must be >= 0 (0 disables clipping)");
  const int flags = int{no_aspect_indicator} + int{no_decay} + int{no_structured_attention};
  require(flags <= 1, "ablation", "at most one ablation flag per run");
}

Ablation RunConfig::ablation() const {
  if (no_aspect_indicator) return Ablation::kAspectIndicator;
  if (no_decay) return Ablation::kDecay;
  if (no_structured_attention) return Ablation::kStructuredAttention;
  return Ablation::kNone;
}

RunConfig RunConfig::with_ablation(Ablation a) const {
  RunConfig c = *this;
  c.no_aspect_indicator = a == Ablation::kAspectIndicator;
  c.no_decay = a == Ablation::kDecay;
  c.no_structured_attention = a == Ablation::kStructuredAttention;
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"hidden", hidden},
      {"batch", batch},
      {"dropout", dropout},
      {"aspect_dim", aspect_dim},
      {"gamma", gamma},
      {"gru_layers", gru_layers},
      {"crf_heads", crf_heads},
      {"lr", lr},
      {"max_epochs", max_epochs},
      {"patience", patience},
      {"seed", seed},
      {"word_dim", word_dim},
      {"clip_norm", clip_norm},
      {"no_aspect_indicator", no_aspect_indicator},
      {"no_decay", no_decay},
      {"no_structured_attention", no_structured_attention},
      {"embeddings_trainable", embeddings_trainable},
      {"shared_transitions", shared_transitions},
      {"selection_metric", selection == SelectionMetric::kAccuracy ? "accuracy" : "f1"},
      {"log_seconds", log_seconds},
      {"dataset", dataset},
      {"train_path", train_path},
      {"test_path", test_path},
      {"embeddings_path", embeddings_path},
  };
}

std::string RunConfig::canonical() const { return to_json().dump(); }

std::string RunConfig::digest() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const nlohmann::json defaults = RunConfig{}.to_json();
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
  }();
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(fmt::format("{}: unknown field", key));
  }
  auto read = [&j](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(fmt::format("{}: wrong type ({})", key, j.at(key).dump()));
    }
  };
  auto read_int = [&j](const char* key, int& field) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
      throw ConfigError(fmt::format("{}: expected an integer, got {}", key, v.dump()));
    }
    field = v.get<int>();
  };
  read_int("hidden", c.hidden);
  read_int("batch", c.batch);
  read("dropout", c.dropout);
  read_int("aspect_dim", c.aspect_dim);
  read_int("gamma", c.gamma);
  read_int("gru_layers", c.gru_layers);
  read_int("crf_heads", c.crf_heads);
  read("lr", c.lr);
  read_int("max_epochs", c.max_epochs);
  read_int("patience", c.patience);
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(fmt::format("seed: expected a non-negative integer, got {}", v.dump()));
    }
    c.seed = v.get<std::uint64_t>();
  }
  read_int("word_dim", c.word_dim);
  read("clip_norm", c.clip_norm);
  read("no_aspect_indicator", c.no_aspect_indicator);
  read("no_decay", c.no_decay);
  read("no_structured_attention", c.no_structured_attention);
  read("embeddings_trainable", c.embeddings_trainable);
  read("shared_transitions", c.shared_transitions);
  if (j.contains("selection_metric")) {
    std::string m;
    read("selection_metric", m);
    if (m == "accuracy") {
      c.selection = SelectionMetric::kAccuracy;
    } else if (m == "f1") {
      c.selection = SelectionMetric::kMacroF1;
    } else {
      throw ConfigError(fmt::format("selection_metric: '{}' not in {{accuracy, f1}}", m));
    }
  }
  read("log_seconds", c.log_seconds);
  read("dataset", c.dataset);
  read("train_path", c.train_path);
  read("test_path", c.test_path);
  read("embeddings_path", c.embeddings_path);
  c.validate();
  return c;
}

RunConfig RunConfig::parse(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config: malformed JSON at byte {}", e.byte));
  }
  return from_json(j);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace mcrf
