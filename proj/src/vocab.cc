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

#include "mcrf/vocab.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    throw FormatError("vocabulary does not start with the <pad>, <unk> specials");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) {
      throw FormatError(fmt::format("vocabulary repeats token '{}'", tokens[i]));
    }
    v.add(tokens[i]);
  }
  return v;
}

int Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractViolation(fmt::format("token id {} outside vocabulary", id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const std::string& t : tokens_) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return h;
}

void Vocabulary::index(AspectInstance& instance) const {
  instance.tokens.clear();
  instance.tokens.reserve(instance.words.size());
  for (const std::string& w : instance.words) instance.tokens.push_back(id(w));
}

void Vocabulary::index(std::span<AspectInstance> instances) const {
  for (AspectInstance& inst : instances) index(inst);
}

void extend_vocabulary(Vocabulary& vocab, std::span<const AspectInstance> instances) {
  for (const AspectInstance& inst : instances) {
    for (const std::string& w : inst.words) vocab.add(w);
  }
}

namespace {

void fill_random(std::span<double> row, Rng& rng) {
  std::uniform_real_distribution<double> u(-kUnknownInitRange, kUnknownInitRange);
  for (double& x : row) x = u(rng);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_integer(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

class EmbeddingReader {
 public:
  EmbeddingReader(const Vocabulary& vocab, std::size_t dim)
      : vocab_(vocab),
        dim_(dim),
        values_(vocab.size() * dim, 0.0),
        pretrained_(vocab.size(), false) {}

  void consume(std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.empty()) return;
    if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) &&
        is_integer(fields[1])) {
      return;
    }
    if (fields.size() != dim_ + 1) {
      throw FormatError(fmt::format(
          "embedding line {}: expected {} values after the token, found {}",
          line_no, dim_, fields.size() - 1));
    }
    if (!vocab_.contains(fields[0])) return;
    const auto id = static_cast<std::size_t>(vocab_.id(fields[0]));
    if (pretrained_[id]) return;
    for (std::size_t k = 0; k < dim_; ++k) {
      const std::string_view f = fields[k + 1];
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) {
        throw FormatError(fmt::format("embedding line {}: bad number '{}'",
                                      line_no, f));
      }
      values_[id * dim_ + k] = v;
    }
    pretrained_[id] = true;
  }

  EmbeddingMatrix finish(Rng& rng) && {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < pretrained_.size(); ++r) {
      if (pretrained_[r]) {
        ++hits;
      } else {
        fill_random(std::span<double>(values_).subspan(r * dim_, dim_), rng);
      }
    }
    EmbeddingMatrix m;
    m.coverage = pretrained_.empty()
                     ? 0.0
                     : static_cast<double>(hits) / static_cast<double>(pretrained_.size());
    m.table = Tensor::from({vocab_.size(), dim_}, std::move(values_));
    m.pretrained = std::move(pretrained_);
    return m;
  }

 private:
  const Vocabulary& vocab_;
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<bool> pretrained_;
};

}  // namespace

EmbeddingMatrix random_embeddings(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
  return EmbeddingReader(vocab, dim).finish(rng);
}

EmbeddingMatrix load_embeddings_text(std::string_view content,
                                     const Vocabulary& vocab, std::size_t dim,
                                     Rng& rng) {
  EmbeddingReader reader(vocab, dim);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    reader.consume(content.substr(start, nl - start), ++line_no);
    start = nl + 1;
  }
  return std::move(reader).finish(rng);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const Vocabulary& vocab, std::size_t dim, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open embeddings {}", path.string()));
  EmbeddingReader reader(vocab, dim);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) reader.consume(line, ++line_no);
  return std::move(reader).finish(rng);
}

}  // namespace mcrf
