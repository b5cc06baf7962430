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

#ifndef MCRF_CORPUS_H_
#define MCRF_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcrf {

// Label order is fixed everywhere: positive, neutral, negative.
enum class Polarity : int { kPositive = 0, kNeutral = 1, kNegative = 2 };
inline constexpr int kNumPolarities = 3;

std::string_view polarity_name(Polarity p);
std::optional<Polarity> parse_polarity(std::string_view name);

struct Token {
  std::string text;
  // Byte offsets into the source text, [begin, end).
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Lowercases ASCII letters and splits on whitespace; every ASCII punctuation
// character becomes a token of its own. Bytes >= 0x80 are word characters.
std::vector<Token> tokenize(std::string_view text);

// Byte offset of the `char_offset`-th code point of a UTF-8 string. Offsets
// past the end clamp to text.size().
std::size_t char_to_byte_offset(std::string_view utf8, std::size_t char_offset);

// One (sentence, aspect span, polarity) classification example.
struct AspectInstance {
  std::vector<std::string> words;
  // Vocabulary ids, parallel to `words`; empty until indexed.
  std::vector<int> tokens;
  // Inclusive token span of the aspect: 0 <= aspect_start <= aspect_end < n.
  std::size_t aspect_start = 0;
  std::size_t aspect_end = 0;
  Polarity label = Polarity::kPositive;
  std::string raw_text;
  // Aspect character span in raw_text, code points, [begin, end).
  std::size_t char_begin = 0;
  std::size_t char_end = 0;

  std::size_t length() const { return words.size(); }
  bool in_aspect(std::size_t t) const {
    return t >= aspect_start && t <= aspect_end;
  }
};

struct DropReport {
  std::string tokenizer = "lowercase, whitespace and ASCII punctuation split";
  std::size_t sentences = 0;
  std::size_t conflict = 0;
  std::size_t unaligned = 0;
  std::vector<std::string> notes;

  std::size_t total() const { return conflict + unaligned; }
};

struct ParsedCorpus {
  std::vector<AspectInstance> instances;
  DropReport dropped;
};

enum class CorpusFormat { kSemEvalXml, kJsonl };

// .xml selects SemEval XML; anything else is JSONL.
CorpusFormat detect_format(const std::filesystem::path& path);

// SemEval 2014 (aspectTerm) and 2015/2016 (Opinion) markup are both accepted.
// JSONL records carry text, aspect_char_start, aspect_char_end (exclusive,
// code points) and label.
ParsedCorpus parse_corpus(const std::filesystem::path& path, CorpusFormat format);
ParsedCorpus parse_corpus(const std::filesystem::path& path);
ParsedCorpus parse_corpus_text(std::string_view content, CorpusFormat format,
                               std::string_view source = "<memory>");

// Aligns a character span to tokens. Returns nullopt when no token overlaps
// the span.
std::optional<AspectInstance> make_instance(std::string_view text,
                                            std::size_t char_start,
                                            std::size_t char_end, Polarity label);

struct TrainDevSplit {
  std::vector<AspectInstance> train;
  std::vector<AspectInstance> dev;
};

// Uniformly samples floor(N/6) instances (at least one) into dev; both parts
// keep input order. Deterministic in `seed`.
TrainDevSplit split_train_dev(std::span<const AspectInstance> instances,
                              std::uint64_t seed);

struct PolarityCounts {
  std::size_t positive = 0;
  std::size_t neutral = 0;
  std::size_t negative = 0;

  std::size_t total() const { return positive + neutral + negative; }
  bool operator==(const PolarityCounts&) const = default;
};

PolarityCounts count_polarities(std::span<const AspectInstance> instances);

// Writes instances back to JSONL (one record per line).
std::string to_jsonl(std::span<const AspectInstance> instances);

}  // namespace mcrf

#endif  // MCRF_CORPUS_H_
