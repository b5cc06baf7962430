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

#include "mcrf/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>
#include "json.hpp"
#include <spdlog/spdlog.h>

#include "mcrf/errors.h"

namespace mcrf {

namespace pt = boost::property_tree;

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNeutral: return "neutral";
    case Polarity::kNegative: return "negative";
  }
  return "unknown";
}

std::optional<Polarity> parse_polarity(std::string_view name) {
  if (name == "positive") return Polarity::kPositive;
  if (name == "neutral") return Polarity::kNeutral;
  if (name == "negative") return Polarity::kNegative;
  return std::nullopt;
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c) != 0;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      tokens.push_back({std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
      continue;
    }
    const std::size_t begin = i;
    std::string word;
    while (i < text.size()) {
      const auto w = static_cast<unsigned char>(text[i]);
      if (is_space(w) || is_punct(w)) break;
      word.push_back(w < 0x80 ? static_cast<char>(std::tolower(w)) : text[i]);
      ++i;
    }
    tokens.push_back({std::move(word), begin, i});
  }
  return tokens;
}

std::size_t char_to_byte_offset(std::string_view utf8, std::size_t char_offset) {
  std::size_t chars = 0;
  for (std::size_t b = 0; b < utf8.size(); ++b) {
    // Continuation bytes do not start a code point.
    if ((static_cast<unsigned char>(utf8[b]) & 0xC0) == 0x80) continue;
    if (chars == char_offset) return b;
    ++chars;
  }
  return utf8.size();
}

std::optional<AspectInstance> make_instance(std::string_view text,
                                            std::size_t char_start,
                                            std::size_t char_end, Polarity label) {
  if (char_end <= char_start) return std::nullopt;
  const std::size_t b0 = char_to_byte_offset(text, char_start);
  const std::size_t b1 = char_to_byte_offset(text, char_end);
  const std::vector<Token> tokens = tokenize(text);

  std::optional<std::size_t> first, last;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].begin < b1 && tokens[t].end > b0) {
      if (!first) first = t;
      last = t;
    }
  }
  if (!first) return std::nullopt;

  AspectInstance inst;
  inst.words.reserve(tokens.size());
  for (const Token& tok : tokens) inst.words.push_back(tok.text);
  inst.aspect_start = *first;
  inst.aspect_end = *last;
  inst.label = label;
  inst.raw_text = std::string(text);
  inst.char_begin = char_start;
  inst.char_end = char_end;
  return inst;
}

CorpusFormat detect_format(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".xml" ? CorpusFormat::kSemEvalXml : CorpusFormat::kJsonl;
}

namespace {

struct RawAspect {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string polarity;
};

std::size_t parse_offset(const std::string& s, std::string_view source,
                         std::string_view what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) {
    throw ParseError(fmt::format("{}: bad {} offset '{}'", source, what, s));
  }
  return static_cast<std::size_t>(v);
}

void add_aspects(const std::string& text, const std::vector<RawAspect>& aspects,
                 std::string_view source, ParsedCorpus& out) {
  for (const RawAspect& a : aspects) {
    if (a.polarity == "conflict") {
      ++out.dropped.conflict;
      continue;
    }
    const auto label = parse_polarity(a.polarity);
    if (!label) {
      throw ParseError(
          fmt::format("{}: unknown polarity '{}'", source, a.polarity));
    }
    auto inst = make_instance(text, a.from, a.to, *label);
    if (!inst) {
      ++out.dropped.unaligned;
      out.dropped.notes.push_back(fmt::format(
          "unaligned span [{}, {}) in \"{}\"", a.from, a.to, text));
      continue;
    }
    out.instances.push_back(std::move(*inst));
  }
}

// 2015/2016 files repeat a target once per aspect category. Identical spans
// collapse to one; a span carrying two different polarities is a conflict.
std::vector<RawAspect> merge_opinions(std::vector<RawAspect> raw) {
  std::map<std::pair<std::size_t, std::size_t>, RawAspect> by_span;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (RawAspect& a : raw) {
    const auto key = std::make_pair(a.from, a.to);
    auto it = by_span.find(key);
    if (it == by_span.end()) {
      order.push_back(key);
      by_span.emplace(key, std::move(a));
    } else if (it->second.polarity != a.polarity) {
      it->second.polarity = "conflict";
    }
  }
  std::vector<RawAspect> merged;
  for (const auto& key : order) merged.push_back(by_span.at(key));
  return merged;
}

void visit_xml(const pt::ptree& node, std::string_view source, ParsedCorpus& out) {
  for (const auto& [key, child] : node) {
    if (key != "sentence") {
      if (key != "<xmlattr>") visit_xml(child, source, out);
      continue;
    }
    ++out.dropped.sentences;
    const std::string text = child.get<std::string>("text", "");
    const std::string id = child.get<std::string>("<xmlattr>.id", "?");
    const std::string where = fmt::format("{} sentence {}", source, id);

    std::vector<RawAspect> aspects;
    if (auto terms = child.get_child_optional("aspectTerms")) {
      for (const auto& [tkey, term] : *terms) {
        if (tkey != "aspectTerm") continue;
        aspects.push_back(
            {parse_offset(term.get<std::string>("<xmlattr>.from", ""), where, "from"),
             parse_offset(term.get<std::string>("<xmlattr>.to", ""), where, "to"),
             term.get<std::string>("<xmlattr>.polarity", "")});
      }
    }
    if (auto opinions = child.get_child_optional("Opinions")) {
      std::vector<RawAspect> raw;
      for (const auto& [okey, op] : *opinions) {
        if (okey != "Opinion") continue;
        const std::string target = op.get<std::string>("<xmlattr>.target", "NULL");
        if (target == "NULL") continue;
        raw.push_back(
            {parse_offset(op.get<std::string>("<xmlattr>.from", ""), where, "from"),
             parse_offset(op.get<std::string>("<xmlattr>.to", ""), where, "to"),
             op.get<std::string>("<xmlattr>.polarity", "")});
      }
      for (RawAspect& a : merge_opinions(std::move(raw))) aspects.push_back(a);
    }
    add_aspects(text, aspects, where, out);
  }
}

ParsedCorpus parse_xml(std::string_view content, std::string_view source) {
  pt::ptree tree;
  std::istringstream in{std::string(content)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(fmt::format("{}:{}: malformed XML: {}", source, e.line(),
                                 e.message()));
  }
  ParsedCorpus out;
  visit_xml(tree, source, out);
  return out;
}

ParsedCorpus parse_jsonl(std::string_view content, std::string_view source) {
  ParsedCorpus out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (nl == content.size()) break;
      continue;
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(fmt::format("{}:{}: malformed JSON at byte {}: {}", source,
                                   line_no, e.byte, e.what()));
    }
    const std::string where = fmt::format("{}:{}", source, line_no);
    try {
      ++out.dropped.sentences;
      const std::string text = rec.at("text").get<std::string>();
      RawAspect a{rec.at("aspect_char_start").get<std::size_t>(),
                  rec.at("aspect_char_end").get<std::size_t>(),
                  rec.at("label").get<std::string>()};
      add_aspects(text, {a}, where, out);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}: bad record: {}", where, e.what()));
    }
    if (nl == content.size()) break;
  }
  return out;
}

}  // namespace

ParsedCorpus parse_corpus_text(std::string_view content, CorpusFormat format,
                               std::string_view source) {
  return format == CorpusFormat::kSemEvalXml ? parse_xml(content, source)
                                             : parse_jsonl(content, source);
}

ParsedCorpus parse_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open corpus {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus_text(buf.str(), format, path.string());
}

ParsedCorpus parse_corpus(const std::filesystem::path& path) {
  return parse_corpus(path, detect_format(path));
}

TrainDevSplit split_train_dev(std::span<const AspectInstance> instances,
                              std::uint64_t seed) {
  const std::size_t n = instances.size();
  std::size_t dev_size = n / 6;
  if (n > 0 && n < 6) {
    dev_size = 1;
    spdlog::warn("only {} instances; dev split gets a single instance", n);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first dev_size slots are a uniform sample.
  for (std::size_t k = 0; k < dev_size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  std::vector<bool> in_dev(n, false);
  for (std::size_t k = 0; k < dev_size; ++k) in_dev[order[k]] = true;

  TrainDevSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    (in_dev[i] ? split.dev : split.train).push_back(instances[i]);
  }
  return split;
}

PolarityCounts count_polarities(std::span<const AspectInstance> instances) {
  PolarityCounts c;
  for (const AspectInstance& inst : instances) {
    switch (inst.label) {
      case Polarity::kPositive: ++c.positive; break;
      case Polarity::kNeutral: ++c.neutral; break;
      case Polarity::kNegative: ++c.negative; break;
    }
  }
  return c;
}

std::string to_jsonl(std::span<const AspectInstance> instances) {
  std::string out;
  for (const AspectInstance& inst : instances) {
    nlohmann::json rec = {{"text", inst.raw_text},
                          {"aspect_char_start", inst.char_begin},
                          {"aspect_char_end", inst.char_end},
                          {"label", polarity_name(inst.label)}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace mcrf
