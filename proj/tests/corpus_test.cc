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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "mcrf/corpus.h"
#include "mcrf/errors.h"

namespace mcrf {
namespace {

constexpr std::string_view kRestaurants2014 = R"(<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="1">
    <text>The food was great but the service was slow.</text>
    <aspectTerms>
      <aspectTerm term="food" polarity="positive" from="4" to="8"/>
      <aspectTerm term="service" polarity="negative" from="27" to="34"/>
    </aspectTerms>
  </sentence>
  <sentence id="2">
    <text>Decent wine list, I guess.</text>
    <aspectTerms>
      <aspectTerm term="wine list" polarity="conflict" from="7" to="16"/>
    </aspectTerms>
  </sentence>
  <sentence id="3">
    <text>We went on a Tuesday.</text>
  </sentence>
</sentences>
)";

constexpr std::string_view kRestaurants2016 = R"(<?xml version="1.0" encoding="UTF-8"?>
<Reviews>
  <Review rid="r1">
    <sentences>
      <sentence id="r1:0">
        <text>Great sushi, rude waiter.</text>
        <Opinions>
          <Opinion target="sushi" category="FOOD#QUALITY" polarity="positive" from="6" to="11"/>
          <Opinion target="sushi" category="FOOD#STYLE" polarity="positive" from="6" to="11"/>
          <Opinion target="waiter" category="SERVICE#GENERAL" polarity="negative" from="18" to="24"/>
          <Opinion target="NULL" category="RESTAURANT#GENERAL" polarity="positive" from="0" to="0"/>
        </Opinions>
      </sentence>
      <sentence id="r1:1">
        <text>The pasta, hmm.</text>
        <Opinions>
          <Opinion target="pasta" category="FOOD#QUALITY" polarity="positive" from="4" to="9"/>
          <Opinion target="pasta" category="FOOD#PRICES" polarity="negative" from="4" to="9"/>
        </Opinions>
      </sentence>
    </sentences>
  </Review>
</Reviews>
)";

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(text)) out.push_back(t.text);
  return out;
}

TEST_CASE("tokenize lowercases and splits punctuation") {
  CHECK(words_of("The food, wasn't GREAT!") ==
        std::vector<std::string>{"the", "food", ",", "wasn", "'", "t", "great", "!"});
  CHECK(words_of("  \t\n ").empty());
  const auto toks = tokenize("ab  cd");
  REQUIRE(toks.size() == 2);
  CHECK(toks[1].begin == 4);
  CHECK(toks[1].end == 6);
  // Non-ASCII bytes stay inside words.
  CHECK(words_of("crème brûlée") == std::vector<std::string>{"crème", "brûlée"});
}

TEST_CASE("character offsets count code points") {
  const std::string text = "café au lait";
  CHECK(char_to_byte_offset(text, 0) == 0);
  CHECK(char_to_byte_offset(text, 4) == 5);  // 'é' is two bytes
  CHECK(char_to_byte_offset(text, 5) == 6);
  CHECK(char_to_byte_offset(text, 100) == text.size());

  const auto inst = make_instance(text, 5, 7, Polarity::kNeutral);
  REQUIRE(inst);
  CHECK(inst->words[inst->aspect_start] == "au");
  CHECK(inst->aspect_start == inst->aspect_end);
}

TEST_CASE("make_instance aligns multi-token and partial spans") {
  const auto inst = make_instance("The wine list was long.", 4, 13, Polarity::kPositive);
  REQUIRE(inst);
  CHECK(inst->aspect_start == 1);
  CHECK(inst->aspect_end == 2);
  CHECK(inst->length() == 6);
  CHECK(inst->in_aspect(2));
  CHECK_FALSE(inst->in_aspect(3));

  // A span cutting into a word still selects that word.
  const auto partial = make_instance("The wine list", 5, 7, Polarity::kPositive);
  REQUIRE(partial);
  CHECK(partial->aspect_start == 1);
  CHECK(partial->aspect_end == 1);

  CHECK_FALSE(make_instance("The wine", 3, 4, Polarity::kPositive));  // whitespace only
  CHECK_FALSE(make_instance("The wine", 4, 4, Polarity::kPositive));
}

TEST_CASE("SemEval 2014 markup") {
  const ParsedCorpus c = parse_corpus_text(kRestaurants2014, CorpusFormat::kSemEvalXml);
  REQUIRE(c.instances.size() == 2);
  CHECK(c.instances[0].words[c.instances[0].aspect_start] == "food");
  CHECK(c.instances[0].label == Polarity::kPositive);
  CHECK(c.instances[1].words[c.instances[1].aspect_start] == "service");
  CHECK(c.instances[1].label == Polarity::kNegative);
  CHECK(c.instances[0].raw_text == c.instances[1].raw_text);
  CHECK(c.dropped.sentences == 3);
  CHECK(c.dropped.conflict == 1);
  CHECK(c.dropped.unaligned == 0);
  CHECK(c.dropped.total() == 1);
}

TEST_CASE("SemEval 2016 markup merges repeated targets") {
  const ParsedCorpus c = parse_corpus_text(kRestaurants2016, CorpusFormat::kSemEvalXml);
  REQUIRE(c.instances.size() == 2);
  CHECK(c.instances[0].words[c.instances[0].aspect_start] == "sushi");
  CHECK(c.instances[1].words[c.instances[1].aspect_start] == "waiter");
  // pasta carries two polarities.
  CHECK(c.dropped.conflict == 1);
}

TEST_CASE("a sentence whose only aspect is conflict yields nothing") {
  const std::string xml = R"(<sentences><sentence id="9"><text>So-so.</text>
    <aspectTerms><aspectTerm term="So" polarity="conflict" from="0" to="2"/></aspectTerms>
    </sentence></sentences>)";
  const ParsedCorpus c = parse_corpus_text(xml, CorpusFormat::kSemEvalXml);
  CHECK(c.instances.empty());
  CHECK(c.dropped.total() == 1);
}

TEST_CASE("malformed inputs") {
  const std::string broken = "<sentences>\n<sentence id=\"1\"><text>x</text>\n</sentences>";
  try {
    parse_corpus_text(broken, CorpusFormat::kSemEvalXml, "broken.xml");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("broken.xml:") == 0);
  }

  const std::string bad_offset = R"(<sentences><sentence id="1"><text>food</text>
    <aspectTerms><aspectTerm term="food" polarity="positive" from="x" to="4"/></aspectTerms>
    </sentence></sentences>)";
  CHECK_THROWS_AS(parse_corpus_text(bad_offset, CorpusFormat::kSemEvalXml), ParseError);

  const std::string bad_label = R"(<sentences><sentence id="1"><text>food</text>
    <aspectTerms><aspectTerm term="food" polarity="meh" from="0" to="4"/></aspectTerms>
    </sentence></sentences>)";
  CHECK_THROWS_AS(parse_corpus_text(bad_label, CorpusFormat::kSemEvalXml), ParseError);

  CHECK_THROWS_AS(parse_corpus_text("{\"text\": \"x\"\n", CorpusFormat::kJsonl),
                  ParseError);
  CHECK_THROWS_AS(parse_corpus_text("{\"text\": \"x\"}\n", CorpusFormat::kJsonl),
                  ParseError);
  try {
    parse_corpus_text("\n{oops}\n", CorpusFormat::kJsonl, "a.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("a.jsonl:2:") == 0);
  }
}

TEST_CASE("JSONL round trip") {
  const ParsedCorpus xml = parse_corpus_text(kRestaurants2014, CorpusFormat::kSemEvalXml);
  const std::string jsonl = to_jsonl(xml.instances);
  const ParsedCorpus back = parse_corpus_text(jsonl, CorpusFormat::kJsonl);
  REQUIRE(back.instances.size() == xml.instances.size());
  for (std::size_t i = 0; i < back.instances.size(); ++i) {
    CHECK(back.instances[i].words == xml.instances[i].words);
    CHECK(back.instances[i].aspect_start == xml.instances[i].aspect_start);
    CHECK(back.instances[i].aspect_end == xml.instances[i].aspect_end);
    CHECK(back.instances[i].label == xml.instances[i].label);
  }
}

TEST_CASE("parse_corpus reads files and picks the format by extension") {
  const auto dir = std::filesystem::temp_directory_path() / "mcrf_corpus_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "rest.xml") << kRestaurants2014;
  }
  CHECK(detect_format(dir / "rest.xml") == CorpusFormat::kSemEvalXml);
  CHECK(detect_format(dir / "rest.JSONL") == CorpusFormat::kJsonl);
  const ParsedCorpus a = parse_corpus(dir / "rest.xml");
  const ParsedCorpus b = parse_corpus(dir / "rest.xml");
  REQUIRE(a.instances.size() == b.instances.size());
  CHECK(to_jsonl(a.instances) == to_jsonl(b.instances));
  CHECK_THROWS_AS(parse_corpus(dir / "missing.xml"), IoError);
  std::filesystem::remove_all(dir);
}

std::vector<AspectInstance> numbered(std::size_t n) {
  std::vector<AspectInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto inst = make_instance("item " + std::to_string(i), 0, 4, Polarity::kNeutral);
    out.push_back(*inst);
  }
  return out;
}

std::set<std::string> ids(const std::vector<AspectInstance>& v) {
  std::set<std::string> s;
  for (const auto& inst : v) s.insert(inst.words[1]);
  return s;
}

TEST_CASE("train/dev split partitions the pool") {
  for (std::size_t n : {1u, 5u, 6u, 7u, 100u, 3608u}) {
    const auto pool = numbered(n);
    const TrainDevSplit split = split_train_dev(pool, 42);
    CHECK(split.dev.size() == std::max<std::size_t>(n / 6, 1));
    CHECK(split.train.size() + split.dev.size() == n);
    std::set<std::string> all = ids(split.train);
    const std::set<std::string> dev = ids(split.dev);
    for (const auto& d : dev) CHECK(all.count(d) == 0);
    all.insert(dev.begin(), dev.end());
    CHECK(all.size() == n);

    // Input order survives inside each part.
    auto index_of = [](const AspectInstance& inst) { return std::stoul(inst.words[1]); };
    CHECK(std::is_sorted(split.train.begin(), split.train.end(),
                         [&](const auto& a, const auto& b) {
                           return index_of(a) < index_of(b);
                         }));
  }
}

TEST_CASE("train/dev split is a function of the seed") {
  const auto pool = numbered(120);
  CHECK(ids(split_train_dev(pool, 1).dev) == ids(split_train_dev(pool, 1).dev));
  CHECK(ids(split_train_dev(pool, 1).dev) != ids(split_train_dev(pool, 2).dev));
}

TEST_CASE("polarity counts") {
  const ParsedCorpus c = parse_corpus_text(kRestaurants2014, CorpusFormat::kSemEvalXml);
  const PolarityCounts counts = count_polarities(c.instances);
  CHECK(counts == PolarityCounts{1, 0, 1});
  CHECK(counts.total() == 2);
  CHECK(polarity_name(Polarity::kNeutral) == "neutral");
  CHECK(parse_polarity("negative") == Polarity::kNegative);
  CHECK_FALSE(parse_polarity("conflict"));
}

}  // namespace
}  // namespace mcrf
