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
#include <vector>

#include "doctest.h"
#include "mcrf/errors.h"
#include "mcrf/vocab.h"

namespace mcrf {
namespace {

Vocabulary small_vocab() {
  Vocabulary v;
  v.add("food");
  v.add("great");
  v.add("zzzunseen");
  return v;
}

TEST_CASE("specials come first and unknowns map to <unk>") {
  Vocabulary v;
  CHECK(v.size() == 2);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kUnk) == "<unk>");
  const int food = v.add("food");
  CHECK(food == 2);
  CHECK(v.add("food") == food);
  CHECK(v.id("food") == food);
  CHECK(v.id("never") == Vocabulary::kUnk);
  CHECK(v.contains("food"));
  CHECK_FALSE(v.contains("never"));
  CHECK_THROWS_AS(v.token(99), ContractViolation);
}

TEST_CASE("from_tokens rebuilds the same vocabulary") {
  const Vocabulary v = small_vocab();
  const std::vector<std::string> tokens(v.tokens().begin(), v.tokens().end());
  const Vocabulary back = Vocabulary::from_tokens(tokens);
  CHECK(back.hash() == v.hash());
  CHECK(back.id("great") == v.id("great"));
  CHECK_THROWS_AS(Vocabulary::from_tokens({"food", "<pad>"}), FormatError);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"<pad>", "<unk>", "a", "a"}), FormatError);

  Vocabulary other = small_vocab();
  other.add("extra");
  CHECK(other.hash() != v.hash());
}

TEST_CASE("extend and index") {
  Vocabulary v;
  std::vector<AspectInstance> data(1);
  data[0].words = {"the", "food", "the"};
  extend_vocabulary(v, data);
  CHECK(v.size() == 4);
  v.index(data);
  CHECK(data[0].tokens == std::vector<int>{2, 3, 2});
}

TEST_CASE("pretrained rows are copied verbatim") {
  const Vocabulary v = small_vocab();
  const std::string file =
      "food 0.5 -0.25 1e-3\n"
      "other 9 9 9\n"
      "great 1 2 3\n";
  Rng rng(1);
  const EmbeddingMatrix m = load_embeddings_text(file, v, 3, rng);
  REQUIRE(m.table.shape() == Shape{v.size(), 3});
  CHECK(m.table.at(v.id("food"), 0) == 0.5);
  CHECK(m.table.at(v.id("food"), 1) == -0.25);
  CHECK(m.table.at(v.id("food"), 2) == 1e-3);
  CHECK(m.table.at(v.id("great"), 2) == 3.0);
  CHECK(m.pretrained[v.id("food")]);
  CHECK_FALSE(m.pretrained[v.id("zzzunseen")]);
  CHECK(m.coverage == doctest::Approx(2.0 / 5.0));
  for (double x : std::span(m.table.values()).subspan(v.id("zzzunseen") * 3, 3)) {
    CHECK(x >= -kUnknownInitRange);
    CHECK(x <= kUnknownInitRange);
  }
}

TEST_CASE("a word2vec header line is skipped") {
  const Vocabulary v = small_vocab();
  Rng rng(1);
  const EmbeddingMatrix m = load_embeddings_text("2 3\nfood 1 1 1\n", v, 3, rng);
  CHECK(m.table.at(v.id("food"), 0) == 1.0);
}

TEST_CASE("a wrong width names the line") {
  const Vocabulary v = small_vocab();
  Rng rng(1);
  try {
    load_embeddings_text("food 1 2 3\ngreat 1 2\n", v, 3, rng);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_embeddings_text("food 1 x 3\n", v, 3, rng), FormatError);
}

TEST_CASE("random embeddings are bounded and seeded") {
  const Vocabulary v = small_vocab();
  Rng a(5), b(5);
  const EmbeddingMatrix x = random_embeddings(v, 8, a);
  const EmbeddingMatrix y = random_embeddings(v, 8, b);
  for (std::size_t i = 0; i < x.table.size(); ++i) {
    CHECK(x.table.values()[i] == y.table.values()[i]);
    CHECK(std::abs(x.table.values()[i]) <= kUnknownInitRange);
  }
  CHECK(x.coverage == 0.0);
}

}  // namespace
}  // namespace mcrf
