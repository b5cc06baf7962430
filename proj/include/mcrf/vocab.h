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

#ifndef MCRF_VOCAB_H_
#define MCRF_VOCAB_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcrf/corpus.h"
#include "mcrf/tensor.h"

namespace mcrf {

// Token <-> id map. Ids 0 and 1 are reserved for padding and unknown words;
// every other entry is bijective.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  // Rebuilds a vocabulary from its id-ordered token list (as stored in a
  // checkpoint). Throws FormatError if the specials are missing or a token
  // repeats.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int add(std::string_view token);
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  std::span<const std::string> tokens() const { return tokens_; }

  // FNV-1a over the id-ordered tokens.
  std::uint64_t hash() const;

  // Fills instance.tokens from instance.words; unknown words map to kUnk.
  void index(AspectInstance& instance) const;
  void index(std::span<AspectInstance> instances) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Adds the words of every instance, in order of first appearance.
void extend_vocabulary(Vocabulary& vocab, std::span<const AspectInstance> instances);

// |V| x dim word vectors with per-row provenance.
struct EmbeddingMatrix {
  Tensor table;
  std::vector<bool> pretrained;
  // Fraction of rows copied from the vector file; 0 for an empty vocabulary.
  double coverage = 0.0;

  std::size_t dim() const { return table.cols(); }
};

inline constexpr double kUnknownInitRange = 0.1;

// Every row uniform in [-0.1, 0.1].
EmbeddingMatrix random_embeddings(const Vocabulary& vocab, std::size_t dim, Rng& rng);

// Reads "token v1 ... v_dim" lines; rows for vocabulary tokens are copied
// verbatim and the rest drawn uniform in [-0.1, 0.1]. A first line of exactly
// two integers (word2vec header) is skipped. A line with the wrong number of
// values is a FormatError naming the line.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const Vocabulary& vocab, std::size_t dim, Rng& rng);
EmbeddingMatrix load_embeddings_text(std::string_view content,
                                     const Vocabulary& vocab, std::size_t dim,
                                     Rng& rng);

}  // namespace mcrf

#endif  // MCRF_VOCAB_H_
