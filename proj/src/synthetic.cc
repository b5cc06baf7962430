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

#include "mcrf/synthetic.h"

#include <algorithm>
#include <random>
#include <string>

#include "mcrf/errors.h"
#include "mcrf/tensor.h"

namespace mcrf {
namespace {

const std::vector<std::vector<std::string>> kAspects = {
    {"food"},  {"service"}, {"staff"}, {"pasta"},    {"pizza"},
    {"wine"},  {"decor"},   {"menu"},  {"dessert"},  {"music"},
    {"wine", "list"}, {"battery", "life"}, {"screen"}, {"keyboard"}};

const std::vector<std::string> kPositive = {"great", "delicious", "excellent",
                                            "friendly", "superb", "lovely"};
const std::vector<std::string> kNeutral = {"ordinary", "standard", "typical",
                                           "usual", "regular", "plain"};
const std::vector<std::string> kNegative = {"awful", "terrible", "rude",
                                            "bland", "horrible", "slow"};

const std::vector<std::vector<std::string>> kSeparators = {
    {"and", "then", "the"}, {"but", "i", "think"}, {"while", "we", "found"},
    {"and", "after", "that"}, {"though", "to", "be", "honest"},
    {"and", "in", "general", "the"}};

const std::vector<std::vector<std::string>> kLead = {
    {}, {}, {"i", "think"}, {"we", "felt"}, {"honestly"}};
const std::vector<std::vector<std::string>> kTrail = {{}, {}, {"overall"}, {"today"},
                                                      {"this", "time"}};

enum class Pattern { kWasOpinion, kOpinionAfter, kOpinionFirst, kReallyOpinionFirst };

struct Segment {
  std::vector<std::string> words;
  std::size_t aspect_begin = 0;
  std::size_t aspect_len = 1;
  std::size_t opinion = 0;
};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

Segment make_segment(const std::vector<std::string>& aspect, const std::string& opinion,
                     Pattern pattern) {
  Segment s;
  auto push_aspect = [&] {
    s.aspect_begin = s.words.size();
    s.aspect_len = aspect.size();
    s.words.insert(s.words.end(), aspect.begin(), aspect.end());
  };
  switch (pattern) {
    case Pattern::kWasOpinion:
      push_aspect();
      s.words.push_back("was");
      s.opinion = s.words.size();
      s.words.push_back(opinion);
      break;
    case Pattern::kOpinionAfter:
      push_aspect();
      s.opinion = s.words.size();
      s.words.push_back(opinion);
      break;
    case Pattern::kOpinionFirst:
      s.opinion = s.words.size();
      s.words.push_back(opinion);
      push_aspect();
      break;
    case Pattern::kReallyOpinionFirst:
      s.opinion = s.words.size();
      s.words.push_back(opinion);
      s.words.push_back("looking");
      push_aspect();
      break;
  }
  return s;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticOptions& options) {
  Rng rng(options.seed);
  SyntheticCorpus corpus;
  std::uniform_int_distribution<int> aspect_count(1, 3);
  std::uniform_int_distribution<int> polarity(0, kNumPolarities - 1);
  std::uniform_int_distribution<int> pattern(0, 3);

  while (corpus.instances.size() < options.instances) {
    const int k = aspect_count(rng);
    std::vector<std::size_t> aspect_ids(kAspects.size());
    for (std::size_t i = 0; i < aspect_ids.size(); ++i) aspect_ids[i] = i;
    std::shuffle(aspect_ids.begin(), aspect_ids.end(), rng);

    std::vector<std::string> words = pick(kLead, rng);
    struct Placed {
      std::size_t aspect_begin, aspect_end, opinion;
      Polarity label;
    };
    std::vector<Placed> placed;
    for (int a = 0; a < k; ++a) {
      if (a > 0) {
        const auto& sep = pick(kSeparators, rng);
        words.insert(words.end(), sep.begin(), sep.end());
      }
      const auto label = static_cast<Polarity>(polarity(rng));
      const auto& lexicon = label == Polarity::kPositive   ? kPositive
                            : label == Polarity::kNeutral ? kNeutral
                                                          : kNegative;
      const Segment seg = make_segment(kAspects[aspect_ids[a]], pick(lexicon, rng),
                                       static_cast<Pattern>(pattern(rng)));
      const std::size_t offset = words.size();
      words.insert(words.end(), seg.words.begin(), seg.words.end());
      placed.push_back({offset + seg.aspect_begin,
                        offset + seg.aspect_begin + seg.aspect_len - 1,
                        offset + seg.opinion, label});
    }
    const auto& trail = pick(kTrail, rng);
    words.insert(words.end(), trail.begin(), trail.end());

    std::string text;
    std::vector<std::size_t> starts;
    for (const std::string& w : words) {
      if (!text.empty()) text += ' ';
      starts.push_back(text.size());
      text += w;
    }
    for (const Placed& p : placed) {
      if (corpus.instances.size() >= options.instances) break;
      const std::size_t begin = starts[p.aspect_begin];
      const std::size_t end = starts[p.aspect_end] + words[p.aspect_end].size();
      auto inst = make_instance(text, begin, end, p.label);
      if (!inst || inst->aspect_start != p.aspect_begin || inst->aspect_end != p.aspect_end) {
        throw ContractViolation("synthetic: aspect span failed to align");
      }
      corpus.instances.push_back(std::move(*inst));
      corpus.opinion_token.push_back(p.opinion);
    }
  }
  return corpus;
}

}  // namespace mcrf
