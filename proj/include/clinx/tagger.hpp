#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clinx/textproc.hpp"

namespace clinx {

using TaggedSentence = std::vector<std::pair<std::string, std::string>>;

// Averaged perceptron POS tagger, greedy left-to-right decoding. Features per
// position: lowercased word, suffixes of length 1-3, word shape, previous
// (predicted) tag, lowercased previous/next words. Ties in the score argmax
// go to the lexicographically smallest tag.
struct TaggerModel {
  std::vector<std::string> tags;  // sorted; argmax order = tie-break order
  // feature -> (tag index -> weight); weights are f32 after finalization so
  // a serialize/deserialize round trip is the identity
  std::map<std::string, std::map<std::uint32_t, float>> weights;
  bool finalized = false;

  const std::string& predict(const std::vector<std::string>& features) const;
};

TaggerModel train_tagger(const std::vector<TaggedSentence>& sentences,
                         int epochs, std::uint64_t seed);

// fills Token::pos for every token; tokens must already carry surfaces
void tag(const TaggerModel& model, TokenSequence& seq);

// One sentence per line, tokens as word/TAG separated by single spaces.
std::vector<TaggedSentence> parse_tagged_corpus(const std::string& text);

}  // namespace clinx
