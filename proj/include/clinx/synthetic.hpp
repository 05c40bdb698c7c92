#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clinx/corpus.hpp"
#include "clinx/eval.hpp"
#include "clinx/tagger.hpp"

namespace clinx {

// Seed-deterministic stand-in for the access-restricted clinical corpus.
// Sentences come from templates whose cue words (negation, tense, degree
// modifiers, reporting verbs) sit inside the model window and fully determine
// the event attributes, so the attributes are learnable from context alone.
// Event words share their shape and suffix pattern, and a configurable
// fraction of test events use words never seen in training: a token-lookup
// baseline cannot recall them while the POS/shape channels can.
struct GeneratorSpec {
  std::uint64_t seed = 1;
  int train_docs = 60;
  int dev_docs = 20;
  int test_docs = 20;
  int sentences_per_doc = 28;
  double oov_rate = 0.3;  // fraction of test events drawn from unseen words

  std::vector<std::string> event_words;      // training event lexicon
  std::vector<std::string> oov_event_words;  // test-only event lexicon
  std::vector<std::string> distractor_nouns;

  GeneratorSpec();  // fills the default lexicons
};

struct CorpusSplit {
  std::vector<LabeledDocument> docs;
  std::vector<TaggedSentence> tagged;  // gold POS for the tagger
};

struct SyntheticCorpus {
  CorpusSplit train;
  CorpusSplit dev;
  CorpusSplit test;

  std::size_t total_events() const;
};

SyntheticCorpus generate(const GeneratorSpec& spec);

// Writes {train,dev,test}/{text,ann}/ plus train/tagged.txt under out_dir.
void write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir);

std::string render_tagged(const std::vector<TaggedSentence>& sentences);

}  // namespace clinx
