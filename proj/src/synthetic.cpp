#include "clinx/synthetic.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "clinx/errors.hpp"
#include "clinx/rng.hpp"

namespace clinx {

namespace {

struct Template {
  std::vector<std::string> words;  // "{EV}" = event slot, "{N}" = noun slot
  Modality modality = Modality::Actual;
  Degree degree = Degree::NA;
  Polarity polarity = Polarity::Pos;
  EventType type = EventType::NA;
  DocTimeRel dtr = DocTimeRel::Overlap;
  bool has_event = true;
};

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

Template ev(const std::string& text, Modality m, Degree d, Polarity p,
            EventType t, DocTimeRel dtr) {
  return {split_words(text), m, d, p, t, dtr, true};
}

Template filler(const std::string& text) {
  Template t;
  t.words = split_words(text);
  t.has_event = false;
  return t;
}

// Event sentences follow a fixed geometry: a {N} guard noun sits exactly 5
// tokens before and after the {EV} slot, and the 4 tokens on each side of
// the slot are the attribute cue words. Guard nouns never occur within 4
// tokens of an event anywhere in the corpus, so under the model's global
// max pooling "event at center" is decodable from window content alone:
// an event word is in the window and no guard noun is.
const std::vector<Template>& templates() {
  using M = Modality;
  using D = Degree;
  using P = Polarity;
  using T = EventType;
  using R = DocTimeRel;
  static const std::vector<Template> all = {
      ev("after the {N} patient did not have {EV} during the recent stay "
         "{N} was clear .",
         M::Actual, D::NA, P::Neg, T::NA, R::Before),
      ev("per the {N} the patient had severe {EV} over the past week "
         "{N} is pending .",
         M::Actual, D::Most, P::Pos, T::NA, R::Before),
      ev("at the {N} she has only mild {EV} at this time now "
         "{N} remains stable .",
         M::Actual, D::Little, P::Pos, T::NA, R::Overlap),
      ev("from the {N} he will likely develop {EV} if therapy is delayed "
         "{N} was discussed .",
         M::Hypothetical, D::NA, P::Pos, T::NA, R::After),
      ev("during the {N} the exam now shows {EV} along this same region "
         "{N} was marked .",
         M::Actual, D::NA, P::Pos, T::Evidential, R::Overlap),
      ev("after the {N} we will now resume {EV} once labs come back "
         "{N} is ready .",
         M::Actual, D::NA, P::Pos, T::Aspectual, R::After),
      ev("near the {N} patients often describe some {EV} after a typical "
         "course {N} was typical .",
         M::Generic, D::NA, P::Pos, T::NA, R::Overlap),
      ev("before the {N} she may have had {EV} before her last visit "
         "{N} was checked .",
         M::Hedged, D::NA, P::Pos, T::NA, R::Before),
      ev("since the {N} he has been having {EV} since the prior week "
         "{N} was noted .",
         M::Actual, D::NA, P::Pos, T::NA, R::BeforeOverlap),
      ev("at the {N} they chose to stop {EV} while awaiting new labs "
         "{N} was set .",
         M::Actual, D::NA, P::Pos, T::Aspectual, R::Overlap),
      ev("at the {N} she denied any recent {EV} with no new concern "
         "{N} was fine .",
         M::Actual, D::NA, P::Neg, T::NA, R::Overlap),
      ev("inside the {N} there was significant new {EV} during the same "
         "stay {N} was seen .",
         M::Actual, D::Most, P::Pos, T::NA, R::Before),
      ev("around the {N} he had some slight {EV} around the same time "
         "{N} was placed .",
         M::Actual, D::Little, P::Pos, T::NA, R::Before),
      ev("within the {N} the note documented prior {EV} from an earlier "
         "stay {N} was kept .",
         M::Actual, D::NA, P::Pos, T::Evidential, R::Before),
      filler("the {N} was reviewed with the {N} ."),
      filler("follow up at the {N} in two weeks ."),
      filler("the {N} is stable and the {N} is clear ."),
      filler("labs were drawn at the {N} this morning ."),
      filler("the {N} will return to the {N} on monday ."),
  };
  return all;
}

// POS tags for every fixed template word; event slots are VBG, noun slots NN
const std::map<std::string, std::string>& word_tags() {
  static const std::map<std::string, std::string> tags = {
      {"the", "DT"},        {"a", "DT"},          {"any", "DT"},
      {"this", "DT"},       {"no", "DT"},         {"some", "DT"},
      {"an", "DT"},         {"there", "EX"},      {"patient", "NN"},
      {"patients", "NNS"},  {"exam", "NN"},       {"visit", "NN"},
      {"therapy", "NN"},    {"time", "NN"},       {"week", "NN"},
      {"weeks", "NNS"},     {"labs", "NNS"},      {"monday", "NN"},
      {"stay", "NN"},       {"course", "NN"},     {"region", "NN"},
      {"concern", "NN"},    {"note", "NN"},       {"did", "VBD"},
      {"had", "VBD"},       {"denied", "VBD"},    {"was", "VBD"},
      {"were", "VBD"},      {"chose", "VBD"},     {"documented", "VBD"},
      {"has", "VBZ"},       {"is", "VBZ"},        {"shows", "VBZ"},
      {"remains", "VBZ"},   {"have", "VB"},       {"develop", "VB"},
      {"resume", "VB"},     {"stop", "VB"},       {"return", "VB"},
      {"follow", "VB"},     {"come", "VBP"},      {"describe", "VBP"},
      {"having", "VBG"},    {"awaiting", "VBG"},  {"seen", "VBN"},
      {"been", "VBN"},      {"drawn", "VBN"},     {"reviewed", "VBN"},
      {"delayed", "VBN"},   {"discussed", "VBN"}, {"marked", "VBN"},
      {"checked", "VBN"},   {"noted", "VBN"},     {"set", "VBN"},
      {"placed", "VBN"},    {"kept", "VBN"},      {"will", "MD"},
      {"may", "MD"},        {"not", "RB"},        {"often", "RB"},
      {"now", "RB"},        {"only", "RB"},       {"likely", "RB"},
      {"back", "RB"},       {"up", "RB"},         {"after", "IN"},
      {"before", "IN"},     {"during", "IN"},     {"on", "IN"},
      {"in", "IN"},         {"at", "IN"},         {"since", "IN"},
      {"if", "IN"},         {"with", "IN"},       {"while", "IN"},
      {"once", "IN"},       {"over", "IN"},       {"per", "IN"},
      {"from", "IN"},       {"near", "IN"},       {"inside", "IN"},
      {"around", "IN"},     {"within", "IN"},     {"along", "IN"},
      {"to", "TO"},         {"she", "PRP"},       {"he", "PRP"},
      {"we", "PRP"},        {"they", "PRP"},      {"her", "PRP$"},
      {"severe", "JJ"},     {"mild", "JJ"},       {"significant", "JJ"},
      {"slight", "JJ"},     {"stable", "JJ"},     {"clear", "JJ"},
      {"last", "JJ"},       {"past", "JJ"},       {"recent", "JJ"},
      {"new", "JJ"},        {"same", "JJ"},       {"typical", "JJ"},
      {"prior", "JJ"},      {"earlier", "JJ"},    {"pending", "JJ"},
      {"ready", "JJ"},      {"fine", "JJ"},       {"two", "CD"},
      {"and", "CC"},        {"morning", "NN"},    {".", "."},
  };
  return tags;
}

struct PlannedSentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;
  int event_index = -1;  // token index of the event word, -1 if none
  const Template* source = nullptr;
};

PlannedSentence instantiate(const Template& tpl, Rng& rng,
                            const GeneratorSpec& spec) {
  PlannedSentence s;
  s.source = &tpl;
  for (const std::string& w : tpl.words) {
    if (w == "{EV}") {
      s.event_index = static_cast<int>(s.words.size());
      s.words.push_back("{EV}");  // filled later, after OOV planning
      s.tags.push_back("VBG");
    } else if (w == "{N}") {
      const std::string& noun = spec.distractor_nouns[static_cast<std::size_t>(
          rng.below(spec.distractor_nouns.size()))];
      s.words.push_back(noun);
      s.tags.push_back("NN");
    } else {
      s.words.push_back(w);
      s.tags.push_back(word_tags().at(w));
    }
  }
  return s;
}

CorpusSplit build_split(const GeneratorSpec& spec, const std::string& prefix,
                        int doc_count, std::uint64_t stream, bool with_oov) {
  Rng rng(mix_seed(spec.seed, stream));

  // plan all sentences first so the OOV quota can be applied corpus-wide
  std::vector<std::vector<PlannedSentence>> docs(
      static_cast<std::size_t>(doc_count));
  std::vector<std::pair<std::size_t, std::size_t>> event_slots;  // doc, sent
  for (int d = 0; d < doc_count; ++d) {
    for (int si = 0; si < spec.sentences_per_doc; ++si) {
      const Template& tpl = templates()[static_cast<std::size_t>(
          rng.below(templates().size()))];
      PlannedSentence s = instantiate(tpl, rng, spec);
      if (s.event_index >= 0) {
        event_slots.emplace_back(static_cast<std::size_t>(d),
                                 docs[static_cast<std::size_t>(d)].size());
      }
      docs[static_cast<std::size_t>(d)].push_back(std::move(s));
    }
  }

  // choose exactly floor(oov_rate * |events|) slots for unseen event words
  std::vector<std::size_t> slot_order(event_slots.size());
  for (std::size_t i = 0; i < slot_order.size(); ++i) slot_order[i] = i;
  std::size_t oov_quota = 0;
  if (with_oov && !spec.oov_event_words.empty()) {
    rng.shuffle(slot_order);
    oov_quota = static_cast<std::size_t>(
        spec.oov_rate * static_cast<double>(event_slots.size()));
  }
  std::vector<bool> use_oov(event_slots.size(), false);
  for (std::size_t i = 0; i < oov_quota; ++i) use_oov[slot_order[i]] = true;

  for (std::size_t e = 0; e < event_slots.size(); ++e) {
    const auto& [d, si] = event_slots[e];
    PlannedSentence& s = docs[d][si];
    const auto& lexicon = use_oov[e] ? spec.oov_event_words : spec.event_words;
    s.words[static_cast<std::size_t>(s.event_index)] =
        lexicon[static_cast<std::size_t>(rng.below(lexicon.size()))];
  }

  // render text + exact gold offsets (ASCII, so bytes == code points)
  CorpusSplit split;
  for (int d = 0; d < doc_count; ++d) {
    std::string text;
    AnnotationSet gold;
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "%s-%03d", prefix.c_str(), d);
    gold.doc_id = id_buf;

    for (const PlannedSentence& s : docs[static_cast<std::size_t>(d)]) {
      TaggedSentence tagged;
      for (std::size_t i = 0; i < s.words.size(); ++i) {
        if (i > 0) text.push_back(' ');
        if (static_cast<int>(i) == s.event_index) {
          EventAnnotation evt;
          evt.begin = text.size();
          evt.end = text.size() + s.words[i].size();
          evt.modality = s.source->modality;
          evt.degree = s.source->degree;
          evt.polarity = s.source->polarity;
          evt.type = s.source->type;
          evt.doctimerel = s.source->dtr;
          gold.events.push_back(evt);
        }
        text += s.words[i];
        tagged.emplace_back(s.words[i], s.tags[i]);
      }
      text.push_back('\n');
      split.tagged.push_back(std::move(tagged));
    }

    LabeledDocument ld;
    ld.doc = make_document(gold.doc_id, text);
    ld.gold = std::move(gold);
    validate_annotations(ld.gold, ld.doc);
    split.docs.push_back(std::move(ld));
  }
  return split;
}

}  // namespace

GeneratorSpec::GeneratorSpec() {
  event_words = {"bleeding", "swelling", "coughing", "vomiting",
                 "bruising", "itching",  "fainting", "cramping",
                 "sweating", "aching",   "wheezing", "burning"};
  oov_event_words = {"throbbing", "blistering", "twitching",
                     "flushing",  "shivering",  "tingling"};
  distractor_nouns = {"scan",     "biopsy",   "infusion", "consult",
                      "clinic",   "ward",     "unit",     "procedure",
                      "margin",   "incision", "dressing", "catheter",
                      "chart",    "report",   "morning",  "evening"};
}

std::size_t SyntheticCorpus::total_events() const {
  std::size_t n = 0;
  for (const CorpusSplit* s : {&train, &dev, &test}) {
    for (const LabeledDocument& d : s->docs) n += d.gold.events.size();
  }
  return n;
}

SyntheticCorpus generate(const GeneratorSpec& spec) {
  if (spec.event_words.empty() || spec.distractor_nouns.empty()) {
    throw DataError("generate: empty lexicon");
  }
  if (spec.train_docs < 1 || spec.dev_docs < 0 || spec.test_docs < 0 ||
      spec.sentences_per_doc < 1) {
    throw DataError("generate: invalid corpus sizes");
  }
  if (spec.oov_rate < 0.0 || spec.oov_rate > 1.0) {
    throw DataError("generate: oov_rate must be in [0, 1]");
  }
  SyntheticCorpus corpus;
  corpus.train = build_split(spec, "train", spec.train_docs, 0x7261, false);
  corpus.dev = build_split(spec, "dev", spec.dev_docs, 0xde7, false);
  corpus.test = build_split(spec, "test", spec.test_docs, 0x7e57, true);
  return corpus;
}

std::string render_tagged(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (const TaggedSentence& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i > 0) out.push_back(' ');
      out += s[i].first;
      out.push_back('/');
      out += s[i].second;
    }
    out.push_back('\n');
  }
  return out;
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const std::vector<std::pair<std::string, const CorpusSplit*>> splits = {
      {"train", &corpus.train}, {"dev", &corpus.dev}, {"test", &corpus.test}};
  for (const auto& [name, split] : splits) {
    const fs::path text_dir = fs::path(out_dir) / name / "text";
    const fs::path ann_dir = fs::path(out_dir) / name / "ann";
    fs::create_directories(text_dir);
    fs::create_directories(ann_dir);
    for (const LabeledDocument& ld : split->docs) {
      {
        std::ofstream out(text_dir / (ld.doc.id + ".txt"), std::ios::binary);
        if (!out) throw IoError("cannot write " + ld.doc.id + ".txt");
        out << ld.doc.text;
      }
      {
        std::ofstream out(ann_dir / (ld.doc.id + ".ann.xml"),
                          std::ios::binary);
        if (!out) throw IoError("cannot write " + ld.doc.id + ".ann.xml");
        out << write_annotations(ld.gold, ld.doc);
      }
    }
  }
  std::ofstream tagged(fs::path(out_dir) / "train" / "tagged.txt",
                       std::ios::binary);
  if (!tagged) throw IoError("cannot write tagged.txt");
  tagged << render_tagged(corpus.train.tagged);
}

}  // namespace clinx
