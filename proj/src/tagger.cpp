#include "clinx/tagger.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "clinx/errors.hpp"
#include "clinx/rng.hpp"
#include "clinx/utf8.hpp"

namespace clinx {

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// suffixes are taken over code points so multibyte characters never split
std::string cp_suffix(const std::string& s, std::size_t k) {
  const Utf8Text dec = decode_utf8(s);
  const std::size_t n = dec.size();
  const std::size_t start = n > k ? n - k : 0;
  return utf8_slice(s, dec, start, n);
}

std::vector<std::string> extract_features(
    const std::vector<std::string>& words, std::size_t i,
    const std::string& prev_tag) {
  const std::string lower = ascii_lower(words[i]);
  std::vector<std::string> feats;
  feats.reserve(8);
  feats.push_back("w=" + lower);
  feats.push_back("suf1=" + cp_suffix(lower, 1));
  feats.push_back("suf2=" + cp_suffix(lower, 2));
  feats.push_back("suf3=" + cp_suffix(lower, 3));
  feats.push_back("shape=" + word_shape(words[i]));
  feats.push_back("ptag=" + prev_tag);
  feats.push_back("pw=" + (i > 0 ? ascii_lower(words[i - 1]) : "<s>"));
  feats.push_back("nw=" +
                  (i + 1 < words.size() ? ascii_lower(words[i + 1]) : "</s>"));
  return feats;
}

// training-time weights with lazy averaging bookkeeping
struct Cell {
  double weight = 0.0;
  double total = 0.0;
  std::uint64_t stamp = 0;
};

}  // namespace

const std::string& TaggerModel::predict(
    const std::vector<std::string>& features) const {
  std::vector<double> scores(tags.size(), 0.0);
  for (const std::string& f : features) {
    auto it = weights.find(f);
    if (it == weights.end()) continue;
    for (const auto& [tag_idx, w] : it->second) {
      scores[tag_idx] += static_cast<double>(w);
    }
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < scores.size(); ++t) {
    if (scores[t] > scores[best]) best = t;  // strict > keeps lowest index on ties
  }
  return tags[best];
}

TaggerModel train_tagger(const std::vector<TaggedSentence>& sentences,
                         int epochs, std::uint64_t seed) {
  if (sentences.empty()) throw DataError("train_tagger: empty training set");
  if (epochs < 1) throw DataError("train_tagger: epochs must be >= 1");

  std::set<std::string> tag_set;
  for (const auto& sent : sentences) {
    for (const auto& [word, tag] : sent) {
      if (tag.empty()) throw DataError("train_tagger: token without gold tag");
      tag_set.insert(tag);
    }
  }

  TaggerModel model;
  model.tags.assign(tag_set.begin(), tag_set.end());
  std::unordered_map<std::string, std::uint32_t> tag_index;
  for (std::uint32_t t = 0; t < model.tags.size(); ++t) {
    tag_index[model.tags[t]] = t;
  }

  std::map<std::string, std::map<std::uint32_t, Cell>> cells;
  std::uint64_t step = 0;

  auto bump = [&](const std::string& feat, std::uint32_t tag, double delta) {
    Cell& c = cells[feat][tag];
    c.total += static_cast<double>(step - c.stamp) * c.weight;
    c.stamp = step;
    c.weight += delta;
  };

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t si : order) {
      const TaggedSentence& sent = sentences[si];
      std::vector<std::string> words(sent.size());
      for (std::size_t i = 0; i < sent.size(); ++i) words[i] = sent[i].first;

      std::string prev_tag = "<s>";
      for (std::size_t i = 0; i < sent.size(); ++i) {
        ++step;
        const auto feats = extract_features(words, i, prev_tag);
        std::vector<double> scores(model.tags.size(), 0.0);
        for (const std::string& f : feats) {
          auto it = cells.find(f);
          if (it == cells.end()) continue;
          for (const auto& [tag_idx, cell] : it->second) {
            scores[tag_idx] += cell.weight;
          }
        }
        std::size_t guess = 0;
        for (std::size_t t = 1; t < scores.size(); ++t) {
          if (scores[t] > scores[guess]) guess = t;
        }
        const std::uint32_t gold = tag_index.at(sent[i].second);
        if (guess != gold) {
          for (const std::string& f : feats) {
            bump(f, gold, 1.0);
            bump(f, static_cast<std::uint32_t>(guess), -1.0);
          }
        }
        prev_tag = model.tags[guess];
      }
    }
  }

  for (auto& [feat, per_tag] : cells) {
    for (auto& [tag, cell] : per_tag) {
      cell.total += static_cast<double>(step - cell.stamp) * cell.weight;
      const double avg = cell.total / static_cast<double>(step);
      if (avg != 0.0) {
        model.weights[feat][tag] = static_cast<float>(avg);
      }
    }
  }
  model.finalized = true;
  return model;
}

void tag(const TaggerModel& model, TokenSequence& seq) {
  if (!model.finalized) throw DataError("tag: tagger model not finalized");
  std::vector<std::string> words(seq.tokens.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = seq.tokens[i].surface;
  }
  std::string prev_tag = "<s>";
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto feats = extract_features(words, i, prev_tag);
    const std::string& t = model.predict(feats);
    seq.tokens[i].pos = t;
    prev_tag = t;
  }
}

std::vector<TaggedSentence> parse_tagged_corpus(const std::string& text) {
  std::vector<TaggedSentence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    ++line_no;
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;

    TaggedSentence sent;
    std::size_t start = 0;
    while (start < line.size()) {
      std::size_t sp = line.find(' ', start);
      if (sp == std::string::npos) sp = line.size();
      const std::string item = line.substr(start, sp - start);
      start = sp + 1;
      if (item.empty()) continue;
      const std::size_t slash = item.rfind('/');
      if (slash == std::string::npos || slash == 0 ||
          slash + 1 == item.size()) {
        throw DataError("tagged corpus line " + std::to_string(line_no) +
                        ": expected word/TAG, got '" + item + "'");
      }
      sent.emplace_back(item.substr(0, slash), item.substr(slash + 1));
    }
    if (!sent.empty()) out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace clinx
