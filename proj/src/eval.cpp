#include "clinx/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "clinx/errors.hpp"
#include "clinx/pipeline.hpp"

namespace clinx {

std::string task_name(Task t) {
  switch (t) {
    case Task::Span: return "span";
    case Task::Modality: return "modality";
    case Task::Degree: return "degree";
    case Task::Polarity: return "polarity";
    case Task::Type: return "type";
    case Task::DocTime: return "doctimerel";
  }
  return {};
}

Task task_from_name(const std::string& s) {
  for (Task t : all_tasks()) {
    if (task_name(t) == s) return t;
  }
  throw ConfigError("unknown task '" + s + "'");
}

const std::vector<Task>& all_tasks() {
  static const std::vector<Task> tasks = {Task::Span,     Task::Modality,
                                          Task::Degree,   Task::Polarity,
                                          Task::Type,     Task::DocTime};
  return tasks;
}

namespace {

template <class Item>
MetricReport prf_impl(const std::set<Item>& system,
                      const std::set<Item>& human) {
  MetricReport r;
  r.system_count = system.size();
  r.gold_count = human.size();
  for (const Item& it : system) {
    if (human.count(it)) ++r.hits;
  }
  r.precision = r.system_count == 0
                    ? 0.0
                    : static_cast<double>(r.hits) /
                          static_cast<double>(r.system_count);
  r.recall = r.gold_count == 0 ? 0.0
                               : static_cast<double>(r.hits) /
                                     static_cast<double>(r.gold_count);
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

std::string attribute_value(const EventAnnotation& ev, Task task) {
  switch (task) {
    case Task::Modality: return to_string(ev.modality);
    case Task::Degree: return to_string(ev.degree);
    case Task::Polarity: return to_string(ev.polarity);
    case Task::Type: return to_string(ev.type);
    case Task::DocTime:
      return ev.doctimerel ? to_string(*ev.doctimerel) : std::string{};
    default: return {};
  }
}

std::set<AttrItem> attr_items(const AnnotationMap& anns, Task task) {
  std::set<AttrItem> items;
  for (const auto& [doc_id, set] : anns) {
    for (const EventAnnotation& ev : set.events) {
      const std::string v = attribute_value(ev, task);
      if (v.empty()) continue;  // events without the attribute are not items
      items.emplace(doc_id, ev.begin, ev.end, v);
    }
  }
  return items;
}

}  // namespace

MetricReport prf(const std::set<SpanItem>& system,
                 const std::set<SpanItem>& human) {
  return prf_impl(system, human);
}

MetricReport prf(const std::set<AttrItem>& system,
                 const std::set<AttrItem>& human) {
  return prf_impl(system, human);
}

MetricReport evaluate(const AnnotationMap& system, const AnnotationMap& gold,
                      Task task) {
  if (system.size() != gold.size() ||
      !std::equal(system.begin(), system.end(), gold.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw DataError("evaluate: system and gold cover different document sets");
  }
  MetricReport r;
  if (task == Task::Span) {
    std::set<SpanItem> s, h;
    for (const auto& [doc_id, set] : system) {
      for (const EventAnnotation& ev : set.events) {
        s.emplace(doc_id, ev.begin, ev.end);
      }
    }
    for (const auto& [doc_id, set] : gold) {
      for (const EventAnnotation& ev : set.events) {
        h.emplace(doc_id, ev.begin, ev.end);
      }
    }
    r = prf(s, h);
  } else {
    r = prf(attr_items(system, task), attr_items(gold, task));
  }
  r.task = task_name(task);
  return r;
}

std::string render_table(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "task" << std::right << std::setw(8)
      << "P" << std::setw(8) << "R" << std::setw(8) << "F1" << std::setw(8)
      << "|S|" << std::setw(8) << "|H|" << std::setw(8) << "hits" << "\n";
  out << std::string(60, '-') << "\n";
  for (const MetricReport& r : reports) {
    out << std::left << std::setw(12) << r.task << std::right << std::fixed
        << std::setprecision(3) << std::setw(8) << r.precision << std::setw(8)
        << r.recall << std::setw(8) << r.f1 << std::setw(8) << r.system_count
        << std::setw(8) << r.gold_count << std::setw(8) << r.hits << "\n";
  }
  return out.str();
}

std::string render_machine(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  for (const MetricReport& r : reports) {
    out << r.task << '\t' << std::fixed << std::setprecision(6) << r.precision
        << '\t' << r.recall << '\t' << r.f1 << '\t' << r.system_count << '\t'
        << r.gold_count << '\t' << r.hits << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Memorize baseline

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// most frequent value; ties by lexicographically smaller value
std::string majority(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

MemorizeModel train_memorize(const std::vector<LabeledDocument>& corpus) {
  if (corpus.empty()) throw DataError("train_memorize: empty corpus");

  std::map<std::string, std::map<std::string, std::size_t>> span_counts;
  std::map<Task, std::map<std::string, std::map<std::string, std::size_t>>>
      attr_counts;
  std::map<Task, std::map<std::string, std::size_t>> value_counts;

  const std::vector<Task> attr_tasks = {Task::Modality, Task::Degree,
                                        Task::Polarity, Task::Type,
                                        Task::DocTime};

  for (const LabeledDocument& ld : corpus) {
    TokenSequence seq = tokenize(ld.doc.text, ld.doc.id);
    const std::vector<std::string> labels =
        align_to_tokens(ld.gold, seq, ld.doc);
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      span_counts[ascii_lower(seq.tokens[i].surface)][labels[i]]++;
    }
    for (const EventAnnotation& ev : ld.gold.events) {
      // attribute lexicon keyed by the first token overlapping the event
      const Token* first = nullptr;
      for (const Token& t : seq.tokens) {
        if (t.begin < ev.end && ev.begin < t.end) {
          first = &t;
          break;
        }
      }
      if (!first) continue;
      const std::string key = ascii_lower(first->surface);
      for (Task task : attr_tasks) {
        const std::string v = attribute_value(ev, task);
        if (v.empty()) continue;
        attr_counts[task][key][v]++;
        value_counts[task][v]++;
      }
    }
  }

  MemorizeModel model;
  for (const auto& [token, counts] : span_counts) {
    model.span_lexicon[token] = majority(counts);
  }
  for (const auto& [task, per_token] : attr_counts) {
    for (const auto& [token, counts] : per_token) {
      model.attr_lexicons[task][token] = majority(counts);
    }
  }
  for (const auto& [task, counts] : value_counts) {
    model.attr_majority[task] = majority(counts);
  }
  return model;
}

AnnotationSet run_memorize(const MemorizeModel& model, const Document& doc) {
  TokenSequence seq = tokenize(doc.text, doc.id);
  std::vector<std::string> labels(seq.tokens.size(), "O");
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    auto it = model.span_lexicon.find(ascii_lower(seq.tokens[i].surface));
    if (it != model.span_lexicon.end()) labels[i] = it->second;
  }
  std::vector<std::pair<std::size_t, std::size_t>> offsets(seq.tokens.size());
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    offsets[i] = {seq.tokens[i].begin, seq.tokens[i].end};
  }
  const auto spans = bio_decode(labels, offsets);

  AnnotationSet out;
  out.doc_id = doc.id;
  for (const auto& [begin, end] : spans) {
    EventAnnotation ev;
    ev.begin = begin;
    ev.end = end;
    const Token* first = nullptr;
    for (const Token& t : seq.tokens) {
      if (t.begin < end && begin < t.end) {
        first = &t;
        break;
      }
    }
    const std::string key = first ? ascii_lower(first->surface) : std::string{};
    auto pick = [&](Task task) -> std::string {
      auto lex = model.attr_lexicons.find(task);
      if (lex != model.attr_lexicons.end()) {
        auto it = lex->second.find(key);
        if (it != lex->second.end()) return it->second;
      }
      auto maj = model.attr_majority.find(task);
      return maj != model.attr_majority.end() ? maj->second : std::string{};
    };
    if (const std::string v = pick(Task::Modality); !v.empty()) {
      ev.modality = modality_from_string(v);
    }
    if (const std::string v = pick(Task::Degree); !v.empty()) {
      ev.degree = degree_from_string(v);
    }
    if (const std::string v = pick(Task::Polarity); !v.empty()) {
      ev.polarity = polarity_from_string(v);
    }
    if (const std::string v = pick(Task::Type); !v.empty()) {
      ev.type = event_type_from_string(v);
    }
    if (const std::string v = pick(Task::DocTime); !v.empty()) {
      ev.doctimerel = doctimerel_from_string(v);
    }
    out.events.push_back(ev);
  }
  return out;
}

}  // namespace clinx
