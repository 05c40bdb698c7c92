#include "clinx/pipeline.hpp"

#include <algorithm>

#include "clinx/errors.hpp"
#include "clinx/training.hpp"

namespace clinx {

LabelScheme default_label_scheme(Task task) {
  switch (task) {
    case Task::Span:
      return {task, {"O", "B-EVENT", "I-EVENT"}};
    case Task::Modality:
      return {task, {"ACTUAL", "HYPOTHETICAL", "HEDGED", "GENERIC"}};
    case Task::Degree:
      return {task, {"MOST", "LITTLE", "N/A"}};
    case Task::Polarity:
      return {task, {"POS", "NEG"}};
    case Task::Type:
      return {task, {"ASPECTUAL", "EVIDENTIAL", "N/A"}};
    case Task::DocTime:
      return {task, {"BEFORE", "OVERLAP", "AFTER", "BEFORE-OVERLAP"}};
  }
  throw DataError("unknown task");
}

const ModelBundle& ModelSet::require(Task task) const {
  auto it = models.find(task);
  if (it == models.end()) {
    throw DataError("no model loaded for task '" + task_name(task) + "'");
  }
  return it->second;
}

TokenSequence preprocess(const Document& doc, const TaggerModel& tagger) {
  TokenSequence seq = tokenize(doc.text, doc.id);
  shape_tokens(seq);
  tag(tagger, seq);
  return seq;
}

std::vector<std::pair<std::size_t, std::size_t>> bio_decode(
    const std::vector<std::string>& tags,
    const std::vector<std::pair<std::size_t, std::size_t>>& token_offsets) {
  if (tags.size() != token_offsets.size()) {
    throw DataError("bio_decode: tag/offset length mismatch");
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  bool open = false;
  std::size_t begin = 0, end = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t == "B-EVENT" || (t == "I-EVENT" && !open)) {
      if (open) spans.emplace_back(begin, end);
      open = true;
      begin = token_offsets[i].first;
      end = token_offsets[i].second;
    } else if (t == "I-EVENT") {
      end = token_offsets[i].second;
    } else if (t == "O") {
      if (open) spans.emplace_back(begin, end);
      open = false;
    } else {
      throw DataError("bio_decode: unexpected tag '" + t + "'");
    }
  }
  if (open) spans.emplace_back(begin, end);
  return spans;
}

std::vector<std::pair<std::size_t, std::size_t>> identify_spans(
    const ModelBundle& span_model, const Document& doc) {
  if (!span_model.tagger) {
    throw DataError("span model carries no tagger");
  }
  TokenSequence seq = preprocess(doc, *span_model.tagger);
  if (seq.tokens.empty()) return {};

  std::vector<std::string> tags(seq.tokens.size());
  std::vector<std::pair<std::size_t, std::size_t>> offsets(seq.tokens.size());
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const WindowInstance win =
        extract_window(seq, span_model.vocabs, i, span_model.hp.window);
    const Prediction pred = predict(span_model, win);
    tags[i] = span_model.labels.at(pred.label);
    offsets[i] = {seq.tokens[i].begin, seq.tokens[i].end};
  }
  return bio_decode(tags, offsets);
}

namespace {

// index of the first/last token overlapping [begin, end), or npos
std::size_t span_anchor(const TokenSequence& seq, std::size_t begin,
                        std::size_t end, AttributeCenter center) {
  std::size_t first = std::string::npos;
  std::size_t last = std::string::npos;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const Token& t = seq.tokens[i];
    if (t.begin < end && begin < t.end) {
      if (first == std::string::npos) first = i;
      last = i;
    }
    if (t.begin >= end) break;
  }
  return center == AttributeCenter::FirstToken ? first : last;
}

void apply_prediction(EventAnnotation& ev, Task task,
                      const std::string& label) {
  switch (task) {
    case Task::Modality: ev.modality = modality_from_string(label); break;
    case Task::Degree: ev.degree = degree_from_string(label); break;
    case Task::Polarity: ev.polarity = polarity_from_string(label); break;
    case Task::Type: ev.type = event_type_from_string(label); break;
    case Task::DocTime: ev.doctimerel = doctimerel_from_string(label); break;
    case Task::Span: throw DataError("span is not an attribute task");
  }
}

}  // namespace

ClassifyResult classify_attributes(
    const ModelSet& models, const std::vector<Task>& tasks, const Document& doc,
    const std::vector<std::pair<std::size_t, std::size_t>>& spans,
    AttributeCenter center) {
  ClassifyResult result;
  if (spans.empty()) return result;

  const TaggerModel* tagger = nullptr;
  for (Task t : tasks) {
    const ModelBundle& m = models.require(t);
    if (m.tagger) {
      tagger = &*m.tagger;
      break;
    }
  }
  if (!tagger) throw DataError("no attribute model carries a tagger");
  TokenSequence seq = preprocess(doc, *tagger);

  for (const auto& [begin, end] : spans) {
    const std::size_t anchor = span_anchor(seq, begin, end, center);
    if (anchor == std::string::npos) {
      ++result.skipped_spans;
      continue;
    }
    EventAnnotation ev;
    ev.begin = begin;
    ev.end = end;
    for (Task t : tasks) {
      const ModelBundle& m = models.require(t);
      const WindowInstance win =
          extract_window(seq, m.vocabs, anchor, m.hp.window);
      const Prediction pred = predict(m, win);
      apply_prediction(ev, t, m.labels.at(pred.label));
    }
    result.events.push_back(ev);
  }
  return result;
}

AnnotationSet extract(const ModelSet& models, const Document& doc,
                      const ExtractOptions& opts) {
  AnnotationSet out;
  out.doc_id = doc.id;
  for (Task t : opts.tasks) models.require(t);  // fail fast on missing models

  if (opts.mode == ExtractMode::SystemSpans) {
    const auto spans = identify_spans(models.require(Task::Span), doc);
    std::vector<Task> attr_tasks;
    for (Task t : opts.tasks) {
      if (t != Task::Span) attr_tasks.push_back(t);
    }
    if (attr_tasks.empty()) {
      for (const auto& [begin, end] : spans) {
        EventAnnotation ev;
        ev.begin = begin;
        ev.end = end;
        out.events.push_back(ev);
      }
    } else {
      out.events = classify_attributes(models, attr_tasks, doc, spans,
                                       opts.center)
                       .events;
    }
  } else {
    if (!opts.gold) throw DataError("extract: GoldSpans mode needs gold spans");
    std::vector<Task> attr_tasks;
    for (Task t : opts.tasks) {
      if (t != Task::Span) attr_tasks.push_back(t);
    }
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const EventAnnotation& ev : opts.gold->events) {
      spans.emplace_back(ev.begin, ev.end);
    }
    ClassifyResult predicted =
        classify_attributes(models, attr_tasks, doc, spans, opts.center);
    // keep gold values for tasks we are not predicting
    std::size_t pi = 0;
    for (const EventAnnotation& gold_ev : opts.gold->events) {
      const std::size_t anchor_check =
          pi < predicted.events.size() &&
                  predicted.events[pi].begin == gold_ev.begin &&
                  predicted.events[pi].end == gold_ev.end
              ? pi
              : std::string::npos;
      if (anchor_check == std::string::npos) continue;  // span was skipped
      EventAnnotation ev = gold_ev;
      for (Task t : attr_tasks) {
        switch (t) {
          case Task::Modality: ev.modality = predicted.events[pi].modality; break;
          case Task::Degree: ev.degree = predicted.events[pi].degree; break;
          case Task::Polarity: ev.polarity = predicted.events[pi].polarity; break;
          case Task::Type: ev.type = predicted.events[pi].type; break;
          case Task::DocTime: ev.doctimerel = predicted.events[pi].doctimerel; break;
          case Task::Span: break;
        }
      }
      out.events.push_back(ev);
      ++pi;
    }
  }

  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const EventAnnotation& a, const EventAnnotation& b) {
                     return a.begin != b.begin ? a.begin < b.begin
                                               : a.end < b.end;
                   });
  validate_annotations(out, doc);
  return out;
}

std::vector<WindowInstance> build_task_instances(
    Task task, const std::vector<LabeledDocument>& corpus,
    const Vocabularies& vocabs, const std::vector<std::string>& labels,
    const TaggerModel& tagger, int window, AttributeCenter center) {
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_index[labels[i]] = static_cast<int>(i);
  }
  auto index_of = [&](const std::string& label) {
    auto it = label_index.find(label);
    if (it == label_index.end()) {
      throw DataError("label '" + label + "' not in the task's class set");
    }
    return it->second;
  };

  std::vector<WindowInstance> out;
  for (const LabeledDocument& ld : corpus) {
    TokenSequence seq = preprocess(ld.doc, tagger);
    if (seq.tokens.empty()) continue;
    if (task == Task::Span) {
      const auto bio = align_to_tokens(ld.gold, seq, ld.doc);
      for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        WindowInstance win = extract_window(seq, vocabs, i, window);
        win.label = index_of(bio[i]);
        out.push_back(std::move(win));
      }
    } else {
      for (const EventAnnotation& ev : ld.gold.events) {
        const std::size_t anchor = span_anchor(seq, ev.begin, ev.end, center);
        if (anchor == std::string::npos) continue;
        std::string value;
        switch (task) {
          case Task::Modality: value = to_string(ev.modality); break;
          case Task::Degree: value = to_string(ev.degree); break;
          case Task::Polarity: value = to_string(ev.polarity); break;
          case Task::Type: value = to_string(ev.type); break;
          case Task::DocTime:
            if (!ev.doctimerel) continue;  // unannotated events are skipped
            value = to_string(*ev.doctimerel);
            break;
          case Task::Span: break;
        }
        WindowInstance win = extract_window(seq, vocabs, anchor, window);
        win.label = index_of(value);
        out.push_back(std::move(win));
      }
    }
  }
  return out;
}

}  // namespace clinx
