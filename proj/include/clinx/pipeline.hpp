#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clinx/corpus.hpp"
#include "clinx/eval.hpp"
#include "clinx/network.hpp"

namespace clinx {

// Fixed class orders; serialized with each model so index -> label never
// drifts between training and extraction. The DocTimeRel values come from
// the phase-2 task definition and can be overridden at training time.
struct LabelScheme {
  Task task;
  std::vector<std::string> classes;
};

LabelScheme default_label_scheme(Task task);

struct ModelSet {
  std::map<Task, ModelBundle> models;

  const ModelBundle& require(Task task) const;
  bool has(Task task) const { return models.count(task) != 0; }
};

// the preprocessing every model input goes through: tokenize + shape + tag
TokenSequence preprocess(const Document& doc, const TaggerModel& tagger);

std::vector<std::pair<std::size_t, std::size_t>> identify_spans(
    const ModelBundle& span_model, const Document& doc);

// Maximal B(I)* runs become spans; an I with no live span opens one (orphan
// I is treated as B).
std::vector<std::pair<std::size_t, std::size_t>> bio_decode(
    const std::vector<std::string>& tags,
    const std::vector<std::pair<std::size_t, std::size_t>>& token_offsets);

enum class AttributeCenter { FirstToken, LastToken };

struct ClassifyResult {
  std::vector<EventAnnotation> events;
  std::size_t skipped_spans = 0;  // spans not aligned to any token
};

// One window per span, centered on the span's first token by default; each
// attribute model predicts independently from the same window position.
ClassifyResult classify_attributes(
    const ModelSet& models, const std::vector<Task>& tasks, const Document& doc,
    const std::vector<std::pair<std::size_t, std::size_t>>& spans,
    AttributeCenter center = AttributeCenter::FirstToken);

enum class ExtractMode { SystemSpans, GoldSpans };

struct ExtractOptions {
  ExtractMode mode = ExtractMode::SystemSpans;
  std::vector<Task> tasks;  // tasks to predict; must all have models
  const AnnotationSet* gold = nullptr;  // required in GoldSpans mode
  AttributeCenter center = AttributeCenter::FirstToken;
};

// SystemSpans: identify_spans then classify_attributes. GoldSpans: classify
// the requested tasks over the provided gold spans, keeping the gold values
// for everything else (the phase-2 protocol).
AnnotationSet extract(const ModelSet& models, const Document& doc,
                      const ExtractOptions& opts);

// Labeled training windows for one task. SPAN yields one instance per token
// with its BIO label; attribute tasks yield one instance per gold event,
// anchored the same way extraction anchors its windows.
std::vector<WindowInstance> build_task_instances(
    Task task, const std::vector<LabeledDocument>& corpus,
    const Vocabularies& vocabs, const std::vector<std::string>& labels,
    const TaggerModel& tagger, int window,
    AttributeCenter center = AttributeCenter::FirstToken);

}  // namespace clinx
