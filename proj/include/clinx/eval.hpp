#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "clinx/corpus.hpp"

namespace clinx {

enum class Task { Span, Modality, Degree, Polarity, Type, DocTime };

std::string task_name(Task t);
Task task_from_name(const std::string& s);
const std::vector<Task>& all_tasks();

struct MetricReport {
  std::string task;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t system_count = 0;  // |S|
  std::size_t gold_count = 0;    // |H|
  std::size_t hits = 0;          // |S n H|
};

// spans: (doc_id, begin, end); attributes: (doc_id, begin, end, value)
using SpanItem = std::tuple<std::string, std::size_t, std::size_t>;
using AttrItem = std::tuple<std::string, std::size_t, std::size_t, std::string>;

// P = |S n H| / |S|, R = |S n H| / |H|, F1 = 2PR/(P+R); empty S gives P = 0,
// empty H gives R = 0, and F1 = 0 when P + R = 0.
MetricReport prf(const std::set<SpanItem>& system,
                 const std::set<SpanItem>& human);
MetricReport prf(const std::set<AttrItem>& system,
                 const std::set<AttrItem>& human);

using AnnotationMap = std::map<std::string, AnnotationSet>;  // doc_id keyed

// Corpus-pooled (micro) scoring. Both sides must cover the same documents.
// Attribute items only earn credit when the offsets are exact, so attribute
// scores are capped by span accuracy.
MetricReport evaluate(const AnnotationMap& system, const AnnotationMap& gold,
                      Task task);

std::string render_table(const std::vector<MetricReport>& reports);
// task<TAB>P<TAB>R<TAB>F1<TAB>|S|<TAB>|H|<TAB>|SnH|
std::string render_machine(const std::vector<MetricReport>& reports);

// Most-frequent-label-per-token baseline. Tokens are lowercased; ties go to
// the higher count and then the lexicographically smaller label. Unseen
// tokens get O for spans and the training majority value per attribute.
struct MemorizeModel {
  std::map<std::string, std::string> span_lexicon;
  std::map<Task, std::map<std::string, std::string>> attr_lexicons;
  std::map<Task, std::string> attr_majority;
};

MemorizeModel train_memorize(const std::vector<LabeledDocument>& corpus);

AnnotationSet run_memorize(const MemorizeModel& model, const Document& doc);

}  // namespace clinx
