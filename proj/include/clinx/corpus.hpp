#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "clinx/textproc.hpp"

namespace clinx {

struct Document {
  std::string id;
  std::string text;  // byte-identical to the source file, never mutated
  std::size_t length = 0;  // code points; the offset coordinate system
};

enum class Modality { Actual, Hypothetical, Hedged, Generic };
enum class Degree { Most, Little, NA };
enum class Polarity { Pos, Neg };
enum class EventType { Aspectual, Evidential, NA };
enum class DocTimeRel { Before, Overlap, After, BeforeOverlap };

std::string to_string(Modality v);
std::string to_string(Degree v);
std::string to_string(Polarity v);
std::string to_string(EventType v);
std::string to_string(DocTimeRel v);

Modality modality_from_string(const std::string& s);
Degree degree_from_string(const std::string& s);
Polarity polarity_from_string(const std::string& s);
EventType event_type_from_string(const std::string& s);
DocTimeRel doctimerel_from_string(const std::string& s);

struct EventAnnotation {
  std::size_t begin = 0;  // inclusive, 0-based code points
  std::size_t end = 0;    // exclusive
  Modality modality = Modality::Actual;
  Degree degree = Degree::NA;
  Polarity polarity = Polarity::Pos;
  EventType type = EventType::NA;
  std::optional<DocTimeRel> doctimerel;

  bool operator==(const EventAnnotation&) const = default;
};

struct AnnotationSet {
  std::string doc_id;
  std::vector<EventAnnotation> events;  // sorted by (begin, end), unique spans

  bool operator==(const AnnotationSet&) const = default;
};

// rejects missing files and invalid UTF-8; id comes from the file stem
Document load_document(const std::string& path);

Document make_document(std::string id, std::string text);

struct LabeledDocument {
  Document doc;
  AnnotationSet gold;
};

// Reads <doc_id>.txt from text_dir and the matching <doc_id>.ann.xml from
// ann_dir; every text file must have an annotation file and vice versa.
std::vector<LabeledDocument> load_labeled_corpus(const std::string& text_dir,
                                                 const std::string& ann_dir);

// text files only; returns documents sorted by id
std::vector<Document> load_documents(const std::string& text_dir);

// Standoff annotation file: root <annotations>, one <entity> per event with
// <id>, <span>BEGIN,END</span>, <type>EVENT</type> and the attribute values
// under <properties>. Spans are validated against the document; duplicate
// (begin, end) pairs and unknown attribute values are rejected.
AnnotationSet parse_annotations(const std::string& standoff_text,
                                const Document& doc);

std::string write_annotations(const AnnotationSet& set, const Document& doc);

// Per-token BIO labels ("O", "B-EVENT", "I-EVENT"). A token overlapping an
// event span counts as inside it; the first such token of the event is B.
std::vector<std::string> align_to_tokens(const AnnotationSet& set,
                                         const TokenSequence& tokens,
                                         const Document& doc);

void validate_annotations(const AnnotationSet& set, const Document& doc);

}  // namespace clinx
