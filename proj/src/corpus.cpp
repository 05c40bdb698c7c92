#include "clinx/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clinx/errors.hpp"
#include "clinx/utf8.hpp"

namespace clinx {

std::string to_string(Modality v) {
  switch (v) {
    case Modality::Actual: return "ACTUAL";
    case Modality::Hypothetical: return "HYPOTHETICAL";
    case Modality::Hedged: return "HEDGED";
    case Modality::Generic: return "GENERIC";
  }
  return {};
}

std::string to_string(Degree v) {
  switch (v) {
    case Degree::Most: return "MOST";
    case Degree::Little: return "LITTLE";
    case Degree::NA: return "N/A";
  }
  return {};
}

std::string to_string(Polarity v) {
  switch (v) {
    case Polarity::Pos: return "POS";
    case Polarity::Neg: return "NEG";
  }
  return {};
}

std::string to_string(EventType v) {
  switch (v) {
    case EventType::Aspectual: return "ASPECTUAL";
    case EventType::Evidential: return "EVIDENTIAL";
    case EventType::NA: return "N/A";
  }
  return {};
}

std::string to_string(DocTimeRel v) {
  switch (v) {
    case DocTimeRel::Before: return "BEFORE";
    case DocTimeRel::Overlap: return "OVERLAP";
    case DocTimeRel::After: return "AFTER";
    case DocTimeRel::BeforeOverlap: return "BEFORE-OVERLAP";
  }
  return {};
}

namespace {

[[noreturn]] void bad_value(const char* attr, const std::string& s) {
  throw DataError(std::string("unrecognized ") + attr + " value '" + s + "'");
}

}  // namespace

Modality modality_from_string(const std::string& s) {
  if (s == "ACTUAL") return Modality::Actual;
  if (s == "HYPOTHETICAL") return Modality::Hypothetical;
  if (s == "HEDGED") return Modality::Hedged;
  if (s == "GENERIC") return Modality::Generic;
  bad_value("ContextualModality", s);
}

Degree degree_from_string(const std::string& s) {
  if (s == "MOST") return Degree::Most;
  if (s == "LITTLE") return Degree::Little;
  if (s == "N/A") return Degree::NA;
  bad_value("Degree", s);
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "POS") return Polarity::Pos;
  if (s == "NEG") return Polarity::Neg;
  bad_value("Polarity", s);
}

EventType event_type_from_string(const std::string& s) {
  if (s == "ASPECTUAL") return EventType::Aspectual;
  if (s == "EVIDENTIAL") return EventType::Evidential;
  if (s == "N/A") return EventType::NA;
  bad_value("Type", s);
}

DocTimeRel doctimerel_from_string(const std::string& s) {
  if (s == "BEFORE") return DocTimeRel::Before;
  if (s == "OVERLAP") return DocTimeRel::Overlap;
  if (s == "AFTER") return DocTimeRel::After;
  if (s == "BEFORE-OVERLAP") return DocTimeRel::BeforeOverlap;
  bad_value("DocTimeRel", s);
}

Document load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open document file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading document file: " + path);
  std::string text = buf.str();
  if (!is_valid_utf8(text)) {
    throw DataError("document is not valid UTF-8: " + path);
  }
  return make_document(std::filesystem::path(path).stem().string(),
                       std::move(text));
}

Document make_document(std::string id, std::string text) {
  Document doc;
  doc.id = std::move(id);
  doc.length = decode_utf8(text).size();
  doc.text = std::move(text);
  return doc;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading file: " + path);
  return buf.str();
}

}  // namespace

std::vector<Document> load_documents(const std::string& text_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(text_dir)) {
    throw IoError("not a directory: " + text_dir);
  }
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(text_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Document> docs;
  docs.reserve(paths.size());
  for (const std::string& p : paths) docs.push_back(load_document(p));
  return docs;
}

std::vector<LabeledDocument> load_labeled_corpus(const std::string& text_dir,
                                                 const std::string& ann_dir) {
  namespace fs = std::filesystem;
  std::vector<Document> docs = load_documents(text_dir);
  if (!fs::is_directory(ann_dir)) {
    throw IoError("not a directory: " + ann_dir);
  }
  std::size_t ann_files = 0;
  for (const auto& entry : fs::directory_iterator(ann_dir)) {
    if (entry.is_regular_file() &&
        entry.path().filename().string().ends_with(".ann.xml")) {
      ++ann_files;
    }
  }
  if (ann_files != docs.size()) {
    throw DataError("corpus/annotation mismatch: " +
                    std::to_string(docs.size()) + " documents vs " +
                    std::to_string(ann_files) + " annotation files");
  }
  std::vector<LabeledDocument> out;
  out.reserve(docs.size());
  for (Document& doc : docs) {
    const fs::path ann_path = fs::path(ann_dir) / (doc.id + ".ann.xml");
    if (!fs::exists(ann_path)) {
      throw DataError("missing annotation file for document " + doc.id);
    }
    LabeledDocument ld;
    ld.gold = parse_annotations(read_file(ann_path.string()), doc);
    ld.doc = std::move(doc);
    out.push_back(std::move(ld));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimal XML subset: elements, text content, the five standard character
// entities. No attributes, no CDATA; enough for the standoff schema and
// nothing more.

namespace {

struct XmlNode {
  std::string name;
  std::string text;
  std::vector<XmlNode> children;

  const XmlNode* child(const std::string& n) const {
    for (const auto& c : children) {
      if (c.name == n) return &c;
    }
    return nullptr;
  }
};

class XmlParser {
 public:
  explicit XmlParser(const std::string& s) : s_(s) {}

  XmlNode parse() {
    skip_ws();
    if (peek_starts("<?")) skip_until("?>");
    skip_ws();
    XmlNode root = parse_element();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  XmlNode parse_element() {
    expect('<');
    XmlNode node;
    node.name = read_name();
    skip_ws();
    if (peek_starts("/>")) {
      pos_ += 2;
      return node;
    }
    expect('>');
    for (;;) {
      if (peek_starts("</")) {
        pos_ += 2;
        const std::string closing = read_name();
        if (closing != node.name) {
          fail("mismatched closing tag </" + closing + "> for <" + node.name +
               ">");
        }
        skip_ws();
        expect('>');
        return node;
      }
      if (pos_ >= s_.size()) fail("unexpected end inside <" + node.name + ">");
      if (s_[pos_] == '<') {
        node.children.push_back(parse_element());
      } else {
        node.text += read_text();
      }
    }
  }

  std::string read_name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected element name");
    return s_.substr(start, pos_ - start);
  }

  std::string read_text() {
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '<') {
      if (s_[pos_] == '&') {
        out += read_entity();
      } else {
        out.push_back(s_[pos_++]);
      }
    }
    return out;
  }

  char read_entity() {
    const std::size_t semi = s_.find(';', pos_);
    if (semi == std::string::npos) fail("unterminated character entity");
    const std::string ent = s_.substr(pos_, semi - pos_ + 1);
    pos_ = semi + 1;
    if (ent == "&amp;") return '&';
    if (ent == "&lt;") return '<';
    if (ent == "&gt;") return '>';
    if (ent == "&quot;") return '"';
    if (ent == "&apos;") return '\'';
    fail("unknown entity " + ent);
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  void skip_until(const std::string& delim) {
    const std::size_t p = s_.find(delim, pos_);
    if (p == std::string::npos) fail("unterminated '" + delim + "'");
    pos_ = p + delim.size();
  }

  bool peek_starts(const std::string& prefix) const {
    return s_.compare(pos_, prefix.size(), prefix) == 0;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw DataError("malformed annotation document at byte " +
                    std::to_string(pos_) + ": " + msg);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const std::string& required_text(const XmlNode& entity, const char* name) {
  const XmlNode* n = entity.child(name);
  if (!n) {
    throw DataError(std::string("entity missing <") + name + "> element");
  }
  return n->text;
}

std::size_t parse_offset(const std::string& s, std::size_t from,
                         std::size_t to) {
  if (from == to) throw DataError("empty span offset");
  std::size_t value = 0;
  for (std::size_t i = from; i < to; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') {
      throw DataError("span offsets must be decimal digits: '" + s + "'");
    }
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

}  // namespace

void validate_annotations(const AnnotationSet& set, const Document& doc) {
  const EventAnnotation* prev = nullptr;
  for (const EventAnnotation& ev : set.events) {
    if (ev.begin >= ev.end) {
      throw DataError("event span " + std::to_string(ev.begin) + "," +
                      std::to_string(ev.end) + " violates begin < end");
    }
    if (ev.end > doc.length) {
      throw DataError("event span end " + std::to_string(ev.end) +
                      " exceeds document length " +
                      std::to_string(doc.length) + " (" + doc.id + ")");
    }
    if (prev) {
      if (prev->begin > ev.begin ||
          (prev->begin == ev.begin && prev->end > ev.end)) {
        throw DataError("events not sorted by (begin, end)");
      }
      if (prev->begin == ev.begin && prev->end == ev.end) {
        throw DataError("duplicate event span " + std::to_string(ev.begin) +
                        "," + std::to_string(ev.end));
      }
    }
    prev = &ev;
  }
}

AnnotationSet parse_annotations(const std::string& standoff_text,
                                const Document& doc) {
  XmlNode root = XmlParser(standoff_text).parse();
  if (root.name != "annotations") {
    throw DataError("expected <annotations> root, got <" + root.name + ">");
  }
  AnnotationSet set;
  set.doc_id = doc.id;
  for (const XmlNode& entity : root.children) {
    if (entity.name != "entity") {
      throw DataError("unexpected <" + entity.name + "> under <annotations>");
    }
    const std::string& type = required_text(entity, "type");
    if (type != "EVENT") {
      throw DataError("entity type must be EVENT, got '" + type + "'");
    }
    const std::string& span = required_text(entity, "span");
    const std::size_t comma = span.find(',');
    if (comma == std::string::npos) {
      throw DataError("span must be 'BEGIN,END', got '" + span + "'");
    }
    EventAnnotation ev;
    ev.begin = parse_offset(span, 0, comma);
    ev.end = parse_offset(span, comma + 1, span.size());

    const XmlNode* props = entity.child("properties");
    if (!props) throw DataError("entity missing <properties> element");
    ev.modality = modality_from_string(required_text(*props, "ContextualModality"));
    ev.degree = degree_from_string(required_text(*props, "Degree"));
    ev.polarity = polarity_from_string(required_text(*props, "Polarity"));
    ev.type = event_type_from_string(required_text(*props, "Type"));
    if (const XmlNode* dtr = props->child("DocTimeRel")) {
      ev.doctimerel = doctimerel_from_string(dtr->text);
    }
    set.events.push_back(ev);
  }
  std::stable_sort(set.events.begin(), set.events.end(),
                   [](const EventAnnotation& a, const EventAnnotation& b) {
                     return a.begin != b.begin ? a.begin < b.begin
                                               : a.end < b.end;
                   });
  validate_annotations(set, doc);
  return set;
}

std::string write_annotations(const AnnotationSet& set, const Document& doc) {
  validate_annotations(set, doc);
  std::ostringstream out;
  out << "<annotations>\n";
  std::size_t n = 0;
  for (const EventAnnotation& ev : set.events) {
    out << "  <entity>\n";
    out << "    <id>" << xml_escape(set.doc_id) << "-e" << n++ << "</id>\n";
    out << "    <span>" << ev.begin << "," << ev.end << "</span>\n";
    out << "    <type>EVENT</type>\n";
    out << "    <properties>\n";
    out << "      <ContextualModality>" << to_string(ev.modality)
        << "</ContextualModality>\n";
    out << "      <Degree>" << to_string(ev.degree) << "</Degree>\n";
    out << "      <Polarity>" << to_string(ev.polarity) << "</Polarity>\n";
    out << "      <Type>" << to_string(ev.type) << "</Type>\n";
    if (ev.doctimerel) {
      out << "      <DocTimeRel>" << to_string(*ev.doctimerel)
          << "</DocTimeRel>\n";
    }
    out << "    </properties>\n";
    out << "  </entity>\n";
  }
  out << "</annotations>\n";
  return out.str();
}

std::vector<std::string> align_to_tokens(const AnnotationSet& set,
                                         const TokenSequence& tokens,
                                         const Document& doc) {
  for (const Token& t : tokens.tokens) {
    if (t.end > doc.length) {
      throw DataError("token offsets exceed document length");
    }
  }
  std::vector<std::string> labels(tokens.tokens.size(), "O");
  for (const EventAnnotation& ev : set.events) {
    bool first = true;
    for (std::size_t i = 0; i < tokens.tokens.size(); ++i) {
      const Token& t = tokens.tokens[i];
      const bool overlaps = t.begin < ev.end && ev.begin < t.end;
      if (!overlaps) {
        if (t.begin >= ev.end) break;
        continue;
      }
      if (labels[i] == "O") {
        labels[i] = first ? "B-EVENT" : "I-EVENT";
      }
      first = false;
    }
  }
  return labels;
}

}  // namespace clinx
