#include "clinx/features.hpp"

#include <cstring>
#include <sstream>

#include "clinx/errors.hpp"

namespace clinx {

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

Vocabulary::Vocabulary(VocabKind k) : kind(k) {
  items = {"<PAD>", "<UNK>"};
  index = {{"<PAD>", kPad}, {"<UNK>", kUnk}};
}

std::uint32_t Vocabulary::add(const std::string& s) {
  // exact match first so the <PAD>/<UNK> sentinels survive case folding
  if (auto it = index.find(s); it != index.end()) return it->second;
  const std::string key = kind == VocabKind::Token ? ascii_lower(s) : s;
  auto [it, inserted] =
      index.emplace(key, static_cast<std::uint32_t>(items.size()));
  if (inserted) items.push_back(key);
  return it->second;
}

std::uint32_t Vocabulary::lookup(const std::string& s) const {
  if (auto it = index.find(s); it != index.end()) return it->second;
  if (kind == VocabKind::Token) {
    auto it = index.find(ascii_lower(s));
    if (it != index.end()) return it->second;
  }
  return kUnk;
}

Vocabularies build_vocabularies(const std::vector<TokenSequence>& corpus) {
  std::size_t total = 0;
  for (const auto& seq : corpus) total += seq.tokens.size();
  if (total == 0) throw DataError("build_vocabularies: empty corpus");

  Vocabularies v;
  for (const auto& seq : corpus) {
    for (const Token& t : seq.tokens) {
      if (t.pos.empty() || t.shape.empty()) {
        throw DataError("build_vocabularies: token missing pos or shape");
      }
      v.token.add(t.surface);
      v.pos.add(t.pos);
      v.shape.add(t.shape);
    }
  }
  return v;
}

Mat init_embedding(std::size_t rows, std::size_t dim, Rng& rng, double bound) {
  Mat m(rows, dim);
  for (double& x : m.a) x = rng.uniform(-bound, bound);
  std::memset(m.row(Vocabulary::kPad), 0, dim * sizeof(double));
  return m;
}

std::size_t load_pretrained(std::istream& stream, const Vocabulary& vocab,
                            Mat& table) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t loaded = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<double> values;
    values.reserve(table.cols);
    double v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof() || values.size() != table.cols) {
      throw DataError("pretrained vectors line " + std::to_string(line_no) +
                      ": expected token + " + std::to_string(table.cols) +
                      " values");
    }
    auto it = vocab.index.find(word);
    if (it == vocab.index.end()) continue;
    double* row = table.row(it->second);
    for (std::size_t i = 0; i < table.cols; ++i) row[i] = values[i];
    ++loaded;
  }
  // PAD stays zero even if the file happens to contain its literal string
  std::memset(table.row(Vocabulary::kPad), 0, table.cols * sizeof(double));
  return loaded;
}

WindowInstance extract_window(const TokenSequence& seq,
                              const Vocabularies& vocabs, std::size_t center,
                              int window) {
  if (center >= seq.tokens.size()) {
    throw DataError("extract_window: center out of range");
  }
  if (window < 1) throw DataError("extract_window: window must be >= 1");

  WindowInstance win;
  win.center = center;
  win.window = window;
  win.rows.reserve(2 * static_cast<std::size_t>(window) + 1);
  const auto n = static_cast<long long>(seq.tokens.size());
  const auto c = static_cast<long long>(center);
  for (long long p = c - window; p <= c + window; ++p) {
    WindowRow row;  // PAD triple by default
    if (p >= 0 && p < n) {
      const Token& t = seq.tokens[static_cast<std::size_t>(p)];
      row.token = vocabs.token.lookup(t.surface);
      row.pos = vocabs.pos.lookup(t.pos);
      row.shape = vocabs.shape.lookup(t.shape);
    }
    win.rows.push_back(row);
  }
  return win;
}

Mat embed(const WindowInstance& win, const EmbeddingTables& tables) {
  const std::size_t d = tables.feature_dim();
  Mat out(win.rows.size(), d);
  for (std::size_t t = 0; t < win.rows.size(); ++t) {
    const WindowRow& r = win.rows[t];
    if (r.token >= tables.token.rows || r.pos >= tables.pos.rows ||
        r.shape >= tables.shape.rows) {
      throw DataError("embed: window index out of table bounds");
    }
    double* dst = out.row(t);
    std::memcpy(dst, tables.token.row(r.token),
                tables.token.cols * sizeof(double));
    std::memcpy(dst + tables.token.cols, tables.pos.row(r.pos),
                tables.pos.cols * sizeof(double));
    std::memcpy(dst + tables.token.cols + tables.pos.cols,
                tables.shape.row(r.shape), tables.shape.cols * sizeof(double));
  }
  return out;
}

}  // namespace clinx
