#include "clinx/textproc.hpp"

#include "clinx/errors.hpp"
#include "clinx/utf8.hpp"

namespace clinx {

namespace {

bool is_ascii_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v';
}

bool is_word(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
         (c >= U'0' && c <= U'9') || c == U'_';
}

bool is_digit_or_dot(char32_t c) {
  return (c >= U'0' && c <= U'9') || c == U'.';
}

}  // namespace

TokenSequence tokenize(const std::string& text, std::string doc_id) {
  const Utf8Text dec = decode_utf8(text);
  TokenSequence seq;
  seq.doc_id = std::move(doc_id);

  const std::size_t n = dec.size();
  std::size_t i = 0;
  while (i < n) {
    const char32_t c = dec.points[i];
    if (is_ascii_space(c)) {
      ++i;
      continue;
    }
    std::size_t end = i;
    if (is_word(c)) {
      while (end < n && is_word(dec.points[end])) ++end;
    } else if (c == U'$' && i + 1 < n && is_digit_or_dot(dec.points[i + 1])) {
      end = i + 1;
      while (end < n && is_digit_or_dot(dec.points[end])) ++end;
    } else {
      while (end < n && !is_ascii_space(dec.points[end])) ++end;
    }
    Token tok;
    tok.begin = i;
    tok.end = end;
    tok.surface = utf8_slice(text, dec, i, end);
    seq.tokens.push_back(std::move(tok));
    i = end;
  }
  return seq;
}

std::string word_shape(const std::string& surface) {
  if (surface.empty()) throw DataError("word_shape: empty surface");
  const Utf8Text dec = decode_utf8(surface);
  std::string out;
  out.reserve(surface.size());
  for (char32_t c : dec.points) {
    if (c >= U'a' && c <= U'z') {
      out.push_back('x');
    } else if (c >= U'A' && c <= U'Z') {
      out.push_back('X');
    } else if (c >= U'0' && c <= U'9') {
      out.push_back('d');
    } else {
      out += encode_utf8(c);
    }
  }
  return out;
}

void shape_tokens(TokenSequence& seq) {
  for (Token& t : seq.tokens) t.shape = word_shape(t.surface);
}

}  // namespace clinx
