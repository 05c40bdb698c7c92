#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace clinx {

// Offsets are Unicode scalar-value positions into the owning document text.
struct Token {
  std::string surface;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string pos;    // empty until tagged
  std::string shape;  // empty until shaped
};

struct TokenSequence {
  std::string doc_id;
  std::vector<Token> tokens;
};

// Span-preserving tokenizer: the non-overlapping left-to-right matches of
//   \w+ | \$[0-9.]+ | \S+
// with alternatives tried in that order at each position. Character classes
// are ASCII so spans are reproducible bit-for-bit across platforms.
TokenSequence tokenize(const std::string& text, std::string doc_id = {});

// Abstract letter pattern: a-z -> 'x', A-Z -> 'X', 0-9 -> 'd', everything
// else kept verbatim. Length-preserving in code points. Empty input is an
// error.
std::string word_shape(const std::string& surface);

// fills Token::shape for every token in place
void shape_tokens(TokenSequence& seq);

}  // namespace clinx
