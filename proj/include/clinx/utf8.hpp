#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clinx {

// Decoded UTF-8 text. All annotation offsets are in Unicode scalar values,
// so every module that touches offsets goes through this view.
struct Utf8Text {
  std::vector<char32_t> points;
  // byte offset of each code point; has points.size()+1 entries, the last
  // one being the total byte length
  std::vector<std::size_t> byte_offsets;

  std::size_t size() const { return points.size(); }
};

// Strict decoder: rejects overlong forms, surrogates, truncated sequences.
// Throws DataError on invalid input.
Utf8Text decode_utf8(std::string_view text);

bool is_valid_utf8(std::string_view text);

// Slice of the original bytes covering code points [begin, end).
std::string utf8_slice(std::string_view text, const Utf8Text& decoded,
                       std::size_t begin, std::size_t end);

std::string encode_utf8(char32_t cp);

}  // namespace clinx
