#include "clinx/utf8.hpp"

#include "clinx/errors.hpp"

namespace clinx {

namespace {

int sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 0;
}

}  // namespace

Utf8Text decode_utf8(std::string_view text) {
  Utf8Text out;
  out.points.reserve(text.size());
  out.byte_offsets.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char lead = static_cast<unsigned char>(text[i]);
    const int len = sequence_length(lead);
    if (len == 0 || i + static_cast<std::size_t>(len) > text.size()) {
      throw DataError("invalid UTF-8 at byte " + std::to_string(i));
    }
    char32_t cp = 0;
    switch (len) {
      case 1:
        cp = lead;
        break;
      case 2:
        cp = lead & 0x1f;
        break;
      case 3:
        cp = lead & 0x0f;
        break;
      case 4:
        cp = lead & 0x07;
        break;
    }
    for (int k = 1; k < len; ++k) {
      const unsigned char c = static_cast<unsigned char>(text[i + k]);
      if ((c >> 6) != 0x2) {
        throw DataError("invalid UTF-8 continuation at byte " +
                        std::to_string(i + k));
      }
      cp = (cp << 6) | (c & 0x3f);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
      throw DataError("invalid UTF-8 scalar at byte " + std::to_string(i));
    }
    out.byte_offsets.push_back(i);
    out.points.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  out.byte_offsets.push_back(text.size());
  return out;
}

bool is_valid_utf8(std::string_view text) {
  try {
    decode_utf8(text);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

std::string utf8_slice(std::string_view text, const Utf8Text& decoded,
                       std::size_t begin, std::size_t end) {
  const std::size_t b = decoded.byte_offsets.at(begin);
  const std::size_t e = decoded.byte_offsets.at(end);
  return std::string(text.substr(b, e - b));
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return out;
}

}  // namespace clinx
