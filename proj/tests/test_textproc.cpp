#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"

#include "clinx/errors.hpp"
#include "clinx/rng.hpp"
#include "clinx/textproc.hpp"
#include "clinx/utf8.hpp"

using namespace clinx;

namespace {

void check_tokens(const std::string& text,
                  const std::vector<std::tuple<std::string, std::size_t,
                                               std::size_t>>& expect) {
  const TokenSequence seq = tokenize(text);
  REQUIRE(seq.tokens.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(seq.tokens[i].surface == std::get<0>(expect[i]));
    CHECK(seq.tokens[i].begin == std::get<1>(expect[i]));
    CHECK(seq.tokens[i].end == std::get<2>(expect[i]));
  }
}

}  // namespace

TEST_CASE("tokenizer pattern basics") {
  check_tokens("did not have", {{"did", 0, 3}, {"not", 4, 7}, {"have", 8, 12}});
  check_tokens("$12.50 bolus", {{"$12.50", 0, 6}, {"bolus", 7, 12}});
  check_tokens("nausea.", {{"nausea", 0, 6}, {".", 6, 7}});
}

TEST_CASE("tokenizer alternation order") {
  // \w+ fails at '-', so \S+ grabs the rest of the run
  check_tokens("x-ray", {{"x", 0, 1}, {"-ray", 1, 5}});
  // '$' not followed by a digit or dot falls through to \S+
  check_tokens("$x 1", {{"$x", 0, 2}, {"1", 3, 4}});
  check_tokens("", {});
  check_tokens("   \t\n ", {});
}

TEST_CASE("tokenizer offsets are code points, not bytes") {
  // u00e9 is two bytes but one code point
  const std::string text = "caf\xc3\xa9 visit";
  check_tokens(text, {{"caf", 0, 3}, {"\xc3\xa9", 3, 4}, {"visit", 5, 10}});
}

TEST_CASE("offset fidelity over random strings") {
  const std::string alphabet = "ab1 .$_\tZ-\n";
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t len = rng.below(60);
    for (std::size_t i = 0; i < len; ++i) {
      text.push_back(alphabet[rng.below(alphabet.size())]);
    }
    const Utf8Text dec = decode_utf8(text);
    const TokenSequence seq = tokenize(text);
    std::size_t prev_end = 0;
    for (const Token& t : seq.tokens) {
      REQUIRE(t.begin < t.end);
      REQUIRE(t.begin >= prev_end);
      prev_end = t.end;
      CHECK(utf8_slice(text, dec, t.begin, t.end) == t.surface);
    }
  }
}

TEST_CASE("tokenize is a pure function") {
  const std::string text = "no $3.4 x-ray at 9am";
  const TokenSequence a = tokenize(text);
  const TokenSequence b = tokenize(text);
  REQUIRE(a.tokens.size() == b.tokens.size());
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    CHECK(a.tokens[i].surface == b.tokens[i].surface);
    CHECK(a.tokens[i].begin == b.tokens[i].begin);
  }
}

TEST_CASE("word shape mapping") {
  CHECK(word_shape("April") == "Xxxxx");
  CHECK(word_shape("B12") == "Xdd");
  CHECK(word_shape("x-ray") == "x-xxx");
  CHECK(word_shape("$12.50") == "$dd.dd");
  CHECK_THROWS_AS(word_shape(""), DataError);
}

TEST_CASE("word shape preserves length; reshaping is stable except d->x") {
  const std::string alphabet = "aB3.-$_z9Q";
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(alphabet[rng.below(alphabet.size())]);
    }
    const std::string shape = word_shape(s);
    CHECK(shape.size() == s.size());
    // shape characters are x/X/d/punct; x and X re-map to themselves and
    // punctuation is retained, but 'd' is itself a lowercase letter
    std::string expect = shape;
    for (char& c : expect) {
      if (c == 'd') c = 'x';
    }
    CHECK(word_shape(shape) == expect);
    if (shape.find('d') == std::string::npos) {
      CHECK(word_shape(shape) == shape);  // idempotent on digit-free inputs
    }
  }
}
