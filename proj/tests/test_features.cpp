#include <sstream>

#include "doctest.h"

#include "clinx/errors.hpp"
#include "clinx/features.hpp"

using namespace clinx;

namespace {

TokenSequence make_seq(const std::vector<std::string>& words) {
  TokenSequence seq;
  std::size_t pos = 0;
  for (const auto& w : words) {
    Token t;
    t.surface = w;
    t.begin = pos;
    t.end = pos + w.size();
    pos = t.end + 1;
    t.pos = "NN";
    t.shape = std::string(w.size(), 'x');
    seq.tokens.push_back(t);
  }
  return seq;
}

}  // namespace

TEST_CASE("vocabulary construction and lookup") {
  Vocabularies v = build_vocabularies({make_seq({"bleeding"})});
  CHECK(v.token.size() == 3);
  CHECK(v.token.lookup("bleeding") == 2);
  CHECK(v.token.lookup("BLEEDING") == 2);  // token kind folds case
  CHECK(v.token.lookup("unseen") == Vocabulary::kUnk);

  Vocabularies twice = build_vocabularies({make_seq({"pain", "pain"})});
  CHECK(twice.token.size() == 3);

  CHECK_THROWS_AS(build_vocabularies({}), DataError);
  CHECK_THROWS_AS(build_vocabularies({TokenSequence{}}), DataError);
}

TEST_CASE("vocabulary bijection") {
  Vocabularies v =
      build_vocabularies({make_seq({"a", "b", "c", "b", "d", "a"})});
  for (std::uint32_t i = 0; i < v.token.size(); ++i) {
    CHECK(v.token.lookup(v.token.items[i]) == i);
  }
}

TEST_CASE("embedding init zeroes and freezes PAD") {
  Rng rng(5);
  const Mat m = init_embedding(4, 8, rng, 0.05);
  for (std::size_t c = 0; c < 8; ++c) CHECK(m.at(Vocabulary::kPad, c) == 0.0);
  bool any_nonzero = false;
  for (std::size_t c = 0; c < 8; ++c) {
    if (m.at(2, c) != 0.0) any_nonzero = true;
    CHECK(std::abs(m.at(2, c)) <= 0.05);
  }
  CHECK(any_nonzero);
}

TEST_CASE("pretrained vector loading") {
  Vocabulary vocab(VocabKind::Token);
  vocab.add("pain");
  vocab.add("scan");
  Rng rng(1);
  Mat table = init_embedding(vocab.size(), 3, rng, 0.05);
  const Mat before = table;

  SUBCASE("in-vocabulary row is copied") {
    std::istringstream in("pain 1.5 -2 0.25\n");
    CHECK(load_pretrained(in, vocab, table) == 1);
    CHECK(table.at(2, 0) == 1.5);
    CHECK(table.at(2, 1) == -2.0);
    CHECK(table.at(2, 2) == 0.25);
    // absent word keeps its initialization
    for (std::size_t c = 0; c < 3; ++c) CHECK(table.at(3, c) == before.at(3, c));
  }

  SUBCASE("wrong field count is an error") {
    std::istringstream in("pain 1.5 -2\n");
    CHECK_THROWS_AS(load_pretrained(in, vocab, table), DataError);
  }

  SUBCASE("out-of-vocabulary lines are skipped") {
    std::istringstream in("other 1 2 3\n");
    CHECK(load_pretrained(in, vocab, table) == 0);
  }

  SUBCASE("PAD row is zeroed last") {
    std::istringstream in("<PAD> 9 9 9\n");
    load_pretrained(in, vocab, table);
    for (std::size_t c = 0; c < 3; ++c) CHECK(table.at(0, c) == 0.0);
  }
}

TEST_CASE("window extraction pads outside the document") {
  const TokenSequence seq = make_seq({"a", "b", "c"});
  Vocabularies v = build_vocabularies({seq});

  const WindowInstance w = extract_window(seq, v, 0, 4);
  REQUIRE(w.rows.size() == 9);
  for (int i = 0; i < 4; ++i) CHECK(w.rows[i] == WindowRow{});
  CHECK(w.rows[4].token == v.token.lookup("a"));
  CHECK(w.rows[5].token == v.token.lookup("b"));
  CHECK(w.rows[6].token == v.token.lookup("c"));
  CHECK(w.rows[7] == WindowRow{});
  CHECK(w.rows[8] == WindowRow{});

  CHECK(extract_window(seq, v, 1, 5).rows.size() == 11);
  CHECK_THROWS_AS(extract_window(seq, v, 3, 4), DataError);

  // a fully interior center has no PAD rows
  const TokenSequence wide = make_seq({"a", "b", "c", "d", "e"});
  Vocabularies vw = build_vocabularies({wide});
  const WindowInstance mid = extract_window(wide, vw, 2, 2);
  for (const WindowRow& r : mid.rows) CHECK(r.token != Vocabulary::kPad);
}

TEST_CASE("embed concatenates the three channels") {
  const TokenSequence seq = make_seq({"a", "b", "c"});
  Vocabularies v = build_vocabularies({seq});
  Rng rng(3);
  EmbeddingTables tables;
  tables.token = init_embedding(v.token.size(), 4, rng, 0.05);
  tables.pos = init_embedding(v.pos.size(), 2, rng, 0.05);
  tables.shape = init_embedding(v.shape.size(), 2, rng, 0.05);
  CHECK(tables.feature_dim() == 8);

  const WindowInstance w = extract_window(seq, v, 1, 1);
  const Mat m = embed(w, tables);
  REQUIRE(m.rows == 3);
  REQUIRE(m.cols == 8);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(m.at(0, c) == tables.token.at(w.rows[0].token, c));
    CHECK(m.at(1, c) == tables.token.at(w.rows[1].token, c));
  }
  CHECK(m.at(0, 4) == tables.pos.at(w.rows[0].pos, 0));
  CHECK(m.at(0, 6) == tables.shape.at(w.rows[0].shape, 0));

  // all-PAD window embeds to the zero matrix
  WindowInstance pad;
  pad.window = 1;
  pad.rows.assign(3, WindowRow{});
  const Mat zeros = embed(pad, tables);
  for (double x : zeros.a) CHECK(x == 0.0);

  // changing one row changes only that output row
  WindowInstance w2 = w;
  w2.rows[2] = WindowRow{};
  const Mat m2 = embed(w2, tables);
  for (std::size_t c = 0; c < 8; ++c) {
    CHECK(m2.at(0, c) == m.at(0, c));
    CHECK(m2.at(1, c) == m.at(1, c));
  }

  // out-of-bounds indices are rejected
  WindowInstance bad = w;
  bad.rows[0].token = 99;
  CHECK_THROWS_AS(embed(bad, tables), DataError);
}
