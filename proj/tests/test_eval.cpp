#include <cmath>

#include "doctest.h"

#include "clinx/errors.hpp"
#include "clinx/eval.hpp"
#include "clinx/rng.hpp"

using namespace clinx;

namespace {

// brute-force oracle: count membership with plain loops, no set machinery
template <class Item>
MetricReport prf_oracle(const std::vector<Item>& sys,
                        const std::vector<Item>& gold) {
  MetricReport r;
  r.system_count = sys.size();
  r.gold_count = gold.size();
  for (const Item& s : sys) {
    for (const Item& g : gold) {
      if (s == g) {
        ++r.hits;
        break;
      }
    }
  }
  r.precision = sys.empty() ? 0.0 : double(r.hits) / double(sys.size());
  r.recall = gold.empty() ? 0.0 : double(r.hits) / double(gold.size());
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::set<SpanItem> random_items(Rng& rng, std::size_t max_n) {
  std::set<SpanItem> items;
  const std::size_t n = rng.below(max_n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string doc = "d" + std::to_string(rng.below(3));
    const std::size_t begin = rng.below(40);
    items.emplace(doc, begin, begin + 1 + rng.below(6));
  }
  return items;
}

EventAnnotation ev(std::size_t b, std::size_t e,
                   Polarity pol = Polarity::Pos) {
  EventAnnotation a;
  a.begin = b;
  a.end = e;
  a.polarity = pol;
  return a;
}

}  // namespace

TEST_CASE("prf equals the brute-force oracle on random sets") {
  Rng rng(314);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::set<SpanItem> s = random_items(rng, 12);
    const std::set<SpanItem> h = random_items(rng, 12);
    const MetricReport fast = prf(s, h);
    const MetricReport slow = prf_oracle(
        std::vector<SpanItem>(s.begin(), s.end()),
        std::vector<SpanItem>(h.begin(), h.end()));
    CHECK(fast.hits == slow.hits);
    CHECK(fast.precision == slow.precision);
    CHECK(fast.recall == slow.recall);
    CHECK(fast.f1 == slow.f1);
  }
}

TEST_CASE("prf closed forms") {
  std::set<SpanItem> s = {{"d", 0, 4}, {"d", 5, 9}};
  CHECK(prf(s, s).precision == 1.0);
  CHECK(prf(s, s).recall == 1.0);
  CHECK(prf(s, s).f1 == 1.0);

  const std::set<SpanItem> disjoint = {{"d", 20, 24}};
  const MetricReport zero = prf(s, disjoint);
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f1 == 0.0);

  CHECK(prf({}, s).precision == 0.0);  // empty-system convention
  CHECK(prf(s, {}).recall == 0.0);     // empty-gold convention
}

TEST_CASE("prf symmetry: P(S,H) == R(H,S)") {
  Rng rng(219);
  for (int trial = 0; trial < 200; ++trial) {
    const std::set<SpanItem> s = random_items(rng, 10);
    const std::set<SpanItem> h = random_items(rng, 10);
    CHECK(prf(s, h).precision == prf(h, s).recall);
  }
}

TEST_CASE("adding a correct item never lowers F1; an incorrect one never raises P") {
  Rng rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    std::set<SpanItem> s = random_items(rng, 8);
    std::set<SpanItem> h = random_items(rng, 8);
    const MetricReport before = prf(s, h);

    // add a gold item missing from the system
    for (const SpanItem& g : h) {
      if (!s.count(g)) {
        std::set<SpanItem> s2 = s;
        s2.insert(g);
        CHECK(prf(s2, h).f1 >= before.f1);
        break;
      }
    }
    // add an item that is certainly wrong
    std::set<SpanItem> s3 = s;
    s3.emplace("zz", 999, 1000);
    CHECK(prf(s3, h).precision <= before.precision);
  }
}

TEST_CASE("micro aggregation equals single-pool computation") {
  AnnotationMap sys1, gold1;
  sys1["a"].doc_id = "a";
  sys1["a"].events = {ev(0, 4), ev(6, 9)};
  gold1["a"].doc_id = "a";
  gold1["a"].events = {ev(0, 4)};
  sys1["b"].doc_id = "b";
  sys1["b"].events = {ev(2, 5)};
  gold1["b"].doc_id = "b";
  gold1["b"].events = {ev(2, 5), ev(7, 11)};

  const MetricReport joint = evaluate(sys1, gold1, Task::Span);
  // pooled: |S| = 3, |H| = 3, hits = 2
  CHECK(joint.system_count == 3);
  CHECK(joint.gold_count == 3);
  CHECK(joint.hits == 2);
}

TEST_CASE("attribute credit requires exact offsets and exact value") {
  AnnotationMap sys, gold;
  sys["d"].doc_id = "d";
  gold["d"].doc_id = "d";

  // correct offsets, wrong polarity: span credit yes, polarity credit no
  sys["d"].events = {ev(0, 4, Polarity::Pos)};
  gold["d"].events = {ev(0, 4, Polarity::Neg)};
  CHECK(evaluate(sys, gold, Task::Span).hits == 1);
  CHECK(evaluate(sys, gold, Task::Polarity).hits == 0);

  // off-by-one span: no credit anywhere
  sys["d"].events = {ev(1, 5, Polarity::Neg)};
  CHECK(evaluate(sys, gold, Task::Span).hits == 0);
  CHECK(evaluate(sys, gold, Task::Polarity).hits == 0);
}

TEST_CASE("evaluate rejects mismatched document sets") {
  AnnotationMap sys, gold;
  sys["a"].doc_id = "a";
  gold["b"].doc_id = "b";
  CHECK_THROWS_AS(evaluate(sys, gold, Task::Span), DataError);
}

// Frozen from the published comparison table: P, R, printed F1, and whether
// the row is a single system's output. The "median" row aggregates per-column
// medians over all participants, so four of its printed F1 values cannot be
// reproduced from its printed P/R; those cells are pinned as inconsistent.
struct TableCell {
  const char* row;
  const char* task;
  double p, r, printed_f1;
  bool consistent;
};

static const TableCell kTable2[] = {
    {"memorize", "span", 0.878, 0.834, 0.855, true},
    {"memorize", "modality", 0.810, 0.770, 0.789, true},
    {"memorize", "degree", 0.874, 0.831, 0.852, true},
    {"memorize", "polarity", 0.812, 0.772, 0.792, true},
    {"memorize", "type", 0.855, 0.813, 0.833, true},
    {"run4", "span", 0.908, 0.842, 0.874, true},
    {"run4", "modality", 0.842, 0.780, 0.810, true},
    {"run4", "degree", 0.904, 0.838, 0.869, true},
    {"run4", "polarity", 0.876, 0.812, 0.842, true},
    {"run4", "type", 0.877, 0.813, 0.844, true},
    {"run5", "span", 0.900, 0.850, 0.874, true},
    {"run5", "modality", 0.837, 0.790, 0.813, true},
    {"run5", "degree", 0.896, 0.845, 0.870, true},
    {"run5", "polarity", 0.861, 0.813, 0.836, true},
    {"run5", "type", 0.869, 0.820, 0.844, true},
    {"median", "span", 0.887, 0.846, 0.874, false},
    {"median", "modality", 0.830, 0.780, 0.810, false},
    {"median", "degree", 0.882, 0.838, 0.869, false},
    {"median", "polarity", 0.868, 0.813, 0.839, true},
    {"median", "type", 0.854, 0.813, 0.844, false},
    {"max", "span", 0.915, 0.891, 0.903, true},
    {"max", "modality", 0.866, 0.843, 0.855, true},
    {"max", "degree", 0.911, 0.887, 0.899, true},
    {"max", "polarity", 0.900, 0.875, 0.887, true},
    {"max", "type", 0.894, 0.870, 0.882, true},
    // phase 2, the two rows that publish all three numbers
    {"run5", "doctimerel", 0.788, 0.788, 0.788, true},
    {"run6", "doctimerel", 0.786, 0.786, 0.786, true},
};

TEST_CASE("published-table F1 arithmetic") {
  int consistent = 0, inconsistent = 0;
  for (const TableCell& cell : kTable2) {
    const double f1 = 2.0 * cell.p * cell.r / (cell.p + cell.r);
    if (cell.consistent) {
      CHECK_MESSAGE(std::abs(f1 - cell.printed_f1) <= 0.001,
                    cell.row << "/" << cell.task);
      ++consistent;
    } else {
      CHECK_MESSAGE(std::abs(f1 - cell.printed_f1) > 0.001,
                    cell.row << "/" << cell.task);
      ++inconsistent;
    }
  }
  CHECK(consistent == 23);
  CHECK(inconsistent == 4);
  // the flagship cell: 0.908/0.842 -> 0.874
  const MetricReport r = [] {
    MetricReport m;
    m.precision = 0.908;
    m.recall = 0.842;
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
  }();
  CHECK(std::abs(r.f1 - 0.874) <= 0.001);
}

TEST_CASE("memorize baseline lookup behavior") {
  // "pain" is always B-EVENT in training, "scan" never is
  std::vector<LabeledDocument> corpus;
  LabeledDocument ld;
  ld.doc = make_document("t", "pain after scan then pain");
  ld.gold.doc_id = "t";
  ld.gold.events = {ev(0, 4), ev(21, 25)};
  corpus.push_back(ld);

  const MemorizeModel model = train_memorize(corpus);
  CHECK(model.span_lexicon.at("pain") == "B-EVENT");
  CHECK(model.span_lexicon.at("scan") == "O");

  const Document test = make_document("u", "scan pain wound");
  const AnnotationSet out = run_memorize(model, test);
  REQUIRE(out.events.size() == 1);  // unseen "wound" -> O
  CHECK(out.events[0].begin == 5);
  CHECK(out.events[0].end == 9);
}

TEST_CASE("memorize reaches full recall on unambiguous training data") {
  std::vector<LabeledDocument> corpus;
  LabeledDocument ld;
  ld.doc = make_document("t", "bleeding stopped but nausea returned");
  ld.gold.doc_id = "t";
  ld.gold.events = {ev(0, 8), ev(21, 27)};
  corpus.push_back(ld);

  const MemorizeModel model = train_memorize(corpus);
  AnnotationMap sys, gold;
  gold["t"] = corpus[0].gold;
  sys["t"] = run_memorize(model, corpus[0].doc);
  CHECK(evaluate(sys, gold, Task::Span).recall == 1.0);
}

TEST_CASE("metric rendering") {
  MetricReport r;
  r.task = "span";
  r.precision = 0.5;
  r.recall = 0.25;
  r.f1 = 1.0 / 3.0;
  r.system_count = 4;
  r.gold_count = 8;
  r.hits = 2;
  const std::string machine = render_machine({r});
  CHECK(machine == "span\t0.500000\t0.250000\t0.333333\t4\t8\t2\n");
  CHECK(render_table({r}).find("span") != std::string::npos);
}
