#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "clinx/mat.hpp"
#include "clinx/rng.hpp"
#include "clinx/textproc.hpp"

namespace clinx {

enum class VocabKind { Token, Pos, Shape };

// Dense string<->index bijection. Index 0 is PAD, index 1 is UNK; the TOKEN
// kind folds ASCII case on both insert and lookup.
struct Vocabulary {
  VocabKind kind = VocabKind::Token;
  std::vector<std::string> items;  // index -> string, starts {<PAD>, <UNK>}
  std::unordered_map<std::string, std::uint32_t> index;

  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kUnk = 1;

  explicit Vocabulary(VocabKind k = VocabKind::Token);

  std::uint32_t add(const std::string& s);     // first occurrence wins
  std::uint32_t lookup(const std::string& s) const;  // miss -> kUnk
  std::size_t size() const { return items.size(); }

  bool operator==(const Vocabulary& o) const {
    return kind == o.kind && items == o.items;
  }
};

struct Vocabularies {
  Vocabulary token{VocabKind::Token};
  Vocabulary pos{VocabKind::Pos};
  Vocabulary shape{VocabKind::Shape};

  bool operator==(const Vocabularies&) const = default;
};

// tokens must carry pos and shape; entries indexed in first-occurrence order
Vocabularies build_vocabularies(const std::vector<TokenSequence>& corpus);

// rows x dim table; row 0 (PAD) is all-zero and stays frozen during training
Mat init_embedding(std::size_t rows, std::size_t dim, Rng& rng,
                   double bound = 0.05);

// Pretrained-vector text stream: one token per line followed by exactly dim
// space-separated decimals. In-vocabulary rows are overwritten; the PAD row
// is re-zeroed afterwards. Malformed lines report their line number.
std::size_t load_pretrained(std::istream& stream, const Vocabulary& vocab,
                            Mat& table);

struct WindowRow {
  std::uint32_t token = Vocabulary::kPad;
  std::uint32_t pos = Vocabulary::kPad;
  std::uint32_t shape = Vocabulary::kPad;

  bool operator==(const WindowRow&) const = default;
};

struct WindowInstance {
  std::size_t center = 0;
  int window = 0;                // tokens per side; 2*window+1 rows
  std::vector<WindowRow> rows;   // PAD triples outside the document
  int label = -1;                // class index, -1 when unlabeled

  bool operator==(const WindowInstance&) const = default;
};

WindowInstance extract_window(const TokenSequence& seq,
                              const Vocabularies& vocabs, std::size_t center,
                              int window);

struct EmbeddingTables {
  Mat token;  // |V_tok| x 300 by default
  Mat pos;    // |V_pos| x 32
  Mat shape;  // |V_shape| x 16

  std::size_t feature_dim() const {
    return token.cols + pos.cols + shape.cols;
  }
};

// (2w+1) x d matrix, row t = token_vec (+) pos_vec (+) shape_vec
Mat embed(const WindowInstance& win, const EmbeddingTables& tables);

}  // namespace clinx
