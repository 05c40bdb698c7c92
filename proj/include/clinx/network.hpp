#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clinx/features.hpp"
#include "clinx/mat.hpp"
#include "clinx/rng.hpp"
#include "clinx/tagger.hpp"

namespace clinx {

struct Hyperparams {
  int window = 4;        // tokens per side; sequence length is 2*window+1
  int kernel_width = 2;  // words per filter application
  int filters = 300;
  int hidden = 50;
  int token_dim = 300;
  int pos_dim = 32;
  int shape_dim = 16;
  double keep_prob = 0.5;  // dropout keep probability p
  double norm_cap = 3.0;   // max L2 norm s for MLP/softmax rows; <= 0 disables

  int feature_dim() const { return token_dim + pos_dim + shape_dim; }
  int seq_len() const { return 2 * window + 1; }
  int map_len() const { return seq_len() - kernel_width + 1; }

  bool operator==(const Hyperparams&) const = default;
};

struct ConvLayer {
  Mat filters;  // F x (kernel_width * feature_dim), tanh activation
  std::vector<double> bias;
};

struct MlpLayer {
  Mat weights;  // hidden x F, sigmoid activation
  std::vector<double> bias;
};

struct SoftmaxLayer {
  Mat weights;  // C x hidden
  std::vector<double> bias;
};

// Everything needed to run one task end to end: vocabularies, lookup tables,
// the network weights, the label order and (usually) the POS tagger that
// produced the training features.
struct ModelBundle {
  static constexpr std::uint16_t kFormatVersion = 1;

  std::string task;
  std::vector<std::string> labels;  // index -> label, fixed at training time
  Hyperparams hp;
  Vocabularies vocabs;
  EmbeddingTables tables;
  ConvLayer conv;
  MlpLayer mlp;
  SoftmaxLayer soft;
  std::optional<TaggerModel> tagger;

  std::size_t num_classes() const { return labels.size(); }
};

// weights uniform in [-bound, bound]; PAD embedding rows zeroed
ModelBundle init_model(std::string task, std::vector<std::string> labels,
                       const Hyperparams& hp, Vocabularies vocabs,
                       std::uint64_t seed, double bound = 0.05);

void check_shapes(const ModelBundle& model);

struct DropoutMask {
  std::vector<std::uint8_t> keep;  // one Bernoulli(p) indicator per filter
};

DropoutMask draw_mask(std::size_t filters, double keep_prob, Rng& rng);

// feature map (f, i) = tanh(filter_f . embedded[i .. i+h-1] + bias_f)
Mat conv_forward(const Mat& embedded, const ConvLayer& conv);

struct PoolResult {
  std::vector<double> values;
  std::vector<int> argmax;  // first maximal position per filter
};

PoolResult max_pool(const Mat& feature_maps);

struct ForwardCache {
  WindowInstance window;
  Mat embedded;
  Mat fmap;
  std::vector<int> argmax;
  std::vector<double> pooled;  // z
  std::vector<double> masked;  // z*r in TRAIN, p*z in TEST
  std::vector<double> hidden;
  std::vector<double> probs;
  std::vector<std::uint8_t> mask;  // empty in TEST mode
  bool train_mode = false;
};

// mask == nullptr runs TEST mode: stored weights untouched, the pooled layer
// is scaled by keep_prob on the fly
ForwardCache forward(const ModelBundle& model, const WindowInstance& win,
                     const DropoutMask* mask);

struct Gradients {
  Mat token_emb, pos_emb, shape_emb;
  Mat conv_w;
  std::vector<double> conv_b;
  Mat mlp_w;
  std::vector<double> mlp_b;
  Mat soft_w;
  std::vector<double> soft_b;

  static Gradients zeros_like(const ModelBundle& model);
  void zero();
  void scale_all(double s);
};

// Accumulates d NLL(gold) / d theta into grads. Requires a TRAIN cache;
// masked-out filters and PAD embedding rows receive zero gradient.
void backward(const ModelBundle& model, const ForwardCache& cache,
              std::size_t gold_label, Gradients& grads);

// w <- w * s/||w|| whenever ||w|| > s
void renorm(double* w, std::size_t n, double cap);
void renorm_rows(Mat& m, double cap);

// applies the norm cap to the constrained rows (MLP + softmax)
void apply_norm_constraint(ModelBundle& model);

}  // namespace clinx
