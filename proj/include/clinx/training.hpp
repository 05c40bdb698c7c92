#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clinx/network.hpp"

namespace clinx {

struct TrainConfig {
  double learning_rate = 0.05;
  int batch_size = 100;
  double l2 = 1e-4;
  int epochs = 10;
  int window = 4;
  double keep_prob = 0.5;
  double norm_cap = 3.0;
  double adagrad_eps = 1e-6;
  std::uint64_t seed = 1;
  int patience = 3;               // early-stop patience when a dev metric runs
  bool class_weighting = false;   // off by default; the objective stays
                                  // accuracy-oriented like the training data
  int kernel_width = 2;
  int filters = 300;
  int hidden = 50;
  int token_dim = 300;
  int pos_dim = 32;
  int shape_dim = 16;

  void validate() const;
  Hyperparams hyperparams() const;
};

// `key = value` lines, '#' comments; unknown keys are errors
TrainConfig parse_config(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// J = -(1/m) * sum log p(gold) + (l2/2) * ||theta||^2, PAD rows excluded
double nll_loss(const std::vector<std::vector<double>>& prob_batch,
                const std::vector<std::size_t>& gold, const ModelBundle& model,
                double l2);

// sum of squares over every trainable parameter (PAD embedding rows excluded)
double param_squared_norm(const ModelBundle& model);

// G += g^2; param -= lr * g / (sqrt(G) + eps), elementwise
void adagrad_step(std::span<double> params, std::span<const double> grads,
                  std::span<double> accum, double lr, double eps);

struct AdaGradState {
  Gradients accum;  // same shapes as the gradients, all zeros initially

  static AdaGradState zeros_like(const ModelBundle& model);
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> dev_metric;  // empty unless a dev callback was given
  int best_epoch = -1;
};

// Optional per-epoch dev metric (higher is better) for early stopping; the
// best-scoring weights are restored before returning.
using DevMetricFn = std::function<double(const ModelBundle&)>;

TrainLog train(ModelBundle& model, const std::vector<WindowInstance>& data,
               const TrainConfig& cfg, const DevMetricFn& dev_metric = {});

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probs;
};

// TEST-mode forward; argmax with ties broken by lowest class index
Prediction predict(const ModelBundle& model, const WindowInstance& win);

}  // namespace clinx
