#include "clinx/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clinx/errors.hpp"
#include "clinx/kernels.hpp"

namespace clinx {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (keep_prob <= 0.0 || keep_prob > 1.0) {
    throw ConfigError("keep_prob must be in (0, 1]");
  }
  if (adagrad_eps <= 0.0) throw ConfigError("adagrad_eps must be > 0");
  if (kernel_width < 1) throw ConfigError("kernel_width must be >= 1");
  if (kernel_width > 2 * window + 1) {
    throw ConfigError("kernel_width exceeds sequence length");
  }
  if (filters < 1 || hidden < 1) {
    throw ConfigError("filters and hidden must be >= 1");
  }
  if (token_dim < 1 || pos_dim < 1 || shape_dim < 1) {
    throw ConfigError("embedding dims must be >= 1");
  }
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

Hyperparams TrainConfig::hyperparams() const {
  Hyperparams hp;
  hp.window = window;
  hp.kernel_width = kernel_width;
  hp.filters = filters;
  hp.hidden = hidden;
  hp.token_dim = token_dim;
  hp.pos_dim = pos_dim;
  hp.shape_dim = shape_dim;
  hp.keep_prob = keep_prob;
  hp.norm_cap = norm_cap;
  return hp;
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    }

    try {
      if (key == "learning_rate") cfg.learning_rate = std::stod(value);
      else if (key == "batch_size") cfg.batch_size = std::stoi(value);
      else if (key == "l2") cfg.l2 = std::stod(value);
      else if (key == "epochs") cfg.epochs = std::stoi(value);
      else if (key == "window") cfg.window = std::stoi(value);
      else if (key == "keep_prob") cfg.keep_prob = std::stod(value);
      else if (key == "norm_cap") cfg.norm_cap = std::stod(value);
      else if (key == "adagrad_eps") cfg.adagrad_eps = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "patience") cfg.patience = std::stoi(value);
      else if (key == "class_weighting") {
        if (value == "on") cfg.class_weighting = true;
        else if (value == "off") cfg.class_weighting = false;
        else throw ConfigError("class_weighting must be 'on' or 'off'");
      }
      else if (key == "kernel_width") cfg.kernel_width = std::stoi(value);
      else if (key == "filters") cfg.filters = std::stoi(value);
      else if (key == "hidden") cfg.hidden = std::stoi(value);
      else if (key == "token_dim") cfg.token_dim = std::stoi(value);
      else if (key == "pos_dim") cfg.pos_dim = std::stoi(value);
      else if (key == "shape_dim") cfg.shape_dim = std::stoi(value);
      else {
        throw ConfigError("unknown config key '" + key + "' (line " +
                          std::to_string(line_no) + ")");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad value '" + value + "' for " + key);
    } catch (const std::out_of_range&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": value out of range for " + key);
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

// sum of squares excluding the frozen PAD embedding rows
double table_squared_norm(const Mat& m) {
  if (m.rows <= 1) return 0.0;
  return kernels::sum_squares(m.row(1), (m.rows - 1) * m.cols);
}

}  // namespace

double param_squared_norm(const ModelBundle& m) {
  double ss = 0.0;
  ss += table_squared_norm(m.tables.token);
  ss += table_squared_norm(m.tables.pos);
  ss += table_squared_norm(m.tables.shape);
  ss += kernels::sum_squares(m.conv.filters.a.data(), m.conv.filters.size());
  ss += kernels::sum_squares(m.conv.bias.data(), m.conv.bias.size());
  ss += kernels::sum_squares(m.mlp.weights.a.data(), m.mlp.weights.size());
  ss += kernels::sum_squares(m.mlp.bias.data(), m.mlp.bias.size());
  ss += kernels::sum_squares(m.soft.weights.a.data(), m.soft.weights.size());
  ss += kernels::sum_squares(m.soft.bias.data(), m.soft.bias.size());
  return ss;
}

double nll_loss(const std::vector<std::vector<double>>& prob_batch,
                const std::vector<std::size_t>& gold, const ModelBundle& model,
                double l2) {
  if (prob_batch.size() != gold.size() || prob_batch.empty()) {
    throw DataError("nll_loss: batch size mismatch or empty batch");
  }
  double nll = 0.0;
  for (std::size_t i = 0; i < prob_batch.size(); ++i) {
    if (gold[i] >= prob_batch[i].size()) {
      throw DataError("nll_loss: gold label out of range");
    }
    nll -= std::log(std::max(prob_batch[i][gold[i]], 1e-12));
  }
  nll /= static_cast<double>(prob_batch.size());
  return nll + 0.5 * l2 * param_squared_norm(model);
}

void adagrad_step(std::span<double> params, std::span<const double> grads,
                  std::span<double> accum, double lr, double eps) {
  if (params.size() != grads.size() || params.size() != accum.size()) {
    throw DataError("adagrad_step: shape mismatch");
  }
  kernels::adagrad_update(params.data(), accum.data(), grads.data(),
                          params.size(), lr, eps);
}

AdaGradState AdaGradState::zeros_like(const ModelBundle& model) {
  AdaGradState st;
  st.accum = Gradients::zeros_like(model);
  return st;
}

namespace {

struct ParamBlock {
  double* params;
  double* grads;
  double* accum;
  std::size_t n;
};

// Enumerates every trainable block; embedding tables start at row 1 so the
// PAD row is never touched by the regularizer or the optimizer.
std::vector<ParamBlock> param_blocks(ModelBundle& m, Gradients& g,
                                     Gradients& acc) {
  auto table = [](Mat& t, Mat& tg, Mat& ta) {
    return ParamBlock{t.row(1), tg.row(1), ta.row(1), (t.rows - 1) * t.cols};
  };
  std::vector<ParamBlock> blocks;
  if (m.tables.token.rows > 1) {
    blocks.push_back(table(m.tables.token, g.token_emb, acc.token_emb));
  }
  if (m.tables.pos.rows > 1) {
    blocks.push_back(table(m.tables.pos, g.pos_emb, acc.pos_emb));
  }
  if (m.tables.shape.rows > 1) {
    blocks.push_back(table(m.tables.shape, g.shape_emb, acc.shape_emb));
  }
  blocks.push_back({m.conv.filters.a.data(), g.conv_w.a.data(),
                    acc.conv_w.a.data(), m.conv.filters.size()});
  blocks.push_back({m.conv.bias.data(), g.conv_b.data(), acc.conv_b.data(),
                    m.conv.bias.size()});
  blocks.push_back({m.mlp.weights.a.data(), g.mlp_w.a.data(),
                    acc.mlp_w.a.data(), m.mlp.weights.size()});
  blocks.push_back({m.mlp.bias.data(), g.mlp_b.data(), acc.mlp_b.data(),
                    m.mlp.bias.size()});
  blocks.push_back({m.soft.weights.a.data(), g.soft_w.a.data(),
                    acc.soft_w.a.data(), m.soft.weights.size()});
  blocks.push_back({m.soft.bias.data(), g.soft_b.data(), acc.soft_b.data(),
                    m.soft.bias.size()});
  return blocks;
}

struct Snapshot {
  EmbeddingTables tables;
  ConvLayer conv;
  MlpLayer mlp;
  SoftmaxLayer soft;
};

Snapshot take_snapshot(const ModelBundle& m) {
  return {m.tables, m.conv, m.mlp, m.soft};
}

void restore_snapshot(ModelBundle& m, const Snapshot& s) {
  m.tables = s.tables;
  m.conv = s.conv;
  m.mlp = s.mlp;
  m.soft = s.soft;
}

constexpr std::uint64_t kShuffleStream = 0x51;
constexpr std::uint64_t kDropoutStream = 0xd0;

}  // namespace

TrainLog train(ModelBundle& model, const std::vector<WindowInstance>& data,
               const TrainConfig& cfg, const DevMetricFn& dev_metric) {
  cfg.validate();
  if (data.empty()) throw DataError("train: empty dataset");
  if (cfg.window != model.hp.window ||
      cfg.kernel_width != model.hp.kernel_width ||
      cfg.filters != model.hp.filters || cfg.hidden != model.hp.hidden ||
      cfg.token_dim != model.hp.token_dim ||
      cfg.pos_dim != model.hp.pos_dim ||
      cfg.shape_dim != model.hp.shape_dim) {
    throw DataError("train: config shape parameters do not match the model");
  }
  // inference-time dropout scaling must match how the model was trained
  model.hp.keep_prob = cfg.keep_prob;
  model.hp.norm_cap = cfg.norm_cap;
  const std::size_t classes = model.num_classes();
  for (const WindowInstance& w : data) {
    if (w.label < 0 || static_cast<std::size_t>(w.label) >= classes) {
      throw DataError("train: instance label outside the model's class set");
    }
  }

  std::vector<double> class_weights(classes, 1.0);
  if (cfg.class_weighting) {
    std::vector<std::size_t> counts(classes, 0);
    for (const WindowInstance& w : data) {
      counts[static_cast<std::size_t>(w.label)]++;
    }
    // inverse-frequency weights normalized to mean 1 over instances
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      class_weights[c] =
          counts[c] > 0
              ? static_cast<double>(data.size()) /
                    (static_cast<double>(classes) * static_cast<double>(counts[c]))
              : 0.0;
      total += class_weights[c] * static_cast<double>(counts[c]);
    }
    const double norm = static_cast<double>(data.size()) / total;
    for (double& w : class_weights) w *= norm;
  }

  Gradients grads = Gradients::zeros_like(model);
  AdaGradState state = AdaGradState::zeros_like(model);

  Rng dropout_rng(mix_seed(cfg.seed, kDropoutStream));
  const auto filters = static_cast<std::size_t>(cfg.filters);

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainLog log;
  double best_metric = -1.0;
  int since_best = 0;
  Snapshot best;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(
        mix_seed(mix_seed(cfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);

    double epoch_nll = 0.0;
    double epoch_reg = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto m_batch = static_cast<double>(stop - start);

      grads.zero();
      double batch_nll = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const WindowInstance& inst = data[order[k]];
        const DropoutMask mask =
            draw_mask(filters, cfg.keep_prob, dropout_rng);
        ForwardCache cache = forward(model, inst, &mask);
        const auto gold = static_cast<std::size_t>(inst.label);
        const double w = class_weights[gold];
        batch_nll -= w * std::log(std::max(cache.probs[gold], 1e-12));
        if (w == 1.0) {
          backward(model, cache, gold, grads);
        } else {
          Gradients one = Gradients::zeros_like(model);
          backward(model, cache, gold, one);
          one.scale_all(w);
          auto blocks = param_blocks(model, one, grads);
          for (auto& b : blocks) kernels::axpy(1.0, b.grads, b.accum, b.n);
        }
      }
      batch_nll /= m_batch;

      auto blocks = param_blocks(model, grads, state.accum);
      // batch objective: mean NLL + (l2/2)||theta||^2 -> grad += l2 * theta
      for (auto& b : blocks) {
        kernels::scale(1.0 / m_batch, b.grads, b.n);
        if (cfg.l2 > 0.0) kernels::axpy(cfg.l2, b.params, b.grads, b.n);
      }
      const double reg = 0.5 * cfg.l2 * param_squared_norm(model);
      for (auto& b : blocks) {
        kernels::adagrad_update(b.params, b.accum, b.grads, b.n,
                                cfg.learning_rate, cfg.adagrad_eps);
      }
      apply_norm_constraint(model);

      epoch_nll += batch_nll;
      epoch_reg += reg;
      ++batches;
    }

    log.epoch_loss.push_back((epoch_nll + epoch_reg) /
                             static_cast<double>(batches));

    if (dev_metric) {
      const double metric = dev_metric(model);
      log.dev_metric.push_back(metric);
      if (metric > best_metric) {
        best_metric = metric;
        best = take_snapshot(model);
        log.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }

  if (dev_metric && log.best_epoch >= 0) {
    restore_snapshot(model, best);
  }
  return log;
}

Prediction predict(const ModelBundle& model, const WindowInstance& win) {
  ForwardCache cache = forward(model, win, nullptr);
  Prediction pred;
  pred.probs = std::move(cache.probs);
  pred.label = 0;
  for (std::size_t c = 1; c < pred.probs.size(); ++c) {
    if (pred.probs[c] > pred.probs[pred.label]) pred.label = c;
  }
  return pred;
}

}  // namespace clinx
