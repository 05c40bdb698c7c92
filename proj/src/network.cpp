#include "clinx/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "clinx/errors.hpp"
#include "clinx/kernels.hpp"

namespace clinx {

namespace {

Mat init_mat(std::size_t rows, std::size_t cols, Rng& rng, double bound) {
  Mat m(rows, cols);
  for (double& x : m.a) x = rng.uniform(-bound, bound);
  return m;
}

std::vector<double> init_vec(std::size_t n, Rng& rng, double bound) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

ModelBundle init_model(std::string task, std::vector<std::string> labels,
                       const Hyperparams& hp, Vocabularies vocabs,
                       std::uint64_t seed, double bound) {
  if (labels.size() < 2) throw DataError("init_model: need at least 2 labels");
  Rng rng(seed);
  ModelBundle m;
  m.task = std::move(task);
  m.labels = std::move(labels);
  m.hp = hp;
  m.vocabs = std::move(vocabs);
  m.tables.token = init_embedding(m.vocabs.token.size(),
                                  static_cast<std::size_t>(hp.token_dim), rng,
                                  bound);
  m.tables.pos = init_embedding(m.vocabs.pos.size(),
                                static_cast<std::size_t>(hp.pos_dim), rng,
                                bound);
  m.tables.shape = init_embedding(m.vocabs.shape.size(),
                                  static_cast<std::size_t>(hp.shape_dim), rng,
                                  bound);
  const auto f = static_cast<std::size_t>(hp.filters);
  const auto klen =
      static_cast<std::size_t>(hp.kernel_width) * static_cast<std::size_t>(hp.feature_dim());
  m.conv.filters = init_mat(f, klen, rng, bound);
  m.conv.bias = init_vec(f, rng, bound);
  m.mlp.weights = init_mat(static_cast<std::size_t>(hp.hidden), f, rng, bound);
  m.mlp.bias = init_vec(static_cast<std::size_t>(hp.hidden), rng, bound);
  m.soft.weights =
      init_mat(m.labels.size(), static_cast<std::size_t>(hp.hidden), rng, bound);
  m.soft.bias = init_vec(m.labels.size(), rng, bound);
  check_shapes(m);
  return m;
}

void check_shapes(const ModelBundle& m) {
  const auto d = static_cast<std::size_t>(m.hp.feature_dim());
  const auto f = static_cast<std::size_t>(m.hp.filters);
  const auto hid = static_cast<std::size_t>(m.hp.hidden);
  const bool ok =
      m.tables.token.rows == m.vocabs.token.size() &&
      m.tables.token.cols == static_cast<std::size_t>(m.hp.token_dim) &&
      m.tables.pos.rows == m.vocabs.pos.size() &&
      m.tables.pos.cols == static_cast<std::size_t>(m.hp.pos_dim) &&
      m.tables.shape.rows == m.vocabs.shape.size() &&
      m.tables.shape.cols == static_cast<std::size_t>(m.hp.shape_dim) &&
      m.conv.filters.rows == f &&
      m.conv.filters.cols == static_cast<std::size_t>(m.hp.kernel_width) * d &&
      m.conv.bias.size() == f && m.mlp.weights.rows == hid &&
      m.mlp.weights.cols == f && m.mlp.bias.size() == hid &&
      m.soft.weights.rows == m.labels.size() &&
      m.soft.weights.cols == hid && m.soft.bias.size() == m.labels.size() &&
      m.labels.size() >= 2;
  if (!ok) throw DataError("model bundle has inconsistent layer shapes");
}

DropoutMask draw_mask(std::size_t filters, double keep_prob, Rng& rng) {
  DropoutMask mask;
  mask.keep.resize(filters);
  for (std::size_t i = 0; i < filters; ++i) {
    mask.keep[i] = rng.bernoulli(keep_prob) ? 1 : 0;
  }
  return mask;
}

Mat conv_forward(const Mat& embedded, const ConvLayer& conv) {
  const std::size_t d = embedded.cols;
  if (d == 0 || conv.filters.cols % d != 0) {
    throw DataError("conv_forward: filter width not a multiple of feature dim");
  }
  const std::size_t h = conv.filters.cols / d;
  const std::size_t n = embedded.rows;
  if (n < h) throw DataError("conv_forward: sequence shorter than kernel");

  const std::size_t map_len = n - h + 1;
  const std::size_t num_filters = conv.filters.rows;
  Mat out(num_filters, map_len);
  for (std::size_t i = 0; i < map_len; ++i) {
    // rows i..i+h-1 are contiguous in the row-major embedding matrix
    const double* slice = embedded.row(i);
    for (std::size_t f = 0; f < num_filters; ++f) {
      const double u =
          kernels::dot(conv.filters.row(f), slice, conv.filters.cols) +
          conv.bias[f];
      out.at(f, i) = std::tanh(u);
    }
  }
  return out;
}

PoolResult max_pool(const Mat& feature_maps) {
  if (feature_maps.cols == 0) throw DataError("max_pool: empty feature map");
  PoolResult res;
  res.values.resize(feature_maps.rows);
  res.argmax.resize(feature_maps.rows);
  for (std::size_t f = 0; f < feature_maps.rows; ++f) {
    const double* row = feature_maps.row(f);
    std::size_t best = 0;
    for (std::size_t i = 1; i < feature_maps.cols; ++i) {
      if (row[i] > row[best]) best = i;  // strict >: ties keep lowest index
    }
    res.values[f] = row[best];
    res.argmax[f] = static_cast<int>(best);
  }
  return res;
}

ForwardCache forward(const ModelBundle& model, const WindowInstance& win,
                     const DropoutMask* mask) {
  if (win.rows.size() != static_cast<std::size_t>(model.hp.seq_len())) {
    throw DataError("forward: window length does not match model hyperparams");
  }
  ForwardCache c;
  c.window = win;
  c.embedded = embed(win, model.tables);
  c.fmap = conv_forward(c.embedded, model.conv);
  PoolResult pool = max_pool(c.fmap);
  c.pooled = std::move(pool.values);
  c.argmax = std::move(pool.argmax);

  const std::size_t f = c.pooled.size();
  c.masked.resize(f);
  if (mask) {
    if (mask->keep.size() != f) throw DataError("forward: mask size mismatch");
    c.train_mode = true;
    c.mask = mask->keep;
    for (std::size_t i = 0; i < f; ++i) {
      c.masked[i] = c.pooled[i] * static_cast<double>(c.mask[i]);
    }
  } else {
    c.train_mode = false;
    for (std::size_t i = 0; i < f; ++i) {
      c.masked[i] = c.pooled[i] * model.hp.keep_prob;
    }
  }

  const std::size_t hid = model.mlp.weights.rows;
  c.hidden.resize(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    c.hidden[j] =
        sigmoid(kernels::dot(model.mlp.weights.row(j), c.masked.data(), f) +
                model.mlp.bias[j]);
  }

  const std::size_t classes = model.soft.weights.rows;
  std::vector<double> logits(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    logits[k] =
        kernels::dot(model.soft.weights.row(k), c.hidden.data(), hid) +
        model.soft.bias[k];
  }
  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double z = 0.0;
  c.probs.resize(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    c.probs[k] = std::exp(logits[k] - max_logit);
    z += c.probs[k];
  }
  for (double& p : c.probs) p /= z;
  return c;
}

Gradients Gradients::zeros_like(const ModelBundle& m) {
  Gradients g;
  g.token_emb = Mat(m.tables.token.rows, m.tables.token.cols);
  g.pos_emb = Mat(m.tables.pos.rows, m.tables.pos.cols);
  g.shape_emb = Mat(m.tables.shape.rows, m.tables.shape.cols);
  g.conv_w = Mat(m.conv.filters.rows, m.conv.filters.cols);
  g.conv_b.assign(m.conv.bias.size(), 0.0);
  g.mlp_w = Mat(m.mlp.weights.rows, m.mlp.weights.cols);
  g.mlp_b.assign(m.mlp.bias.size(), 0.0);
  g.soft_w = Mat(m.soft.weights.rows, m.soft.weights.cols);
  g.soft_b.assign(m.soft.bias.size(), 0.0);
  return g;
}

void Gradients::zero() {
  token_emb.zero();
  pos_emb.zero();
  shape_emb.zero();
  conv_w.zero();
  conv_b.assign(conv_b.size(), 0.0);
  mlp_w.zero();
  mlp_b.assign(mlp_b.size(), 0.0);
  soft_w.zero();
  soft_b.assign(soft_b.size(), 0.0);
}

void Gradients::scale_all(double s) {
  kernels::scale(s, token_emb.a.data(), token_emb.size());
  kernels::scale(s, pos_emb.a.data(), pos_emb.size());
  kernels::scale(s, shape_emb.a.data(), shape_emb.size());
  kernels::scale(s, conv_w.a.data(), conv_w.size());
  kernels::scale(s, conv_b.data(), conv_b.size());
  kernels::scale(s, mlp_w.a.data(), mlp_w.size());
  kernels::scale(s, mlp_b.data(), mlp_b.size());
  kernels::scale(s, soft_w.a.data(), soft_w.size());
  kernels::scale(s, soft_b.data(), soft_b.size());
}

void backward(const ModelBundle& model, const ForwardCache& cache,
              std::size_t gold_label, Gradients& grads) {
  if (!cache.train_mode) {
    throw DataError("backward: requires a TRAIN-mode forward cache");
  }
  if (gold_label >= model.num_classes()) {
    throw DataError("backward: gold label out of range");
  }

  const std::size_t classes = model.num_classes();
  const std::size_t hid = model.mlp.weights.rows;
  const std::size_t f = model.conv.filters.rows;

  // softmax + NLL
  std::vector<double> dlogits(cache.probs);
  dlogits[gold_label] -= 1.0;

  std::vector<double> dhidden(hid, 0.0);
  for (std::size_t k = 0; k < classes; ++k) {
    grads.soft_b[k] += dlogits[k];
    kernels::axpy(dlogits[k], cache.hidden.data(), grads.soft_w.row(k), hid);
    kernels::axpy(dlogits[k], model.soft.weights.row(k), dhidden.data(), hid);
  }

  // sigmoid MLP
  std::vector<double> dmasked(f, 0.0);
  for (std::size_t j = 0; j < hid; ++j) {
    const double s = cache.hidden[j];
    const double dpre = dhidden[j] * s * (1.0 - s);
    grads.mlp_b[j] += dpre;
    kernels::axpy(dpre, cache.masked.data(), grads.mlp_w.row(j), f);
    kernels::axpy(dpre, model.mlp.weights.row(j), dmasked.data(), f);
  }

  // dropout mask gates the pooled layer; gradients flow only through kept units
  const std::size_t d = cache.embedded.cols;
  const std::size_t klen = model.conv.filters.cols;
  Mat dembedded(cache.embedded.rows, d);
  for (std::size_t fi = 0; fi < f; ++fi) {
    const double dz = dmasked[fi] * static_cast<double>(cache.mask[fi]);
    if (dz == 0.0) continue;
    const auto pos = static_cast<std::size_t>(cache.argmax[fi]);
    const double c = cache.fmap.at(fi, pos);
    const double dpre = dz * (1.0 - c * c);  // tanh'
    grads.conv_b[fi] += dpre;
    kernels::axpy(dpre, cache.embedded.row(pos), grads.conv_w.row(fi), klen);
    kernels::axpy(dpre, model.conv.filters.row(fi), dembedded.row(pos), klen);
  }

  // route embedded-row gradients back to the lookup tables; PAD rows frozen
  const auto tok_dim = static_cast<std::size_t>(model.hp.token_dim);
  const auto pos_dim = static_cast<std::size_t>(model.hp.pos_dim);
  const auto shape_dim = static_cast<std::size_t>(model.hp.shape_dim);
  for (std::size_t t = 0; t < cache.window.rows.size(); ++t) {
    const WindowRow& row = cache.window.rows[t];
    const double* src = dembedded.row(t);
    if (row.token != Vocabulary::kPad) {
      kernels::axpy(1.0, src, grads.token_emb.row(row.token), tok_dim);
    }
    if (row.pos != Vocabulary::kPad) {
      kernels::axpy(1.0, src + tok_dim, grads.pos_emb.row(row.pos), pos_dim);
    }
    if (row.shape != Vocabulary::kPad) {
      kernels::axpy(1.0, src + tok_dim + pos_dim,
                    grads.shape_emb.row(row.shape), shape_dim);
    }
  }
}

void renorm(double* w, std::size_t n, double cap) {
  if (cap <= 0.0) return;
  const double ss = kernels::sum_squares(w, n);
  if (ss > cap * cap) {
    kernels::scale(cap / std::sqrt(ss), w, n);
  }
}

void renorm_rows(Mat& m, double cap) {
  for (std::size_t r = 0; r < m.rows; ++r) renorm(m.row(r), m.cols, cap);
}

void apply_norm_constraint(ModelBundle& model) {
  if (model.hp.norm_cap <= 0.0) return;
  renorm_rows(model.mlp.weights, model.hp.norm_cap);
  renorm_rows(model.soft.weights, model.hp.norm_cap);
}

}  // namespace clinx
