#include <cmath>

#include "doctest.h"

#include "clinx/errors.hpp"
#include "clinx/network.hpp"
#include "clinx/serialize.hpp"

#include "test_support.hpp"

using namespace clinx;

TEST_CASE("conv_forward matches the brute-force window oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    const std::size_t d = 1 + rng.below(6);
    const std::size_t h = 1 + rng.below(n);  // h <= n
    const std::size_t f = 1 + rng.below(4);

    Mat x(n, d);
    for (double& v : x.a) v = rng.uniform(-1.0, 1.0);
    ConvLayer conv;
    conv.filters = Mat(f, h * d);
    for (double& v : conv.filters.a) v = rng.uniform(-1.0, 1.0);
    conv.bias.resize(f);
    for (double& v : conv.bias) v = rng.uniform(-1.0, 1.0);

    const Mat got = conv_forward(x, conv);
    const Mat want = testsupport::conv_oracle(x, conv.filters, conv.bias, h);
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (std::size_t i = 0; i < got.a.size(); ++i) {
      CHECK(std::abs(got.a[i] - want.a[i]) <= 1e-12);
    }
  }
}

TEST_CASE("conv_forward edge cases") {
  // zero filter, zero bias -> tanh(0) = 0 everywhere
  Mat x(4, 2);
  for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] = double(i) - 3.0;
  ConvLayer conv;
  conv.filters = Mat(1, 4);
  conv.bias = {0.0};
  const Mat zeros = conv_forward(x, conv);
  for (double v : zeros.a) CHECK(v == 0.0);

  // n == h gives a length-1 map
  ConvLayer wide;
  wide.filters = Mat(2, 8);
  wide.bias = {0.1, -0.1};
  const Mat one = conv_forward(x, wide);
  CHECK(one.cols == 1);

  // n < h is an error
  ConvLayer too_wide;
  too_wide.filters = Mat(1, 10 * 2);
  too_wide.bias = {0.0};
  CHECK_THROWS_AS(conv_forward(x, too_wide), DataError);
}

TEST_CASE("max_pool picks the max and the first argmax") {
  Mat m(2, 3);
  m.row(0)[0] = 0.1; m.row(0)[1] = -0.5; m.row(0)[2] = 0.3;
  m.row(1)[0] = 0.7; m.row(1)[1] = 0.7;  m.row(1)[2] = 0.7;
  const PoolResult r = max_pool(m);
  CHECK(r.values[0] == 0.3);
  CHECK(r.argmax[0] == 2);
  CHECK(r.values[1] == 0.7);
  CHECK(r.argmax[1] == 0);  // constant row ties break to the first position

  Mat single(1, 1);
  single.a[0] = -2.5;
  CHECK(max_pool(single).values[0] == -2.5);

  CHECK_THROWS_AS(max_pool(Mat(1, 0)), DataError);
}

TEST_CASE("forward produces a normalized distribution") {
  testsupport::SmallSetup s = testsupport::small_model(3);
  for (int trial = 0; trial < 10; ++trial) {
    const WindowInstance win = s.random_window();
    const ForwardCache c = forward(s.model, win, nullptr);
    double sum = 0.0;
    for (double p : c.probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("dropout: all-keep TRAIN equals TEST at p=1 bitwise") {
  testsupport::SmallSetup s = testsupport::small_model(5);
  s.model.hp.keep_prob = 1.0;
  const WindowInstance win = s.random_window();

  DropoutMask ones;
  ones.keep.assign(s.model.conv.filters.rows, 1);
  const ForwardCache train = forward(s.model, win, &ones);
  const ForwardCache test = forward(s.model, win, nullptr);
  REQUIRE(train.probs.size() == test.probs.size());
  for (std::size_t i = 0; i < train.probs.size(); ++i) {
    CHECK(train.probs[i] == test.probs[i]);
  }
}

TEST_CASE("dropout mask expectation approaches p*z") {
  testsupport::SmallSetup s = testsupport::small_model(6);
  const double p = 0.5;
  const WindowInstance win = s.random_window();
  const ForwardCache base = forward(s.model, win, nullptr);
  const std::vector<double>& z = base.pooled;

  const int trials = 10000;
  Rng rng(99);
  std::vector<double> mean(z.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    const DropoutMask mask = draw_mask(z.size(), p, rng);
    for (std::size_t i = 0; i < z.size(); ++i) {
      mean[i] += z[i] * static_cast<double>(mask.keep[i]);
    }
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    mean[i] /= trials;
    const double sigma =
        std::abs(z[i]) * std::sqrt(p * (1.0 - p) / trials);
    CHECK(std::abs(mean[i] - p * z[i]) <= 3.0 * sigma + 1e-15);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    testsupport::SmallSetup s = testsupport::small_model(seed);
    const WindowInstance win = s.random_window();
    const std::size_t gold = seed % s.model.num_classes();
    Rng mask_rng(seed + 100);
    const DropoutMask mask =
        draw_mask(s.model.conv.filters.rows, 0.7, mask_rng);
    const double max_rel =
        testsupport::gradient_check(s.model, win, gold, mask);
    CHECK(max_rel <= 1e-4);
  }
}

TEST_CASE("masked filters and PAD rows receive zero gradient") {
  testsupport::SmallSetup s = testsupport::small_model(8);
  WindowInstance win = s.random_window();
  win.rows.front() = WindowRow{};  // force a PAD row into the window

  DropoutMask mask;
  mask.keep.assign(s.model.conv.filters.rows, 1);
  mask.keep[0] = 0;
  const ForwardCache cache = forward(s.model, win, &mask);
  Gradients g = Gradients::zeros_like(s.model);
  backward(s.model, cache, 0, g);

  // filter 0 is masked: no gradient reaches its weights or bias
  CHECK(g.conv_b[0] == 0.0);
  for (std::size_t c = 0; c < g.conv_w.cols; ++c) CHECK(g.conv_w.at(0, c) == 0.0);

  for (std::size_t c = 0; c < g.token_emb.cols; ++c) {
    CHECK(g.token_emb.at(Vocabulary::kPad, c) == 0.0);
  }
  for (std::size_t c = 0; c < g.pos_emb.cols; ++c) {
    CHECK(g.pos_emb.at(Vocabulary::kPad, c) == 0.0);
  }
}

TEST_CASE("shared vocabulary index sums both positions' contributions") {
  testsupport::SmallSetup s = testsupport::small_model(12);
  WindowInstance win = s.random_window();
  REQUIRE(win.rows.size() >= 2);
  win.rows[1] = win.rows[0];  // duplicate row -> shared embedding rows

  Rng mask_rng(5);
  const DropoutMask mask = draw_mask(s.model.conv.filters.rows, 1.0, mask_rng);
  const double max_rel = testsupport::gradient_check(s.model, win, 1, mask);
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("renorm rescales only above the cap") {
  std::vector<double> w = {3.0, 4.0};  // norm 5
  renorm(w.data(), w.size(), 3.0);
  const double norm = std::sqrt(w[0] * w[0] + w[1] * w[1]);
  CHECK(std::abs(norm - 3.0) <= 1e-12);
  CHECK(std::abs(w[0] / w[1] - 3.0 / 4.0) <= 1e-12);  // direction preserved

  std::vector<double> small = {1.0, 1.0};
  renorm(small.data(), small.size(), 3.0);
  CHECK(small == std::vector<double>{1.0, 1.0});

  std::vector<double> zero = {0.0, 0.0};
  renorm(zero.data(), zero.size(), 3.0);
  CHECK(zero == std::vector<double>{0.0, 0.0});
}

TEST_CASE("model container round trip") {
  testsupport::SmallSetup s = testsupport::small_model(21);
  quantize_to_f32(s.model);
  const std::string bytes = save_model(s.model);
  const ModelBundle loaded = load_model(bytes);

  CHECK(save_model(loaded) == bytes);
  CHECK(loaded.labels == s.model.labels);

  const WindowInstance win = s.random_window();
  const ForwardCache a = forward(s.model, win, nullptr);
  const ForwardCache b = forward(loaded, win, nullptr);
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    CHECK(a.probs[i] == b.probs[i]);
  }
}

TEST_CASE("model container rejects corruption") {
  testsupport::SmallSetup s = testsupport::small_model(22);
  std::string bytes = save_model(s.model);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_model(bad_magic), DataError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(load_model(bad_version), DataError);

  const std::string truncated = bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(load_model(truncated), DataError);
}

TEST_CASE("label order survives serialization") {
  testsupport::SmallSetup s = testsupport::small_model(23);
  REQUIRE(s.model.labels.size() == 3);
  const ModelBundle loaded = load_model(save_model(s.model));
  CHECK(loaded.labels[0] == s.model.labels[0]);
  CHECK(loaded.labels[1] == s.model.labels[1]);
  CHECK(loaded.labels[2] == s.model.labels[2]);
}
