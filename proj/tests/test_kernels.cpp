#include <cmath>
#include <vector>

#include "doctest.h"

#include "clinx/kernels.hpp"
#include "clinx/rng.hpp"

using namespace clinx;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("scalar dot matches a plain loop") {
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 3u, 17u, 348u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) expect += a[i] * b[i];
    CHECK(kernels::scalar::dot(a.data(), b.data(), n) == expect);
  }
}

#ifdef CLINX_HAVE_AVX2_BUILD

TEST_CASE("avx2 reductions agree with scalar to 1e-12 relative") {
  if (!kernels::force_backend("avx2")) return;  // no AVX2 on this machine
  Rng rng(11);
  for (std::size_t n : {1u, 2u, 5u, 7u, 8u, 31u, 64u, 347u, 696u, 1001u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    const double s = kernels::scalar::dot(a.data(), b.data(), n);
    const double v = kernels::avx2::dot(a.data(), b.data(), n);
    CHECK(std::abs(v - s) <= 1e-12 * std::max({1.0, std::abs(s), std::abs(v)}));

    const double ss = kernels::scalar::sum_squares(a.data(), n);
    const double vs = kernels::avx2::sum_squares(a.data(), n);
    CHECK(std::abs(vs - ss) <= 1e-12 * std::max(1.0, ss));
  }
  kernels::force_backend("scalar");
  kernels::force_backend("avx2");
}

TEST_CASE("avx2 elementwise kernels are bitwise-identical to scalar") {
  Rng rng(13);
  for (std::size_t n : {1u, 3u, 4u, 9u, 100u, 341u}) {
    const auto x = random_vec(n, rng);
    const double alpha = rng.uniform(-1.5, 1.5);

    auto y1 = random_vec(n, rng);
    auto y2 = y1;
    kernels::scalar::axpy(alpha, x.data(), y1.data(), n);
    kernels::avx2::axpy(alpha, x.data(), y2.data(), n);
    CHECK(y1 == y2);

    auto s1 = x;
    auto s2 = x;
    kernels::scalar::scale(alpha, s1.data(), n);
    kernels::avx2::scale(alpha, s2.data(), n);
    CHECK(s1 == s2);

    auto p1 = random_vec(n, rng);
    auto p2 = p1;
    auto acc1 = random_vec(n, rng);
    for (double& a : acc1) a = std::abs(a);
    auto acc2 = acc1;
    const auto g = random_vec(n, rng);
    kernels::scalar::adagrad_update(p1.data(), acc1.data(), g.data(), n, 0.05,
                                    1e-6);
    kernels::avx2::adagrad_update(p2.data(), acc2.data(), g.data(), n, 0.05,
                                  1e-6);
    CHECK(p1 == p2);
    CHECK(acc1 == acc2);
  }
}

#endif  // CLINX_HAVE_AVX2_BUILD

TEST_CASE("backend dispatch is forceable and reports its name") {
  const std::string original = kernels::active_backend();
  REQUIRE(kernels::force_backend("scalar"));
  CHECK(kernels::active_backend() == "scalar");
  CHECK_FALSE(kernels::force_backend("no-such-backend"));
  CHECK(kernels::active_backend() == "scalar");
  kernels::force_backend(original);
}
