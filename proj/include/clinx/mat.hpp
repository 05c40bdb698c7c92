#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace clinx {

// Row-major double matrix; the only tensor type the network needs.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double* row(std::size_t r) {
    assert(r < rows);
    return a.data() + r * cols;
  }
  const double* row(std::size_t r) const {
    assert(r < rows);
    return a.data() + r * cols;
  }
  double& at(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return a[r * cols + c];
  }
  double at(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return a[r * cols + c];
  }
  std::size_t size() const { return a.size(); }
  void zero() { a.assign(a.size(), 0.0); }

  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

}  // namespace clinx
