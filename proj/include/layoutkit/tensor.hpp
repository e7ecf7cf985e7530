#pragma once

#include <cstddef>
#include <vector>

#include "layoutkit/error.hpp"

namespace layoutkit {

// Dense row-major matrix of doubles. Deliberately plain: the model code needs
// a fixed evaluation order everywhere, so no BLAS hides behind this.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c)
      : rows(r),
        cols(c),
        a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& operator()(int r, int c) {
    return a[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return a[static_cast<std::size_t>(r) * cols + c];
  }

  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return a.data() + static_cast<std::size_t>(r) * cols;
  }

  bool same_shape(const Mat& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

inline void add_inplace(Mat& x, const Mat& y) {
  if (!x.same_shape(y)) {
    raise(ErrorCode::InvalidArgument, "matrix shape mismatch in addition");
  }
  for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] += y.a[i];
}

inline Mat add(const Mat& x, const Mat& y) {
  Mat out = x;
  add_inplace(out, y);
  return out;
}

}  // namespace layoutkit
