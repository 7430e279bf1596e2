#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dirsim/errors.hpp"

namespace dirsim {

/// Small dense row-major matrix. Dimensions here are N-1 for a handful of
/// species, so no attempt is made at blocking or vectorization.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double max_abs_difference(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// In-place lower Cholesky factor of a symmetric positive semi-definite
/// matrix stored row-major in `a` (n x n). Pivots in [-tolerance, 0] are
/// treated as exact zeros and their column is zeroed; anything more negative
/// throws FactorizationFailure. The strict upper triangle is zeroed.
inline void cholesky_in_place(std::span<double> a, std::size_t n,
                              double tolerance = 1e-14) {
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= a[j * n + k] * a[j * n + k];
    if (pivot < -tolerance)
      throw FactorizationFailure("negative pivot " + std::to_string(pivot) +
                                 " at column " + std::to_string(j));
    if (pivot <= 0.0) {
      for (std::size_t i = j; i < n; ++i) a[i * n + j] = 0.0;
    } else {
      const double d = std::sqrt(pivot);
      a[j * n + j] = d;
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = a[i * n + j];
        for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
        a[i * n + j] = v / d;
      }
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
}

inline Matrix cholesky(Matrix a, double tolerance = 1e-14) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky needs a square matrix");
  cholesky_in_place(a.data(), a.rows(), tolerance);
  return a;
}

/// Solves a x = rhs by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> rhs) {
  const std::size_t n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw DimensionMismatch("solve shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(p, col))) p = r;
    if (a(p, col) == 0.0) throw SingularDiffusion("matrix is singular");
    if (p != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(col, j));
      std::swap(rhs[p], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) v -= a(i, j) * x[j];
    x[i] = v / a(i, i);
  }
  return x;
}

}  // namespace dirsim
