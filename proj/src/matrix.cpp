#include "rtdc/matrix.hpp"

#include <cmath>
#include <string>

#include "rtdc/errors.hpp"
#include "rtdc/flops.hpp"

namespace rtdc {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  flops::count({.adds = a.rows() * a.cols() * b.cols(), .muls = a.rows() * a.cols() * b.cols()});
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ArgumentError("transpose product: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto bj = b.col(j);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      auto ai = a.col(i);
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  flops::count({.adds = a.rows() * a.cols() * b.cols(), .muls = a.rows() * a.cols() * b.cols()});
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError("matrix difference: shapes differ");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

DenseSym::DenseSym(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw ValidationError("dense symmetric matrix must be square");
  for (std::size_t j = 0; j < m_.cols(); ++j)
    for (std::size_t i = j + 1; i < m_.rows(); ++i)
      if (m_(i, j) != m_(j, i))
        throw ValidationError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
}

}  // namespace rtdc
