#pragma once

// Dense matrices over an exact field (Rat, CycNum) or a numeric field with
// pivot scoring. Elements need +, -, *, / plus the free functions
//   is_zero(x), zero_like(x), one_like(x), pivot_score(x)
// found by argument-dependent lookup.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "hgb/errors.hpp"
#include "hgb/rational.hpp"

namespace hgb {

inline bool is_zero(const Rat& x) { return sgn(x) == 0; }
inline Rat zero_like(const Rat&) { return Rat(0); }
inline Rat one_like(const Rat&) { return Rat(1); }
inline double pivot_score(const Rat& x) { return is_zero(x) ? 0.0 : 1.0; }

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n, const T& proto) {
    Matrix m(n, n, zero_like(proto));
    for (std::size_t i = 0; i < n; ++i) m(i, i) = one_like(proto);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<T>& data() const { return data_; }

  Matrix col(std::size_t j) const {
    Matrix c(rows_, 1, data_.empty() ? T() : data_[0]);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  template <class F>
  Matrix map(F f) const {
    Matrix out = *this;
    for (auto& x : out.data_) x = f(x);
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  assert(a.cols() == b.rows());
  const T zero = a.empty() ? (b.empty() ? T() : zero_like(b(0, 0))) : zero_like(a(0, 0));
  Matrix<T> c(a.rows(), b.cols(), zero);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (is_zero(a(i, k))) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = c(i, j) + a(i, k) * b(k, j);
    }
  return c;
}

template <class T>
Matrix<T> operator+(Matrix<T> a, const Matrix<T>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = a(i, j) + b(i, j);
  return a;
}

template <class T>
Matrix<T> operator-(Matrix<T> a, const Matrix<T>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = a(i, j) - b(i, j);
  return a;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows(), a.empty() ? T() : a(0, 0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

template <class T>
Matrix<T> block_diag(const Matrix<T>& a, const Matrix<T>& b, const T& proto) {
  Matrix<T> out(a.rows() + b.rows(), a.cols() + b.cols(), zero_like(proto));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out(a.rows() + i, a.cols() + j) = b(i, j);
  return out;
}

template <class T>
Matrix<T> hconcat(const Matrix<T>& a, const Matrix<T>& b) {
  assert(a.rows() == b.rows());
  const T fill = !a.data().empty() ? a.data()[0] : (!b.data().empty() ? b.data()[0] : T());
  Matrix<T> out(a.rows(), a.cols() + b.cols(), fill);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
  }
  return out;
}

template <class T>
Matrix<T> select_cols(const Matrix<T>& a, const std::vector<std::size_t>& cols, const T& proto) {
  Matrix<T> out(a.rows(), cols.size(), zero_like(proto));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(i, cols[j]);
  return out;
}

/// Reduced row echelon form in place; returns the pivot columns.
template <class T>
std::vector<std::size_t> rref(Matrix<T>& a) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t best = a.rows();
    double best_score = 0.0;
    for (std::size_t i = row; i < a.rows(); ++i) {
      double s = pivot_score(a(i, col));
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best == a.rows()) continue;
    if (best != row)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(best, j), a(row, j));
    const T inv_p = one_like(a(row, col)) / a(row, col);
    for (std::size_t j = col; j < a.cols(); ++j) a(row, j) = a(row, j) * inv_p;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == row || is_zero(a(i, col))) continue;
      const T f = a(i, col);
      for (std::size_t j = col; j < a.cols(); ++j) a(i, j) = a(i, j) - f * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class T>
std::size_t rank(Matrix<T> a) {
  return rref(a).size();
}

/// Basis of {x : a x = 0}, one column per basis vector.
template <class T>
Matrix<T> nullspace(const Matrix<T>& a, const T& proto) {
  Matrix<T> r = a;
  auto pivots = rref(r);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < a.cols(); ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  Matrix<T> basis(a.cols(), free_cols.size(), zero_like(proto));
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    basis(free_cols[k], k) = one_like(proto);
    for (std::size_t pi = 0; pi < pivots.size(); ++pi) basis(pivots[pi], k) = zero_like(proto) - r(pi, free_cols[k]);
  }
  return basis;
}

/// Solves a x = b; nullopt when inconsistent.
template <class T>
std::optional<Matrix<T>> solve(const Matrix<T>& a, const Matrix<T>& b, const T& proto) {
  assert(a.rows() == b.rows());
  Matrix<T> aug = hconcat(a, b);
  auto pivots = rref(aug);
  for (auto p : pivots)
    if (p >= a.cols()) return std::nullopt;
  Matrix<T> x(a.cols(), b.cols(), zero_like(proto));
  for (std::size_t pi = 0; pi < pivots.size(); ++pi)
    for (std::size_t j = 0; j < b.cols(); ++j) x(pivots[pi], j) = aug(pi, a.cols() + j);
  return x;
}

template <class T>
Matrix<T> inverse(const Matrix<T>& a, const T& proto) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::NotInvertible, "non-square matrix");
  Matrix<T> aug = hconcat(a, Matrix<T>::identity(a.rows(), proto));
  auto pivots = rref(aug);
  if (pivots.size() < a.rows() || (a.rows() > 0 && pivots.back() >= a.cols()))
    throw Error(ErrorKind::NotInvertible, "singular matrix");
  Matrix<T> inv(a.rows(), a.rows(), zero_like(proto));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.rows(); ++j) inv(i, j) = aug(i, a.cols() + j);
  return inv;
}

template <class T>
T det(Matrix<T> a, const T& proto) {
  assert(a.rows() == a.cols());
  T d = one_like(proto);
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = col; i < n; ++i) {
      double s = pivot_score(a(i, col));
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best == n) return zero_like(proto);
    if (best != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(best, j), a(col, j));
      d = zero_like(proto) - d;
    }
    d = d * a(col, col);
    const T inv_p = one_like(proto) / a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (is_zero(a(i, col))) continue;
      const T f = a(i, col) * inv_p;
      for (std::size_t j = col; j < n; ++j) a(i, j) = a(i, j) - f * a(col, j);
    }
  }
  return d;
}

/// Characteristic polynomial det(t I - a), ascending coefficients, monic.
/// Faddeev-LeVerrier, so characteristic 0 only.
template <class T>
std::vector<T> charpoly(const Matrix<T>& a, const T& proto) {
  const std::size_t n = a.rows();
  std::vector<T> c(n + 1, zero_like(proto));
  c[n] = one_like(proto);
  Matrix<T> m(n, n, zero_like(proto));
  for (std::size_t k = 1; k <= n; ++k) {
    m = a * m;
    for (std::size_t i = 0; i < n; ++i) m(i, i) = m(i, i) + c[n - k + 1];
    Matrix<T> am = a * m;
    T tr = zero_like(proto);
    for (std::size_t i = 0; i < n; ++i) tr = tr + am(i, i);
    T kk = zero_like(proto);
    for (std::size_t s = 0; s < k; ++s) kk = kk + one_like(proto);
    c[n - k] = (zero_like(proto) - tr) / kk;
  }
  return c;
}

}  // namespace hgb
