#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "tcdesign/rational.hpp"

namespace tcdesign {

// Small dense matrix over an exact or floating scalar. Row-major. The
// library only ever needs symmetric solve/eigen work on orders up to a
// few hundred, so everything here is the plain O(n^3) route.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), T(0));
  }
  Matrix(int rows, int cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
    if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      throw std::invalid_argument("matrix data size does not match dimensions");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  const std::vector<T>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == T(0)) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  Matrix scaled(const T& factor) const {
    Matrix out = *this;
    for (auto& x : out.data_) x *= factor;
    return out;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <typename T>
bool is_symmetric(const Matrix<T>& a) {
  if (a.rows() != a.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j)
      if (!(a(i, j) == a(j, i))) return false;
  return true;
}

template <typename T>
T trace(const Matrix<T>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trace of non-square matrix");
  T t(0);
  for (int i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

template <typename T>
T entry_sum(const Matrix<T>& a) {
  T t(0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t += a(i, j);
  return t;
}

namespace detail {

template <typename T>
int pick_pivot(const Matrix<T>& a, int col, int from_row) {
  if constexpr (std::is_floating_point_v<T>) {
    int best = -1;
    T best_abs(0);
    for (int i = from_row; i < a.rows(); ++i) {
      T mag = a(i, col) < T(0) ? -a(i, col) : a(i, col);
      if (mag > best_abs) {
        best_abs = mag;
        best = i;
      }
    }
    return best;
  } else {
    for (int i = from_row; i < a.rows(); ++i)
      if (!(a(i, col) == T(0))) return i;
    return -1;
  }
}

}  // namespace detail

template <typename T>
T determinant(Matrix<T> a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant of non-square matrix");
  const int n = a.rows();
  T det(1);
  for (int col = 0; col < n; ++col) {
    int piv = detail::pick_pivot(a, col, col);
    if (piv < 0 || a(piv, col) == T(0)) return T(0);
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (int i = col + 1; i < n; ++i) {
      if (a(i, col) == T(0)) continue;
      T f = a(i, col) / a(col, col);
      for (int j = col; j < n; ++j) a(i, j) -= f * a(col, j);
    }
  }
  return det;
}

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse of non-square matrix");
  const int n = a.rows();
  Matrix<T> work = a;
  Matrix<T> inv = Matrix<T>::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = detail::pick_pivot(work, col, col);
    if (piv < 0 || work(piv, col) == T(0)) return std::nullopt;
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(work(piv, j), work(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    T p = work(col, col);
    for (int j = 0; j < n; ++j) {
      work(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col || work(i, col) == T(0)) continue;
      T f = work(i, col);
      for (int j = 0; j < n; ++j) {
        work(i, j) -= f * work(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// Symmetric positive definiteness by natural-order elimination: every
// pivot must stay strictly positive. Exact for rational scalars.
template <typename T>
bool is_positive_definite(Matrix<T> a) {
  if (!is_symmetric(a)) throw std::invalid_argument("definiteness test needs a symmetric matrix");
  const int n = a.rows();
  for (int k = 0; k < n; ++k) {
    if (!(a(k, k) > T(0))) return false;
    for (int i = k + 1; i < n; ++i) {
      if (a(i, k) == T(0)) continue;
      T f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return true;
}

// Symmetric positive semidefiniteness via Schur complements on positive
// pivots. When no positive pivot remains the active block must vanish.
template <typename T>
bool is_positive_semidefinite(Matrix<T> a) {
  if (!is_symmetric(a)) throw std::invalid_argument("definiteness test needs a symmetric matrix");
  const int n = a.rows();
  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  while (!active.empty()) {
    int pivot_pos = -1;
    for (std::size_t p = 0; p < active.size(); ++p) {
      const T& diag = a(active[p], active[p]);
      if (diag < T(0)) return false;
      if (pivot_pos < 0 && diag > T(0)) pivot_pos = static_cast<int>(p);
    }
    if (pivot_pos < 0) {
      for (int i : active)
        for (int j : active)
          if (!(a(i, j) == T(0))) return false;
      return true;
    }
    int p = active[pivot_pos];
    active.erase(active.begin() + pivot_pos);
    for (int i : active) {
      if (a(i, p) == T(0)) continue;
      T f = a(i, p) / a(p, p);
      for (int j : active) a(i, j) -= f * a(p, j);
    }
  }
  return true;
}

inline Matrix<double> to_double(const Matrix<Rational>& a) {
  Matrix<double> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = to_double(a(i, j));
  return out;
}

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix<double>& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

inline Matrix<double> from_eigen(const Eigen::MatrixXd& m) {
  Matrix<double> out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace detail

struct Spectrum {
  double lambda_min = 0;
  double lambda_max = 0;
  std::vector<double> min_eigenvector;  // unit length, largest-|entry| positive
};

inline Spectrum spectrum(const Matrix<double>& a) {
  if (!is_symmetric(a)) throw std::invalid_argument("spectrum needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(a));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const int n = a.rows();
  Spectrum s;
  s.lambda_min = solver.eigenvalues()(0);
  s.lambda_max = solver.eigenvalues()(n - 1);
  Eigen::VectorXd vec = solver.eigenvectors().col(0);
  int lead = 0;
  for (int i = 1; i < n; ++i)
    if (std::fabs(vec(i)) > std::fabs(vec(lead))) lead = i;
  if (vec(lead) < 0) vec = -vec;
  s.min_eigenvector.assign(vec.data(), vec.data() + n);
  return s;
}

// Moore-Penrose inverse of a symmetric matrix; eigenvalues below
// rel_tol * |lambda|_max count as zero.
inline Matrix<double> pseudo_inverse(const Matrix<double>& a, double rel_tol = 1e-10) {
  if (!is_symmetric(a)) throw std::invalid_argument("pseudo_inverse needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(a));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Eigen::VectorXd vals = solver.eigenvalues();
  double scale = vals.cwiseAbs().maxCoeff();
  double cut = rel_tol * (scale > 0 ? scale : 1.0);
  Eigen::VectorXd inv_vals = vals;
  for (int i = 0; i < vals.size(); ++i) inv_vals(i) = std::fabs(vals(i)) <= cut ? 0.0 : 1.0 / vals(i);
  Eigen::MatrixXd out =
      solver.eigenvectors() * inv_vals.asDiagonal() * solver.eigenvectors().transpose();
  return detail::from_eigen(out);
}

}  // namespace tcdesign
