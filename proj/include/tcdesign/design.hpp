#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tcdesign/errors.hpp"
#include "tcdesign/matrix.hpp"
#include "tcdesign/rational.hpp"

namespace tcdesign {

using Count = std::int64_t;

inline constexpr double kConstructionTol = 1e-12;

// Integer allocation of trials to (treatment, block) cells. Row 0 of the
// allocation table is the control; rows 1..v are the test treatments.
// Block k must receive exactly m_k trials.
class ExactDesign {
 public:
  using value_type = Count;

  ExactDesign(std::vector<Count> block_sizes, Matrix<Count> allocation)
      : m_(std::move(block_sizes)), alloc_(std::move(allocation)) {
    if (alloc_.rows() < 2) throw std::invalid_argument("design needs a control row and at least one test row");
    if (alloc_.cols() < 1) throw std::invalid_argument("design needs at least one block");
    if (static_cast<int>(m_.size()) != alloc_.cols())
      throw std::invalid_argument("block size list does not match allocation width");
    n_ = 0;
    for (int k = 0; k < alloc_.cols(); ++k) {
      if (m_[k] <= 0) throw std::invalid_argument("block sizes must be positive");
      Count col = 0;
      for (int i = 0; i < alloc_.rows(); ++i) {
        Count x = alloc_(i, k);
        if (x < 0) throw std::invalid_argument("allocation entries must be non-negative");
        col += x;
      }
      if (col != m_[k])
        throw std::invalid_argument("column " + std::to_string(k + 1) + " sums to " +
                                    std::to_string(col) + ", expected block size " +
                                    std::to_string(m_[k]));
      n_ += m_[k];
    }
  }

  static ExactDesign from_allocation(Matrix<Count> allocation) {
    if (allocation.cols() < 1) throw std::invalid_argument("design needs at least one block");
    std::vector<Count> m(allocation.cols(), 0);
    for (int k = 0; k < allocation.cols(); ++k)
      for (int i = 0; i < allocation.rows(); ++i) m[k] += allocation(i, k);
    return ExactDesign(std::move(m), std::move(allocation));
  }

  int v() const { return alloc_.rows() - 1; }
  int d() const { return alloc_.cols(); }
  Count n() const { return n_; }
  const std::vector<Count>& block_sizes() const { return m_; }
  Count operator()(int i, int k) const { return alloc_(i, k); }
  const Matrix<Count>& allocation() const { return alloc_; }

  bool operator==(const ExactDesign&) const = default;

 private:
  std::vector<Count> m_;
  Matrix<Count> alloc_;
  Count n_ = 0;
};

// Proportion allocation summing to one. The scalar is Rational for
// designs built from exact data or closed forms, double for
// user-supplied real allocations.
template <typename T>
class ApproxDesign {
 public:
  using value_type = T;

  explicit ApproxDesign(Matrix<T> allocation) : alloc_(std::move(allocation)) {
    if (alloc_.rows() < 2) throw std::invalid_argument("design needs a control row and at least one test row");
    if (alloc_.cols() < 1) throw std::invalid_argument("design needs at least one block");
    T total(0);
    for (int k = 0; k < alloc_.cols(); ++k) {
      T col(0);
      for (int i = 0; i < alloc_.rows(); ++i) {
        const T& x = alloc_(i, k);
        if (x < T(0)) throw std::invalid_argument("allocation entries must be non-negative");
        col += x;
      }
      if (!(col > T(0))) throw std::invalid_argument("every block must receive positive weight");
      total += col;
    }
    if constexpr (std::is_same_v<T, Rational>) {
      if (total != Rational(1)) throw std::invalid_argument("allocation must sum to one");
    } else {
      if (std::fabs(total - 1.0) > kConstructionTol)
        throw std::invalid_argument("allocation must sum to one within 1e-12");
    }
  }

  int v() const { return alloc_.rows() - 1; }
  int d() const { return alloc_.cols(); }
  const T& operator()(int i, int k) const { return alloc_(i, k); }
  const Matrix<T>& allocation() const { return alloc_; }

  bool operator==(const ApproxDesign&) const = default;

 private:
  Matrix<T> alloc_;
};

template <typename T>
struct DesignSummary {
  std::vector<T> replications;  // r, length v+1
  std::vector<T> block_sizes;   // s, length d
  Matrix<T> test_allocation;    // Z, v x d
  std::vector<T> control_row;   // z, length d
};

template <typename D>
DesignSummary<typename D::value_type> summarize(const D& design) {
  using T = typename D::value_type;
  const int v = design.v();
  const int d = design.d();
  DesignSummary<T> out;
  out.replications.assign(v + 1, T(0));
  out.block_sizes.assign(d, T(0));
  out.control_row.assign(d, T(0));
  out.test_allocation = Matrix<T>(v, d);
  for (int i = 0; i <= v; ++i)
    for (int k = 0; k < d; ++k) {
      T x = design(i, k);
      out.replications[i] += x;
      out.block_sizes[k] += x;
      if (i == 0)
        out.control_row[k] = x;
      else
        out.test_allocation(i - 1, k) = x;
    }
  return out;
}

// Concurrence of treatments i and j: sum over blocks of xi(i,k)*xi(j,k).
template <typename D>
typename D::value_type concurrence(const D& design, int i, int j) {
  using T = typename D::value_type;
  if (i < 0 || i > design.v() || j < 0 || j > design.v())
    throw std::out_of_range("treatment index out of range");
  T acc(0);
  for (int k = 0; k < design.d(); ++k) acc += T(design(i, k)) * T(design(j, k));
  return acc;
}

inline ApproxDesign<Rational> normalize(const ExactDesign& design) {
  Matrix<Rational> alloc(design.v() + 1, design.d());
  for (int i = 0; i <= design.v(); ++i)
    for (int k = 0; k < design.d(); ++k) {
      Rational q(static_cast<long>(design(i, k)), static_cast<long>(design.n()));
      q.canonicalize();
      alloc(i, k) = q;
    }
  return ApproxDesign<Rational>(std::move(alloc));
}

template <typename T>
ApproxDesign<T> product_design(const std::vector<T>& treatment_weights,
                               const std::vector<T>& block_weights) {
  if (treatment_weights.size() < 2) throw std::invalid_argument("need control plus at least one test weight");
  if (block_weights.empty()) throw std::invalid_argument("need at least one block weight");
  T rsum(0), ssum(0);
  for (const T& r : treatment_weights) {
    if (r < T(0)) throw std::invalid_argument("treatment weights must be non-negative");
    rsum += r;
  }
  for (const T& s : block_weights) {
    if (!(s > T(0))) throw std::invalid_argument("block weights must be positive");
    ssum += s;
  }
  auto normalized = [](const T& total) {
    if constexpr (std::is_same_v<T, Rational>)
      return total == Rational(1);
    else
      return std::fabs(total - 1.0) <= kConstructionTol;
  };
  if (!normalized(rsum)) throw std::invalid_argument("treatment weights must sum to one");
  if (!normalized(ssum)) throw std::invalid_argument("block weights must sum to one");
  const int v = static_cast<int>(treatment_weights.size()) - 1;
  const int d = static_cast<int>(block_weights.size());
  Matrix<T> alloc(v + 1, d);
  for (int i = 0; i <= v; ++i)
    for (int k = 0; k < d; ++k) alloc(i, k) = treatment_weights[i] * block_weights[k];
  return ApproxDesign<T>(std::move(alloc));
}

namespace detail {

inline void check_permutation(const std::vector<int>& pi, int v) {
  if (static_cast<int>(pi.size()) != v) throw std::invalid_argument("invalid permutation: wrong length");
  std::vector<bool> seen(v + 1, false);
  for (int p : pi) {
    if (p < 1 || p > v || seen[p]) throw std::invalid_argument("invalid permutation of test treatments");
    seen[p] = true;
  }
}

// Row pi[i-1] of the output is row i of the input, for i >= 1.
template <typename T>
Matrix<T> permute_rows(const Matrix<T>& alloc, const std::vector<int>& pi) {
  Matrix<T> out(alloc.rows(), alloc.cols());
  for (int k = 0; k < alloc.cols(); ++k) out(0, k) = alloc(0, k);
  for (int i = 1; i < alloc.rows(); ++i)
    for (int k = 0; k < alloc.cols(); ++k) out(pi[i - 1], k) = alloc(i, k);
  return out;
}

}  // namespace detail

inline ExactDesign permute_tests(const ExactDesign& design, const std::vector<int>& pi) {
  detail::check_permutation(pi, design.v());
  return ExactDesign(design.block_sizes(), detail::permute_rows(design.allocation(), pi));
}

template <typename T>
ApproxDesign<T> permute_tests(const ApproxDesign<T>& design, const std::vector<int>& pi) {
  detail::check_permutation(pi, design.v());
  return ApproxDesign<T>(detail::permute_rows(design.allocation(), pi));
}

}  // namespace tcdesign
