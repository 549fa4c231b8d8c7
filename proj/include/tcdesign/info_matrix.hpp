#pragma once

#include <numeric>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "tcdesign/design.hpp"
#include "tcdesign/matrix.hpp"
#include "tcdesign/rational.hpp"

namespace tcdesign {

// Information matrices of integer designs are computed in exact rational
// arithmetic; real-valued designs stay in floating point.
template <typename D>
using info_scalar_t =
    std::conditional_t<std::is_same_v<typename D::value_type, Count>, Rational,
                       typename D::value_type>;

namespace detail {

template <typename S, typename T>
S info_entry(const DesignSummary<T>& sum, int i, int j, int row_offset) {
  S acc(0);
  auto cell = [&](int row, int k) -> S {
    if (row == 0) return S(sum.control_row[k]);
    return S(sum.test_allocation(row - 1, k));
  };
  for (int k = 0; k < static_cast<int>(sum.block_sizes.size()); ++k)
    acc += cell(i + row_offset, k) * cell(j + row_offset, k) / S(sum.block_sizes[k]);
  S out = -acc;
  if (i == j) out += S(sum.replications[i + row_offset]);
  return out;
}

}  // namespace detail

// M = diag(r) - X diag(s^-1) X^T, order v+1. Rows sum to zero.
template <typename D>
Matrix<info_scalar_t<D>> full_info(const D& design) {
  using S = info_scalar_t<D>;
  auto sum = summarize(design);
  for (const auto& s : sum.block_sizes)
    if (!(s > typename D::value_type(0))) throw std::domain_error("zero block size");
  const int order = design.v() + 1;
  Matrix<S> m(order, order);
  for (int i = 0; i < order; ++i)
    for (int j = i; j < order; ++j) {
      S e = detail::info_entry<S>(sum, i, j, 0);
      m(i, j) = e;
      m(j, i) = e;
    }
  return m;
}

// N = diag(r_1..r_v) - Z diag(s^-1) Z^T; equals M with the control row
// and column deleted.
template <typename D>
Matrix<info_scalar_t<D>> contrast_info(const D& design) {
  using S = info_scalar_t<D>;
  auto sum = summarize(design);
  for (const auto& s : sum.block_sizes)
    if (!(s > typename D::value_type(0))) throw std::domain_error("zero block size");
  const int v = design.v();
  Matrix<S> n(v, v);
  for (int i = 0; i < v; ++i)
    for (int j = i; j < v; ++j) {
      S e = detail::info_entry<S>(sum, i, j, 1);
      n(i, j) = e;
      n(j, i) = e;
    }
  return n;
}

enum class FeasibilityReason { connected, disconnected, rank_deficient };

struct FeasibilityReport {
  bool feasible = false;
  FeasibilityReason reason = FeasibilityReason::disconnected;
};

// A design is feasible iff the treatment-block incidence graph joins all
// v+1 treatments; decided combinatorially, no numeric rank threshold.
template <typename D>
FeasibilityReport is_feasible(const D& design) {
  const int v = design.v();
  const int d = design.d();
  std::vector<int> parent(v + 1 + d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int i = 0; i <= v; ++i)
    for (int k = 0; k < d; ++k)
      if (design(i, k) > typename D::value_type(0)) unite(i, v + 1 + k);
  int root = find(0);
  for (int i = 1; i <= v; ++i)
    if (find(i) != root) return {false, FeasibilityReason::disconnected};
  return {true, FeasibilityReason::connected};
}

template <typename T>
Matrix<T> inverse_info(const Matrix<T>& n) {
  if (!is_symmetric(n)) throw std::invalid_argument("information matrix must be symmetric");
  auto inv = inverse(n);
  if (!inv) throw std::domain_error("singular information matrix: design is infeasible");
  return *inv;
}

// Completely symmetric matrix with the same trace and the same total
// off-diagonal sum: the average of N over all test-treatment
// permutations, without the factorial-size sum.
template <typename T>
Matrix<T> symmetrize(const Matrix<T>& n) {
  if (!is_symmetric(n)) throw std::invalid_argument("symmetrize needs a symmetric matrix");
  const int v = n.rows();
  if (v == 1) return n;
  T diag = trace(n) / T(v);
  T off = (entry_sum(n) - trace(n)) / T(v * (v - 1));
  Matrix<T> out(v, v);
  for (int i = 0; i < v; ++i)
    for (int j = 0; j < v; ++j) out(i, j) = i == j ? diag : off;
  return out;
}

inline Matrix<Rational> symmetrized_info(const ExactDesign& design) {
  const auto& m = design.block_sizes();
  for (Count mk : m)
    if (mk != m.front()) throw std::invalid_argument("symmetrized_info needs equal block sizes");
  return symmetrize(contrast_info(design));
}

// lambda is the smallest eigenvalue of N exactly when it is an
// eigenvalue (det(N - lambda I) = 0) and N - lambda I is PSD.
inline bool is_exact_lambda_min(const Matrix<Rational>& n, const Rational& lambda) {
  Matrix<Rational> shifted = n;
  for (int i = 0; i < n.rows(); ++i) shifted(i, i) -= lambda;
  if (!(determinant(shifted) == Rational(0))) return false;
  return is_positive_semidefinite(shifted);
}

// Recovers lambda_min as an exact rational when it has one, by checking
// continued-fraction convergents of the floating approximation.
inline std::optional<Rational> exact_lambda_min(const Matrix<Rational>& n,
                                                std::optional<double> hint = std::nullopt) {
  double x = hint ? *hint : spectrum(to_double(n)).lambda_min;
  for (const Rational& cand : convergents(x)) {
    if (std::fabs(to_double(cand) - x) > 1e-6) continue;
    if (is_exact_lambda_min(n, cand)) return cand;
  }
  return std::nullopt;
}

}  // namespace tcdesign
