#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "tcdesign/design.hpp"
#include "tcdesign/errors.hpp"
#include "tcdesign/info_matrix.hpp"

namespace tcdesign {

enum class Criterion { A, MV, E, R, PhiR, C, VarCovSum };

inline const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::A: return "A";
    case Criterion::MV: return "MV";
    case Criterion::E: return "E";
    case Criterion::R: return "R";
    case Criterion::PhiR: return "phiR";
    case Criterion::C: return "c";
    case Criterion::VarCovSum: return "varcov";
  }
  return "?";
}

// Score of a design under one criterion. `exact` is populated whenever
// the value has an exact rational form (always for A/MV/R/varcov on
// integer or rational designs; for E and phiR when one exists).
struct CriterionValue {
  Criterion criterion = Criterion::A;
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::optional<Rational> exact;
};

// Attainable maximum of lambda_min(N) over approximate designs: 1/(4v).
inline Rational e_opt_bound(int v) {
  if (v < 1) throw std::invalid_argument("need at least one test treatment");
  return make_rational(1, 4L * v);
}

namespace detail {

inline std::optional<Rational> exact_vth_root(const Rational& x, int v) {
  if (x <= Rational(0)) return std::nullopt;
  mpz_class num_root, den_root;
  if (mpz_root(num_root.get_mpz_t(), x.get_num().get_mpz_t(), v) == 0) return std::nullopt;
  if (mpz_root(den_root.get_mpz_t(), x.get_den().get_mpz_t(), v) == 0) return std::nullopt;
  Rational r(num_root, den_root);
  r.canonicalize();
  return r;
}

template <typename T>
double diag_product(const Matrix<T>& inv) {
  const int v = inv.rows();
  if (v > 32) {
    double log_sum = 0;
    for (int i = 0; i < v; ++i) log_sum += std::log(static_cast<double>(inv(i, i)));
    return std::exp(log_sum);
  }
  double p = 1;
  for (int i = 0; i < v; ++i) p *= static_cast<double>(inv(i, i));
  return p;
}

inline CriterionValue infeasible_value(Criterion crit) {
  return {crit, std::numeric_limits<double>::infinity(), false, std::nullopt};
}

}  // namespace detail

template <typename D>
CriterionValue evaluate(const D& design, Criterion crit) {
  if (crit == Criterion::C)
    throw std::invalid_argument("c-optimality takes a contrast vector; use c_value");
  if (!is_feasible(design).feasible) return detail::infeasible_value(crit);

  using S = info_scalar_t<D>;
  Matrix<S> n = contrast_info(design);
  const int v = n.rows();
  CriterionValue out;
  out.criterion = crit;
  out.feasible = true;

  if constexpr (std::is_same_v<S, Rational>) {
    if (crit == Criterion::E) {
      double lmin = spectrum(to_double(n)).lambda_min;
      out.value = 1.0 / lmin;
      if (auto exact_min = exact_lambda_min(n, lmin))
        if (*exact_min > Rational(0)) out.exact = Rational(1) / *exact_min;
    } else {
      auto inv = inverse(n);
      if (!inv) return detail::infeasible_value(crit);
      switch (crit) {
        case Criterion::A:
          out.exact = trace(*inv);
          break;
        case Criterion::MV: {
          Rational best = (*inv)(0, 0);
          for (int i = 1; i < v; ++i)
            if ((*inv)(i, i) > best) best = (*inv)(i, i);
          out.exact = best;
          break;
        }
        case Criterion::R: {
          Rational p(1);
          for (int i = 0; i < v; ++i) p *= (*inv)(i, i);
          out.exact = p;
          break;
        }
        case Criterion::PhiR: {
          Rational p(1);
          for (int i = 0; i < v; ++i) p *= (*inv)(i, i);
          if (auto root = detail::exact_vth_root(p, v)) out.exact = Rational(1) / *root;
          out.value = std::pow(to_double(p), -1.0 / v);
          break;
        }
        case Criterion::VarCovSum:
          out.exact = entry_sum(*inv);
          break;
        case Criterion::E:
        case Criterion::C:
          break;
      }
    }
    if (out.exact) out.value = to_double(*out.exact);
  } else {
    auto inv = inverse(n);
    if (!inv) return detail::infeasible_value(crit);
    switch (crit) {
      case Criterion::A:
        out.value = trace(*inv);
        break;
      case Criterion::MV: {
        double best = (*inv)(0, 0);
        for (int i = 1; i < v; ++i) best = std::max(best, (*inv)(i, i));
        out.value = best;
        break;
      }
      case Criterion::R:
        out.value = detail::diag_product(*inv);
        break;
      case Criterion::PhiR:
        out.value = std::pow(detail::diag_product(*inv), -1.0 / v);
        break;
      case Criterion::VarCovSum:
        out.value = entry_sum(*inv);
        break;
      case Criterion::E:
        out.value = 1.0 / spectrum(n).lambda_min;
        break;
      case Criterion::C:
        break;
    }
  }
  return out;
}

// Variance of the least-squares estimator of c^T tau: c^T M^- c. For a
// contrast c = Qx on a feasible design this is x^T N^-1 x, computed
// exactly in rational mode; otherwise the generalized inverse of M is
// used, with estimability checked against ||(I - M M^-) c||.
template <typename D>
CriterionValue c_value(const D& design, const std::vector<info_scalar_t<D>>& c) {
  using S = info_scalar_t<D>;
  if (static_cast<int>(c.size()) != design.v() + 1)
    throw std::invalid_argument("contrast vector must have length v+1");

  bool all_zero = true;
  S total(0);
  for (const S& ci : c) {
    if (!(ci == S(0))) all_zero = false;
    total += ci;
  }
  CriterionValue out;
  out.criterion = Criterion::C;
  out.feasible = true;
  if (all_zero) {
    out.value = 0;
    if constexpr (std::is_same_v<S, Rational>) out.exact = Rational(0);
    return out;
  }

  bool zero_sum;
  if constexpr (std::is_same_v<S, Rational>)
    zero_sum = total == Rational(0);
  else
    zero_sum = std::fabs(total) <= kConstructionTol;

  if (zero_sum && is_feasible(design).feasible) {
    Matrix<S> n = contrast_info(design);
    auto inv = inverse(n);
    if (inv) {
      S acc(0);
      for (int i = 0; i < n.rows(); ++i)
        for (int j = 0; j < n.cols(); ++j) acc += c[i + 1] * (*inv)(i, j) * c[j + 1];
      if constexpr (std::is_same_v<S, Rational>) {
        out.exact = acc;
        out.value = to_double(acc);
      } else {
        out.value = acc;
      }
      return out;
    }
  }

  // General route through the full information matrix.
  Matrix<double> m = [&] {
    if constexpr (std::is_same_v<S, Rational>)
      return to_double(full_info(design));
    else
      return full_info(design);
  }();
  Matrix<double> pinv = pseudo_inverse(m);
  std::vector<double> cd(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if constexpr (std::is_same_v<S, Rational>)
      cd[i] = to_double(c[i]);
    else
      cd[i] = c[i];
  }
  const int order = m.rows();
  double residual_sq = 0;
  for (int i = 0; i < order; ++i) {
    double mmc = 0;
    for (int j = 0; j < order; ++j) {
      double mm = 0;
      for (int k = 0; k < order; ++k) mm += m(i, k) * pinv(k, j);
      mmc += mm * cd[j];
    }
    double resid = cd[i] - mmc;
    residual_sq += resid * resid;
  }
  if (std::sqrt(residual_sq) > 1e-8)
    throw NonEstimableError("contrast is not estimable under this design");
  double value = 0;
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) value += cd[i] * pinv(i, j) * cd[j];
  out.value = value;
  return out;
}

// Total order on scores of the same criterion: smaller is better except
// for phiR, infeasible ranks worst, ties compare equal.
inline std::weak_ordering order_values(const CriterionValue& a, const CriterionValue& b) {
  if (a.criterion != b.criterion) throw std::invalid_argument("criterion mismatch");
  if (a.feasible != b.feasible)
    return a.feasible ? std::weak_ordering::less : std::weak_ordering::greater;
  if (!a.feasible) return std::weak_ordering::equivalent;
  const bool maximizing = a.criterion == Criterion::PhiR;
  int cmp;
  if (a.exact && b.exact)
    cmp = *a.exact < *b.exact ? -1 : (*a.exact == *b.exact ? 0 : 1);
  else
    cmp = a.value < b.value ? -1 : (a.value == b.value ? 0 : 1);
  if (maximizing) cmp = -cmp;
  if (cmp < 0) return std::weak_ordering::less;
  if (cmp > 0) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

inline bool is_better(const CriterionValue& a, const CriterionValue& b) {
  return order_values(a, b) == std::weak_ordering::less;
}

}  // namespace tcdesign
