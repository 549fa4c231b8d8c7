#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tcdesign/criteria.hpp"
#include "tcdesign/design.hpp"
#include "tcdesign/errors.hpp"
#include "tcdesign/info_matrix.hpp"

namespace tcdesign {

enum class Family { Thm1, Thm3, Prop1, Thm5_BTIB };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Thm1: return "thm1";
    case Family::Thm3: return "thm3";
    case Family::Prop1: return "prop1";
    case Family::Thm5_BTIB: return "thm5";
  }
  return "?";
}

// The printed formulas for g and h contain two transcription slips; the
// corrected forms are the default and the printed forms stay available
// for diagnostics.
struct GOptions {
  bool paper_literal = false;
};

// Minimal sum of squares of an integer allocation of r units into d
// blocks: floor(r/d) everywhere, plus one extra unit in r mod d blocks.
inline Rational h_func(Count r, Count d, GOptions opt = {}) {
  if (r < 0) throw std::invalid_argument("negative control replication");
  if (d < 1) throw std::invalid_argument("need at least one block");
  const Count f = r / d;
  const Count rem = r - d * f;
  Rational base = make_rational(f) * make_rational(f) * make_rational(d - rem);
  if (!opt.paper_literal)
    return base + make_rational(rem) * make_rational(f + 1) * make_rational(f + 1);
  Rational lit = make_rational(r, d) + Rational(1);
  return base + make_rational(rem) * lit * lit;
}

// g(r; d,q,v) = v/(r - h/q) + (v-1)^2 / (d(q-1) - r(q-1)/q - (r - h/q)/v).
// Equals trace(N^-1) of a balanced BTIB design with total control
// replication r. Empty when either denominator is non-positive.
inline std::optional<Rational> g_func(Count r, Count d, Count q, Count v, GOptions opt = {}) {
  if (q < 1 || v < 1) throw std::invalid_argument("block size and treatment count must be positive");
  Rational h = h_func(r, d, opt);
  Rational w = make_rational(r) - h / make_rational(q);
  if (!(w > Rational(0))) return std::nullopt;
  Rational den = make_rational(d) * make_rational(q - 1) -
                 make_rational(r) * make_rational(q - 1) / make_rational(q);
  if (opt.paper_literal)
    den -= make_rational(v) * w;
  else
    den -= w / make_rational(v);
  if (!(den > Rational(0))) return std::nullopt;
  return make_rational(v) / w + make_rational((v - 1) * (v - 1)) / den;
}

struct ControlReplication {
  Count R = 0;
  Rational g_at_R;
  std::vector<std::pair<Count, Rational>> g_values;  // valid r only, ascending
  std::vector<Count> valid_range;
};

// Scans r = 0..floor(dq/2); the minimizer R breaks ties toward smaller r.
inline ControlReplication optimal_control_replication(Count d, Count q, Count v,
                                                      GOptions opt = {}) {
  if (d < 1 || q < 1 || v < 1) throw std::invalid_argument("parameters must be positive");
  ControlReplication out;
  bool have = false;
  for (Count r = 0; r <= d * q / 2; ++r) {
    auto g = g_func(r, d, q, v, opt);
    if (!g) continue;
    out.valid_range.push_back(r);
    out.g_values.emplace_back(r, *g);
    if (!have || *g < out.g_at_R) {
      out.R = r;
      out.g_at_R = *g;
      have = true;
    }
  }
  if (!have) throw std::domain_error("empty valid range: no control replication gives positive denominators");
  return out;
}

// Product design with the E-optimal treatment proportions (1/2 on the
// control, 1/(2v) on each test), or any allocation of the test mass that
// keeps rows at 1/(2v) and columns at s_k/2.
inline ApproxDesign<Rational> e_opt_approx(
    int v, int d, const std::vector<Rational>& block_weights,
    const std::optional<Matrix<Rational>>& test_allocation = std::nullopt) {
  if (v < 1) throw std::invalid_argument("need at least one test treatment");
  if (d < 1 || static_cast<int>(block_weights.size()) != d)
    throw std::invalid_argument("block weight list must have length d");
  Rational s_total(0);
  for (const Rational& s : block_weights) {
    if (!(s > Rational(0))) throw std::invalid_argument("block weights must be positive");
    s_total += s;
  }
  if (s_total != Rational(1)) throw std::invalid_argument("block weights must sum to one");

  Matrix<Rational> alloc(v + 1, d);
  for (int k = 0; k < d; ++k) alloc(0, k) = block_weights[k] / Rational(2);

  if (!test_allocation) {
    for (int i = 1; i <= v; ++i)
      for (int k = 0; k < d; ++k) alloc(i, k) = block_weights[k] / make_rational(2L * v);
    return ApproxDesign<Rational>(std::move(alloc));
  }

  const Matrix<Rational>& tests = *test_allocation;
  std::vector<std::string> violations;
  if (tests.rows() != v || tests.cols() != d) {
    violations.push_back("test allocation must be v x d");
    throw ConstraintViolationError(std::move(violations));
  }
  const Rational row_target = make_rational(1, 2L * v);
  for (int i = 0; i < v; ++i) {
    Rational row(0);
    for (int k = 0; k < d; ++k) {
      if (tests(i, k) < Rational(0))
        violations.push_back("entry (" + std::to_string(i + 1) + "," + std::to_string(k + 1) +
                             ") is negative");
      row += tests(i, k);
    }
    if (row != row_target)
      violations.push_back("row " + std::to_string(i + 1) + " sums to " + to_string(row) +
                           ", expected 1/(2v) = " + to_string(row_target));
  }
  for (int k = 0; k < d; ++k) {
    Rational col(0);
    for (int i = 0; i < v; ++i) col += tests(i, k);
    Rational col_target = block_weights[k] / Rational(2);
    if (col != col_target)
      violations.push_back("column " + std::to_string(k + 1) + " sums to " + to_string(col) +
                           ", expected s_k/2 = " + to_string(col_target));
  }
  if (!violations.empty()) throw ConstraintViolationError(std::move(violations));
  for (int i = 0; i < v; ++i)
    for (int k = 0; k < d; ++k) alloc(i + 1, k) = tests(i, k);
  return ApproxDesign<Rational>(std::move(alloc));
}

// A-optimal treatment proportions 1/(sqrt(v)+1) on the control and
// 1/(sqrt(v)(sqrt(v)+1)) on each test, combined with the given block
// weights as a product design.
inline ApproxDesign<double> a_opt_approx(int v, const std::vector<double>& block_weights) {
  if (v < 1) throw std::invalid_argument("need at least one test treatment");
  const double root = std::sqrt(static_cast<double>(v));
  std::vector<double> r(v + 1, 1.0 / (root * (root + 1.0)));
  r[0] = 1.0 / (root + 1.0);
  return product_design(r, block_weights);
}

// Exact design with half of every block on the control and the other
// half spread round-robin over the test treatments, so each test
// treatment is replicated n/(2v) times. Requires even block sizes and
// v | n/2; otherwise the family is empty for these parameters.
inline ExactDesign e_opt_exact(int v, int d, const std::vector<Count>& m) {
  if (v < 1) throw std::invalid_argument("need at least one test treatment");
  if (d < 1 || static_cast<int>(m.size()) != d)
    throw std::invalid_argument("block size list must have length d");
  Count n = 0;
  for (Count mk : m) {
    if (mk < 1) throw std::invalid_argument("block sizes must be positive");
    if (mk % 2 != 0)
      throw FamilyEmptyError("block size " + std::to_string(mk) +
                             " is odd; no design assigns half of every block to the control");
    n += mk;
  }
  if ((n / 2) % v != 0)
    throw FamilyEmptyError("n/2 = " + std::to_string(n / 2) + " is not divisible by v = " +
                           std::to_string(v) + "; tests cannot be equireplicated");
  Matrix<Count> alloc(v + 1, d);
  int cursor = 1;
  for (int k = 0; k < d; ++k) {
    alloc(0, k) = m[k] / 2;
    for (Count slot = 0; slot < m[k] / 2; ++slot) {
      alloc(cursor, k) += 1;
      cursor = cursor % v + 1;
    }
  }
  return ExactDesign(m, std::move(alloc));
}

struct ConditionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConditionReport {
  Family family = Family::Thm1;
  bool satisfied = false;
  std::vector<ConditionCheck> checks;
  std::optional<Count> thm5_R;

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.detail.empty() ? c.name : c.name + ": " + c.detail);
    return out;
  }
};

namespace detail {

inline void finish(ConditionReport& rep) {
  rep.satisfied = true;
  for (const auto& c : rep.checks) rep.satisfied = rep.satisfied && c.passed;
}

template <typename D>
void check_concurrence_balance(const D& design, ConditionReport& rep, bool include_tests) {
  const int v = design.v();
  bool control_equal = true;
  auto mu01 = concurrence(design, 0, 1);
  for (int j = 2; j <= v; ++j)
    if (!(concurrence(design, 0, j) == mu01)) control_equal = false;
  bool tests_equal = true;
  if (include_tests && v >= 2) {
    auto mu12 = concurrence(design, 1, 2);
    for (int i = 1; i <= v && tests_equal; ++i)
      for (int j = i + 1; j <= v; ++j)
        if (!(concurrence(design, i, j) == mu12)) {
          tests_equal = false;
          break;
        }
  }
  if (include_tests)
    rep.checks.push_back({"btib_balance", control_equal && tests_equal,
                          control_equal && tests_equal
                              ? ""
                              : "concurrences are not balanced (mu_0i all equal and mu_ij all equal required)"});
  else
    rep.checks.push_back({"equal_control_concurrences", control_equal,
                          control_equal ? "" : "control-test concurrences mu_0i differ"});
}

inline Count equal_block_size_or_throw(const ExactDesign& design, Family family) {
  const auto& m = design.block_sizes();
  for (Count mk : m)
    if (mk != m.front())
      throw std::invalid_argument(std::string(family_name(family)) +
                                  " conditions require equal block sizes");
  return m.front();
}

}  // namespace detail

// Exact conditions for membership in the exact-design families. Thm1 is
// the approximate family; use the overload below.
inline ConditionReport verify_conditions(const ExactDesign& design, Family family,
                                         GOptions opt = {}) {
  ConditionReport rep;
  rep.family = family;
  const int v = design.v();
  const int d = design.d();
  const auto& m = design.block_sizes();

  switch (family) {
    case Family::Thm1:
      throw std::invalid_argument("thm1 conditions apply to approximate designs");

    case Family::Thm3: {
      bool half = true;
      for (int k = 0; k < d; ++k)
        if (2 * design(0, k) != m[k]) half = false;
      rep.checks.push_back({"control_half_block", half,
                            half ? "" : "control row must equal m_k/2 in every block"});
      auto sum = summarize(design);
      bool equirep = true;
      for (int i = 2; i <= v; ++i)
        if (sum.replications[i] != sum.replications[1]) equirep = false;
      rep.checks.push_back({"equireplicated_tests", equirep,
                            equirep ? "" : "test treatments are not equally replicated"});
      break;
    }

    case Family::Prop1: {
      Count q = detail::equal_block_size_or_throw(design, family);
      bool row_ok = true;
      for (int k = 0; k < d; ++k) {
        Count x = design(0, k);
        bool ok = q % 2 == 0 ? x == q / 2 : (x == q / 2 || x == q / 2 + 1);
        row_ok = row_ok && ok;
      }
      rep.checks.push_back({"control_row_floor", row_ok,
                            row_ok ? ""
                                   : "control row must be q/2 (even q) or floor(q/2)/floor(q/2)+1 (odd q)"});
      detail::check_concurrence_balance(design, rep, false);
      break;
    }

    case Family::Thm5_BTIB: {
      Count q = detail::equal_block_size_or_throw(design, family);
      bool binary = true;
      for (int i = 1; i <= v; ++i)
        for (int k = 0; k < d; ++k)
          if (design(i, k) > 1) binary = false;
      rep.checks.push_back(
          {"binary_tests", binary, binary ? "" : "test treatments must appear at most once per block"});
      try {
        ControlReplication ctrl = optimal_control_replication(d, q, v, opt);
        rep.thm5_R = ctrl.R;
        Count total = 0;
        for (int k = 0; k < d; ++k) total += design(0, k);
        bool total_ok = total == ctrl.R;
        rep.checks.push_back({"control_total_R", total_ok,
                              total_ok ? ""
                                       : "control replication " + std::to_string(total) +
                                             " differs from R = " + std::to_string(ctrl.R)});
        Count f = ctrl.R / d;
        bool row_ok = true;
        for (int k = 0; k < d; ++k) {
          Count x = design(0, k);
          if (x != f && x != f + 1) row_ok = false;
        }
        rep.checks.push_back({"control_row_floor", row_ok,
                              row_ok ? ""
                                     : "control row entries must be floor(R/d) or floor(R/d)+1"});
      } catch (const std::domain_error& e) {
        rep.checks.push_back({"control_total_R", false, e.what()});
        rep.checks.push_back({"control_row_floor", false, e.what()});
      }
      detail::check_concurrence_balance(design, rep, true);
      break;
    }
  }
  detail::finish(rep);
  return rep;
}

inline ConditionReport verify_conditions(const ApproxDesign<Rational>& design, Family family) {
  if (family != Family::Thm1)
    throw std::invalid_argument(std::string(family_name(family)) +
                                " conditions apply to exact designs");
  ConditionReport rep;
  rep.family = family;
  auto sum = summarize(design);
  bool half = true;
  for (int k = 0; k < design.d(); ++k)
    if (Rational(2) * design(0, k) != sum.block_sizes[k]) half = false;
  rep.checks.push_back({"control_half_block", half,
                        half ? "" : "control row must equal s_k/2 in every block"});
  const Rational target = make_rational(1, 2L * design.v());
  bool equirep = true;
  for (int i = 1; i <= design.v(); ++i)
    if (sum.replications[i] != target) equirep = false;
  rep.checks.push_back({"equireplicated_tests", equirep,
                        equirep ? "" : "every test replication must equal 1/(2v)"});
  detail::finish(rep);
  return rep;
}

// Backtracking search for the colexicographically first member of a
// family inside D(v,d,m), with optional exact criterion target.
inline std::optional<ExactDesign> search_exact(
    int v, int d, const std::vector<Count>& m, Family family,
    std::optional<std::pair<Criterion, Rational>> target = std::nullopt,
    long long budget = 10'000'000, GOptions opt = {}) {
  if (family == Family::Thm1) throw std::invalid_argument("search_exact builds exact designs only");
  if (v < 1 || d < 1 || static_cast<int>(m.size()) != d)
    throw std::invalid_argument("invalid search space parameters");

  mpz_class total(1);
  for (Count mk : m) {
    mpz_class count;
    mpz_bin_uiui(count.get_mpz_t(), static_cast<unsigned long>(mk + v), static_cast<unsigned long>(v));
    total *= count;
  }
  if (total > mpz_class(static_cast<long>(budget)))
    throw BudgetExceededError("design space has " + total.get_str() + " members, budget is " +
                              std::to_string(budget));

  // Family-specific structure used for pruning only; leaves are always
  // validated through verify_conditions.
  std::optional<Count> thm5_R;
  if (family == Family::Thm5_BTIB) {
    for (Count mk : m)
      if (mk != m.front()) throw std::invalid_argument("thm5 conditions require equal block sizes");
    try {
      thm5_R = optimal_control_replication(d, m.front(), v, opt).R;
    } catch (const std::domain_error&) {
      return std::nullopt;  // no admissible control replication: family empty
    }
  }
  if (family == Family::Prop1)
    for (Count mk : m)
      if (mk != m.front()) throw std::invalid_argument("prop1 conditions require equal block sizes");

  auto allowed_control = [&](Count mk) {
    std::vector<Count> out;
    switch (family) {
      case Family::Thm3:
        if (mk % 2 == 0) out.push_back(mk / 2);
        break;
      case Family::Prop1: {
        Count q = mk;
        if (q % 2 == 0)
          out.push_back(q / 2);
        else {
          out.push_back(q / 2);
          out.push_back(q / 2 + 1);
        }
        break;
      }
      case Family::Thm5_BTIB: {
        Count f = *thm5_R / d;
        for (Count c : {f, f + 1})
          if (c >= 0 && c <= mk) out.push_back(c);
        break;
      }
      case Family::Thm1:
        break;
    }
    std::erase_if(out, [&](Count c) { return c > mk; });
    return out;
  };

  const bool binary = family == Family::Thm5_BTIB;
  Count n = 0;
  for (Count mk : m) n += mk;
  std::optional<Count> test_cap;
  if (family == Family::Thm3 && n % (2 * v) == 0) test_cap = n / 2 / v;

  // Per-column candidate compositions (control value, test rows) in
  // colexicographic order of the full column tuple.
  std::vector<std::vector<std::vector<Count>>> columns(d);
  for (int k = 0; k < d; ++k) {
    std::vector<Count> col(v + 1, 0);
    std::function<void(int, Count)> gen = [&](int row, Count left) {
      if (row == 0) {
        for (Count c : allowed_control(m[k]))
          if (c == left) {
            col[0] = c;
            columns[k].push_back(col);
          }
        return;
      }
      Count cap = binary ? std::min<Count>(1, left) : left;
      if (test_cap) cap = std::min(cap, *test_cap);
      for (Count t = 0; t <= cap; ++t) {
        col[row] = t;
        gen(row - 1, left - t);
      }
      col[row] = 0;
    };
    gen(v, m[k]);
    // generation above assigns the last test row first, which yields
    // colex-ascending column tuples already
  }

  Matrix<Count> alloc(v + 1, d);
  std::vector<Count> row_sum(v + 1, 0);
  Count control_sum = 0;
  long long visited = 0;

  std::function<std::optional<ExactDesign>(int)> dfs =
      [&](int k) -> std::optional<ExactDesign> {
    if (k == d) {
      if (++visited > budget) throw BudgetExceededError("search visited more leaves than the budget allows");
      ExactDesign candidate(m, alloc);
      ConditionReport rep = verify_conditions(candidate, family, opt);
      if (!rep.satisfied) return std::nullopt;
      if (target) {
        if (target->first == Criterion::E) {
          if (!is_feasible(candidate).feasible ||
              !is_exact_lambda_min(contrast_info(candidate), target->second))
            return std::nullopt;
        } else {
          CriterionValue val = evaluate(candidate, target->first);
          if (!val.feasible || !val.exact || *val.exact != target->second) return std::nullopt;
        }
      }
      return candidate;
    }
    for (const auto& col : columns[k]) {
      bool ok = true;
      for (int i = 1; i <= v && ok; ++i)
        if (test_cap && row_sum[i] + col[i] > *test_cap) ok = false;
      if (thm5_R) {
        Count after = control_sum + col[0];
        Count remaining = d - k - 1;
        Count f = *thm5_R / d;
        if (after + remaining * f > *thm5_R || after + remaining * (f + 1) < *thm5_R) ok = false;
      }
      if (!ok) continue;
      for (int i = 0; i <= v; ++i) {
        alloc(i, k) = col[i];
        row_sum[i] += col[i];
      }
      control_sum += col[0];
      auto hit = dfs(k + 1);
      control_sum -= col[0];
      for (int i = 0; i <= v; ++i) {
        row_sum[i] -= col[i];
        alloc(i, k) = 0;
      }
      if (hit) return hit;
    }
    return std::nullopt;
  };
  return dfs(0);
}

}  // namespace tcdesign
