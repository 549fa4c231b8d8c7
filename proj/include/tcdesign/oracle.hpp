#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tcdesign/constructors.hpp"
#include "tcdesign/criteria.hpp"
#include "tcdesign/design.hpp"
#include "tcdesign/errors.hpp"
#include "tcdesign/info_matrix.hpp"

namespace tcdesign {

// Fixed 64-bit generator (splitmix64) so sampled designs are identical
// on every platform; no entropy source is ever consulted.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Independent child stream; makes seeding splittable across tasks.
  SplitMix64 split() { return SplitMix64(next_u64()); }

 private:
  std::uint64_t state_;
};

struct EnumerationSpace {
  int v = 0;
  int d = 0;
  std::vector<Count> m;
  std::vector<mpz_class> per_column;  // C(m_k + v, v)
  mpz_class total;                    // product over columns
};

inline EnumerationSpace enumeration_space(int v, int d, const std::vector<Count>& m) {
  if (v < 1 || d < 1 || static_cast<int>(m.size()) != d)
    throw std::invalid_argument("invalid enumeration parameters");
  EnumerationSpace space;
  space.v = v;
  space.d = d;
  space.m = m;
  space.total = 1;
  for (Count mk : m) {
    if (mk < 1) throw std::invalid_argument("block sizes must be positive");
    mpz_class count;
    mpz_bin_uiui(count.get_mpz_t(), static_cast<unsigned long>(mk + v),
                 static_cast<unsigned long>(v));
    space.per_column.push_back(count);
    space.total *= count;
  }
  return space;
}

namespace detail {

// All compositions of total into parts non-negative integers, in
// colexicographic order of the part tuple.
inline std::vector<std::vector<Count>> compositions(Count total, int parts) {
  std::vector<std::vector<Count>> out;
  std::vector<Count> cur(parts, 0);
  std::function<void(int, Count)> gen = [&](int idx, Count left) {
    if (idx == 0) {
      cur[0] = left;
      out.push_back(cur);
      return;
    }
    for (Count t = 0; t <= left; ++t) {
      cur[idx] = t;
      gen(idx - 1, left - t);
    }
    cur[idx] = 0;
  };
  gen(parts - 1, total);
  return out;
}

}  // namespace detail

// Streams every member of D(v,d,m) exactly once. Column compositions
// advance odometer-style with column 1 varying fastest, compositions
// within a column in colexicographic order; this is the canonical order
// used for all reported optimizer sets.
class DesignEnumerator {
 public:
  DesignEnumerator(int v, int d, std::vector<Count> m, long long budget = 10'000'000)
      : space_(enumeration_space(v, d, m)) {
    if (space_.total > mpz_class(static_cast<long>(budget)))
      throw BudgetExceededError("design space has " + space_.total.get_str() +
                                " members, budget is " + std::to_string(budget));
    for (Count mk : space_.m) {
      auto [it, inserted] = comps_by_size_.try_emplace(mk);
      if (inserted) it->second = detail::compositions(mk, v + 1);
    }
    index_.assign(d, 0);
  }

  const EnumerationSpace& space() const { return space_; }

  std::optional<ExactDesign> next() {
    if (done_) return std::nullopt;
    Matrix<Count> alloc(space_.v + 1, space_.d);
    for (int k = 0; k < space_.d; ++k) {
      const auto& col = comps_by_size_.at(space_.m[k])[index_[k]];
      for (int i = 0; i <= space_.v; ++i) alloc(i, k) = col[i];
    }
    // advance odometer, first column fastest
    int k = 0;
    while (k < space_.d) {
      if (++index_[k] < comps_by_size_.at(space_.m[k]).size()) break;
      index_[k] = 0;
      ++k;
    }
    if (k == space_.d) done_ = true;
    return ExactDesign(space_.m, std::move(alloc));
  }

 private:
  EnumerationSpace space_;
  std::map<Count, std::vector<std::vector<Count>>> comps_by_size_;
  std::vector<std::size_t> index_;
  bool done_ = false;
};

template <typename Fn>
void for_each_design(int v, int d, const std::vector<Count>& m, long long budget, Fn&& fn) {
  DesignEnumerator en(v, d, m, budget);
  while (auto design = en.next()) fn(*design);
}

// Outcome of an exhaustive optimization over D(v,d,m). The optimum and
// membership of the optimizer set are exact rational statements; for the
// E criterion floating point only pre-screens candidates, every claim is
// re-verified in rational arithmetic.
struct Optimum {
  Criterion criterion = Criterion::A;
  int v = 0;
  int d = 0;
  std::vector<Count> m;
  std::optional<Rational> value;
  double value_double = 0;
  std::vector<ExactDesign> optimizers;  // canonical enumeration order
  long long optimizer_count = 0;
  long long feasible_count = 0;
  long long design_count = 0;
  std::string note;
};

inline Optimum brute_force_optimum(int v, int d, const std::vector<Count>& m,
                                   Criterion criterion, long long budget = 10'000'000) {
  if (criterion == Criterion::C)
    throw std::invalid_argument("c-optimality takes a contrast vector; brute force supports A, MV, E, R, phiR and varcov");
  Optimum out;
  out.criterion = criterion;
  out.v = v;
  out.d = d;
  out.m = m;

  if (criterion == Criterion::PhiR) {
    // maximizing phiR is minimizing the diagonal product, so the R route
    // carries the optimizer set; the optimum itself is exact only when
    // the v-th root is rational
    Optimum via_r = brute_force_optimum(v, d, m, Criterion::R, budget);
    out.optimizers = std::move(via_r.optimizers);
    out.optimizer_count = via_r.optimizer_count;
    out.feasible_count = via_r.feasible_count;
    out.design_count = via_r.design_count;
    if (via_r.value) {
      CriterionValue phi = evaluate(out.optimizers.front(), Criterion::PhiR);
      out.value = phi.exact;
      out.value_double = phi.value;
      if (!phi.exact) out.note = "phiR optimum has no exact rational root; reported in floating point";
    }
    return out;
  }

  if (criterion != Criterion::E) {
    std::optional<Rational> best;
    for_each_design(v, d, m, budget, [&](const ExactDesign& design) {
      ++out.design_count;
      CriterionValue val = evaluate(design, criterion);
      if (!val.feasible) return;
      ++out.feasible_count;
      if (!val.exact) throw std::logic_error("exact criterion value missing in rational mode");
      if (!best || *val.exact < *best) {
        best = *val.exact;
        out.optimizers.clear();
        out.optimizers.push_back(design);
      } else if (*val.exact == *best) {
        out.optimizers.push_back(design);
      }
    });
    out.value = best;
    if (best) out.value_double = to_double(*best);
    out.optimizer_count = static_cast<long long>(out.optimizers.size());
    return out;
  }

  // E criterion: maximize lambda_min(N). Floating pass collects
  // near-optimal candidates, rational reconstruction pins the optimum,
  // and an exact second pass certifies the bound and the optimizer set.
  double best_float = -1;
  std::vector<std::pair<ExactDesign, double>> candidates;
  for_each_design(v, d, m, budget, [&](const ExactDesign& design) {
    ++out.design_count;
    if (!is_feasible(design).feasible) return;
    ++out.feasible_count;
    double lmin = spectrum(to_double(contrast_info(design))).lambda_min;
    if (lmin > best_float) {
      best_float = lmin;
      std::erase_if(candidates, [&](const auto& c) { return c.second < best_float - 1e-6; });
    }
    if (lmin >= best_float - 1e-6) candidates.emplace_back(design, lmin);
  });
  if (out.feasible_count == 0) {
    out.note = "no feasible design in the space";
    return out;
  }

  std::optional<Rational> best_exact;
  for (const auto& [design, lmin] : candidates) {
    Matrix<Rational> n = contrast_info(design);
    if (auto exact = exact_lambda_min(n, lmin))
      if (!best_exact || *exact > *best_exact) best_exact = *exact;
  }
  if (!best_exact) {
    out.value_double = 1.0 / best_float;
    out.note = "optimal lambda_min has no small rational form; optimum reported in floating point";
    for (const auto& [design, lmin] : candidates)
      if (lmin >= best_float - 1e-12) out.optimizers.push_back(design);
    out.optimizer_count = static_cast<long long>(out.optimizers.size());
    return out;
  }

  const Rational lambda_star = *best_exact;
  bool beaten = false;
  for_each_design(v, d, m, budget, [&](const ExactDesign& design) {
    if (beaten || !is_feasible(design).feasible) return;
    Matrix<Rational> n = contrast_info(design);
    Matrix<Rational> shifted = n;
    for (int i = 0; i < n.rows(); ++i) shifted(i, i) -= lambda_star;
    if (is_positive_definite(shifted)) {
      // a design strictly beats the reconstructed value: the optimum is
      // irrational and larger; certify in floating point only
      beaten = true;
      return;
    }
    if (is_positive_semidefinite(shifted)) out.optimizers.push_back(design);
  });
  if (beaten) {
    out.optimizers.clear();
    out.optimizer_count = 0;
    out.value_double = 1.0 / best_float;
    out.note = "a design exceeds every reconstructed rational bound; optimum reported in floating point";
    return out;
  }
  // reported value is the E criterion itself, 1/lambda_min
  out.value = Rational(1) / lambda_star;
  out.value_double = to_double(*out.value);
  out.optimizer_count = static_cast<long long>(out.optimizers.size());
  out.note = "lambda_min optimum " + to_string(lambda_star);
  return out;
}

// Deterministic feasible approximate design; rejection-samples until the
// treatment-block graph is connected (at most 1000 attempts).
inline ApproxDesign<double> random_feasible_approx(int v, int d, std::uint64_t seed) {
  if (v < 1 || d < 1) throw std::invalid_argument("need v >= 1 and d >= 1");
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix<double> alloc(v + 1, d);
    double total = 0;
    for (int i = 0; i <= v; ++i)
      for (int k = 0; k < d; ++k) {
        double u = rng.next_unit();
        alloc(i, k) = u;
        total += u;
      }
    if (total <= 0) continue;
    for (int i = 0; i <= v; ++i)
      for (int k = 0; k < d; ++k) alloc(i, k) /= total;
    try {
      ApproxDesign<double> design(std::move(alloc));
      if (is_feasible(design).feasible) return design;
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw std::runtime_error("could not sample a feasible design in 1000 attempts");
}

enum class Claim { E_opt_exact, VarCovSum_min, A_opt_is_R_opt, E_opt_c_opt, Prop1_E_opt };

inline const char* claim_name(Claim c) {
  switch (c) {
    case Claim::E_opt_exact: return "e-exact";
    case Claim::VarCovSum_min: return "varcov";
    case Claim::A_opt_is_R_opt: return "a-implies-r";
    case Claim::E_opt_c_opt: return "e-c";
    case Claim::Prop1_E_opt: return "prop1";
  }
  return "?";
}

struct Certificate {
  Claim claim = Claim::E_opt_exact;
  int v = 0;
  int d = 0;
  std::vector<Count> m;
  std::optional<Rational> optimum;
  long long optimizer_count = 0;
  std::optional<ExactDesign> first_optimizer;
  bool holds = false;
  bool vacuous = false;
  double wall_time_seconds = 0;
  std::map<std::string, std::string> extra;
  std::string note;
};

struct CertifyOptions {
  std::uint64_t seed = 0;
  int samples = 1000;
  long long budget = 10'000'000;
  GOptions g_options;
};

namespace detail {

inline bool attains(const ExactDesign& design, Criterion crit, const Rational& optimum) {
  CriterionValue val = evaluate(design, crit);
  return val.feasible && val.exact && *val.exact == optimum;
}

inline bool attains_e(const ExactDesign& design, const Rational& e_optimum) {
  if (!is_feasible(design).feasible) return false;
  return is_exact_lambda_min(contrast_info(design), Rational(1) / e_optimum);
}

}  // namespace detail

// Exhaustive certification of one optimality claim on a small instance.
// All equalities are decided in exact rational arithmetic.
inline Certificate certify(Claim claim, int v, int d, const std::vector<Count>& m,
                           CertifyOptions opt = {}) {
  auto start = std::chrono::steady_clock::now();
  Certificate cert;
  cert.claim = claim;
  cert.v = v;
  cert.d = d;
  cert.m = m;

  auto finish = [&]() -> Certificate& {
    cert.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cert;
  };
  auto fill_optimizers = [&](const Optimum& o) {
    cert.optimizer_count = o.optimizer_count;
    if (!o.optimizers.empty()) cert.first_optimizer = o.optimizers.front();
  };

  switch (claim) {
    case Claim::E_opt_exact: {
      std::optional<ExactDesign> constructed;
      try {
        constructed = e_opt_exact(v, d, m);
      } catch (const FamilyEmptyError& e) {
        cert.vacuous = true;
        cert.holds = true;
        cert.note = std::string("family empty: ") + e.what();
        return finish();
      }
      Optimum e_opt = brute_force_optimum(v, d, m, Criterion::E, opt.budget);
      cert.optimum = e_opt.value;
      fill_optimizers(e_opt);
      if (!e_opt.value) {
        cert.note = e_opt.note;
        return finish();
      }
      Rational lambda_star = Rational(1) / *e_opt.value;
      cert.extra["lambda_min_optimum"] = to_string(lambda_star);
      cert.extra["theory_lambda_min"] = to_string(make_rational(constructed->n(), 4L * v));
      cert.holds = detail::attains_e(*constructed, *e_opt.value);
      return finish();
    }

    case Claim::VarCovSum_min: {
      Optimum vcs = brute_force_optimum(v, d, m, Criterion::VarCovSum, opt.budget);
      Optimum e_opt = brute_force_optimum(v, d, m, Criterion::E, opt.budget);
      cert.optimum = vcs.value;
      fill_optimizers(vcs);
      if (!vcs.value || !e_opt.value) {
        cert.note = "no feasible design in the space";
        return finish();
      }
      bool equal_blocks = std::all_of(m.begin(), m.end(), [&](Count mk) { return mk == m.front(); });
      Family cond = equal_blocks ? Family::Prop1 : Family::Thm3;
      long long members = 0;
      bool all_attain = true;
      for (const ExactDesign& design : e_opt.optimizers) {
        if (!verify_conditions(design, cond).satisfied) continue;
        ++members;
        all_attain = all_attain && detail::attains(design, Criterion::VarCovSum, *vcs.value);
      }
      cert.extra["family"] = family_name(cond);
      cert.extra["family_members_among_e_optima"] = std::to_string(members);
      cert.extra["e_optimum"] = to_string(*e_opt.value);
      if (members == 0) {
        cert.vacuous = true;
        cert.holds = true;
        cert.note = "no E-optimal design satisfies the family conditions";
      } else {
        cert.holds = all_attain;
      }
      return finish();
    }

    case Claim::A_opt_is_R_opt: {
      for (Count mk : m)
        if (mk != m.front()) throw std::invalid_argument("a-implies-r needs equal block sizes");
      Optimum a_opt = brute_force_optimum(v, d, m, Criterion::A, opt.budget);
      Optimum r_opt = brute_force_optimum(v, d, m, Criterion::R, opt.budget);
      cert.optimum = r_opt.value;
      fill_optimizers(r_opt);
      if (!a_opt.value || !r_opt.value) {
        cert.note = "no feasible design in the space";
        return finish();
      }
      cert.extra["a_optimum"] = to_string(*a_opt.value);
      cert.extra["r_optimum"] = to_string(*r_opt.value);
      ControlReplication ctrl = optimal_control_replication(d, m.front(), v, opt.g_options);
      cert.extra["R"] = std::to_string(ctrl.R);
      cert.extra["g_at_R"] = to_string(ctrl.g_at_R);
      long long members = 0;
      bool all_r_optimal = true;
      for (const ExactDesign& design : a_opt.optimizers) {
        if (!verify_conditions(design, Family::Thm5_BTIB, opt.g_options).satisfied) continue;
        ++members;
        all_r_optimal = all_r_optimal && detail::attains(design, Criterion::R, *r_opt.value);
      }
      cert.extra["thm5_members_among_a_optima"] = std::to_string(members);
      if (members == 0) {
        cert.vacuous = true;
        cert.holds = true;
        cert.note = "no A-optimal design satisfies the thm5 conditions";
      } else {
        cert.holds = all_r_optimal;
      }
      return finish();
    }

    case Claim::E_opt_c_opt: {
      std::vector<Rational> contrast(v + 1, make_rational(1, v));
      contrast[0] = Rational(-1);
      std::optional<Rational> best;
      for_each_design(v, d, m, opt.budget, [&](const ExactDesign& design) {
        if (!is_feasible(design).feasible) return;
        CriterionValue val = c_value(normalize(design), contrast);
        if (!val.exact) throw std::logic_error("exact c-value missing in rational mode");
        if (!best || *val.exact < *best) best = *val.exact;
      });
      if (!best) {
        cert.note = "no feasible design in the space";
        return finish();
      }
      cert.optimum = best;
      long long thm1_members = 0;
      bool attainers_are_thm1 = true;
      bool thm1_attain = true;
      std::optional<ExactDesign> witness;
      long long attainer_count = 0;
      for_each_design(v, d, m, opt.budget, [&](const ExactDesign& design) {
        if (!is_feasible(design).feasible) return;
        ApproxDesign<Rational> approx = normalize(design);
        CriterionValue val = c_value(approx, contrast);
        bool thm1 = verify_conditions(approx, Family::Thm1).satisfied;
        bool attains_min = *val.exact == *best;
        if (thm1) {
          ++thm1_members;
          thm1_attain = thm1_attain && attains_min;
        }
        if (attains_min) {
          ++attainer_count;
          if (!witness) witness = design;
          attainers_are_thm1 = attainers_are_thm1 && thm1;
        }
      });
      cert.optimizer_count = attainer_count;
      if (witness) cert.first_optimizer = witness;
      double best_double = to_double(*best);
      bool random_above = true;
      SplitMix64 rng(opt.seed);
      for (int i = 0; i < opt.samples; ++i) {
        ApproxDesign<double> sample = random_feasible_approx(v, d, rng.next_u64());
        std::vector<double> cd(v + 1, 1.0 / v);
        cd[0] = -1.0;
        CriterionValue val = c_value(sample, cd);
        if (val.value < best_double - 1e-9) random_above = false;
      }
      cert.extra["thm1_members"] = std::to_string(thm1_members);
      cert.extra["random_samples"] = std::to_string(opt.samples);
      if (thm1_members == 0) {
        cert.vacuous = true;
        cert.holds = attainers_are_thm1 && random_above;
        cert.note = "no normalized design satisfies the thm1 conditions";
      } else {
        cert.holds = thm1_attain && attainers_are_thm1 && random_above;
      }
      return finish();
    }

    case Claim::Prop1_E_opt: {
      for (Count mk : m)
        if (mk != m.front()) throw std::invalid_argument("prop1 certification needs equal block sizes");
      Optimum e_opt = brute_force_optimum(v, d, m, Criterion::E, opt.budget);
      Optimum vcs = brute_force_optimum(v, d, m, Criterion::VarCovSum, opt.budget);
      cert.optimum = e_opt.value;
      fill_optimizers(e_opt);
      if (!e_opt.value) {
        cert.note = e_opt.note;
        return finish();
      }
      if (vcs.value) cert.extra["varcovsum_minimum"] = to_string(*vcs.value);
      cert.extra["lambda_min_optimum"] = to_string(Rational(1) / *e_opt.value);
      long long members = 0;
      bool all_optimal = true;
      for_each_design(v, d, m, opt.budget, [&](const ExactDesign& design) {
        if (!verify_conditions(design, Family::Prop1).satisfied) return;
        if (!is_feasible(design).feasible) return;
        ++members;
        all_optimal = all_optimal && detail::attains_e(design, *e_opt.value);
      });
      cert.extra["prop1_members"] = std::to_string(members);
      if (members == 0) {
        cert.vacuous = true;
        cert.holds = true;
        cert.note = "no design in the space satisfies the prop1 conditions";
      } else {
        cert.holds = all_optimal;
      }
      return finish();
    }
  }
  return finish();
}

}  // namespace tcdesign
