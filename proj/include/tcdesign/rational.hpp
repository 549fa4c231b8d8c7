#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcdesign {

// Exact arithmetic scalar used throughout the certification paths.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

inline double to_double(const Rational& q) { return q.get_d(); }

// Canonical text form: "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& q) { return q.get_str(); }

// Parses "p" or "p/q" in base 10. Rejects empty strings, whitespace and
// zero denominators before GMP ever divides by them.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  std::size_t i = 0;
  auto scan_int = [&](const char* what) {
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (i == start)
      throw std::invalid_argument(std::string("invalid rational literal, expected ") + what +
                                  " in '" + text + "'");
  };
  scan_int("numerator");
  if (i < text.size()) {
    if (text[i] != '/')
      throw std::invalid_argument("invalid rational literal '" + text + "'");
    ++i;
    scan_int("denominator");
    if (i != text.size())
      throw std::invalid_argument("invalid rational literal '" + text + "'");
  }
  Rational q;
  if (q.set_str(text, 10) != 0)
    throw std::invalid_argument("invalid rational literal '" + text + "'");
  if (q.get_den() == 0)
    throw std::invalid_argument("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
  return Rational(x);
}

// Continued-fraction convergents of x, in order of increasing denominator.
// Used to recover small-denominator eigenvalues from floating-point
// approximations; callers must verify any candidate exactly.
inline std::vector<Rational> convergents(double x, unsigned long max_den = 100000000UL) {
  std::vector<Rational> out;
  if (!std::isfinite(x) || std::fabs(x) > 1e15) return out;
  mpz_class p_prev(1), q_prev(0);
  mpz_class p_cur, q_cur(1);
  long double y = x;
  long double a = std::floor(y);
  p_cur = static_cast<long>(a);
  for (int iter = 0; iter < 64; ++iter) {
    out.emplace_back(p_cur, q_cur);
    out.back().canonicalize();
    long double frac = y - a;
    if (frac < 1e-18L) break;
    y = 1.0L / frac;
    a = std::floor(y);
    if (a > 1e18L) break;
    mpz_class ai(static_cast<long>(a));
    mpz_class p_next = ai * p_cur + p_prev;
    mpz_class q_next = ai * q_cur + q_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    if (q_cur > max_den) break;
  }
  return out;
}

}  // namespace tcdesign
