#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cp {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational pow2(long e) {
  Rational q(1);
  if (e >= 0)
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  return q;
}

inline Rational mul_pow2(const Rational& x, long e) {
  Rational r;
  if (e >= 0)
    mpq_mul_2exp(r.get_mpq_t(), x.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpq_div_2exp(r.get_mpq_t(), x.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  return r;
}

inline Rational rabs(const Rational& x) { return sgn(x) < 0 ? Rational(-x) : x; }

inline long bit_length(const Integer& n) {
  if (sgn(n) == 0) return 0;
  return static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2));
}

// largest e with 2^e <= x, x > 0
inline long floor_log2(const Rational& x) {
  if (sgn(x) <= 0) throw std::domain_error("floor_log2 of non-positive value");
  const Integer& n = x.get_num();
  const Integer& d = x.get_den();
  long e = bit_length(n) - bit_length(d);
  // x lies in [2^(e-1), 2^(e+1))
  if (x < pow2(e)) --e;
  return e;
}

// smallest e with x <= 2^e, x > 0
inline long ceil_log2(const Rational& x) {
  long e = floor_log2(x);
  if (x == pow2(e)) return e;
  return e + 1;
}

inline bool is_power_of_two(const Rational& x) {
  return sgn(x) > 0 && x == pow2(floor_log2(x));
}

inline bool is_dyadic(const Rational& x) {
  const Integer& d = x.get_den();
  return mpz_popcount(d.get_mpz_t()) == 1;
}

inline Integer floor_div(const Rational& x) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

inline Integer ceil_div(const Rational& x) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accepts "p", "p/q", or a decimal "[-]d.ddd[e[+-]n]". Decimals must be dyadic.
inline Rational parse_rational(std::string_view text, bool require_dyadic = false) {
  std::string s(text);
  auto trim = [](std::string& t) {
    auto b = t.find_first_not_of(" \t\r\n");
    auto e = t.find_last_not_of(" \t\r\n");
    t = (b == std::string::npos) ? std::string() : t.substr(b, e - b + 1);
  };
  trim(s);
  if (s.empty()) throw ParseError("empty number");
  Rational q;
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Integer n(s.substr(0, slash), 10), d(s.substr(slash + 1), 10);
      if (d == 0) throw ParseError("zero denominator in '" + s + "'");
      q = Rational(n, d);
      q.canonicalize();
    } else {
      std::string mant = s;
      long exp10 = 0;
      auto epos = s.find_first_of("eE");
      if (epos != std::string::npos) {
        mant = s.substr(0, epos);
        exp10 = std::stol(s.substr(epos + 1));
      }
      bool neg = false;
      if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        neg = mant[0] == '-';
        mant = mant.substr(1);
      }
      auto dot = mant.find('.');
      std::string digits = mant;
      if (dot != std::string::npos) {
        digits = mant.substr(0, dot) + mant.substr(dot + 1);
        exp10 -= static_cast<long>(mant.size() - dot - 1);
      }
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("malformed number '" + s + "'");
      Integer n(digits, 10);
      Integer p10;
      mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
      q = exp10 >= 0 ? Rational(n * p10) : Rational(n, p10);
      q.canonicalize();
      if (neg) q = -q;
    }
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed number '" + s + "'");
  }
  if (require_dyadic && !is_dyadic(q))
    throw ParseError("'" + s + "' is not a dyadic rational");
  return q;
}

}  // namespace cp
