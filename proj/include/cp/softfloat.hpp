#pragma once

#include "cp/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cp {

// F_{L,K}: radix 2, L fraction bits behind an explicit leading bit, exponent
// e in [1 - 2^(K-1), 2^(K-1)], gradual underflow below 2^emin.
struct Format {
  int L = 23;
  int K = 8;

  static constexpr int max_K = 62;

  long emin() const { return 1 - (1L << (std::min(K, max_K) - 1)); }
  long emax() const { return 1L << (std::min(K, max_K) - 1); }
  // (2 - 2^-L) * 2^emax
  Rational max_value() const { return (Rational(2) - pow2(-L)) * pow2(emax()); }
  Rational min_normal() const { return pow2(emin()); }
  Rational min_subnormal() const { return pow2(emin() - L); }

  friend bool operator==(const Format&, const Format&) = default;
};

enum class RangeKind { Overflow, Underflow, DivisionByZero };

inline const char* to_string(RangeKind k) {
  switch (k) {
    case RangeKind::Overflow: return "overflow";
    case RangeKind::Underflow: return "underflow";
    case RangeKind::DivisionByZero: return "division by zero";
  }
  return "?";
}

struct RangeError : std::runtime_error {
  RangeKind kind;
  std::string source_op;
  RangeError(RangeKind k, std::string op, const std::string& hint)
      : std::runtime_error(op + ": " + to_string(k) + (hint.empty() ? "" : " (" + hint + ")")),
        kind(k),
        source_op(std::move(op)) {}
};

struct DivisionByZero : RangeError {
  explicit DivisionByZero(std::string op) : RangeError(RangeKind::DivisionByZero, std::move(op), "") {}
};

enum class Rounding {
  NearestEven,
  AwayFromZero,  // magnitude rounded up; used for error bounds
  TowardZero
};

class SoftFloat {
 public:
  SoftFloat() = default;
  explicit SoftFloat(Format f) : fmt_(f), exp_(f.emin()) {}

  static SoftFloat zero(Format f) { return SoftFloat(f); }

  const Format& format() const { return fmt_; }
  int sign() const { return sign_; }
  const Integer& significand() const { return sig_; }
  // value = sign * significand * 2^(exponent - L)
  long exponent() const { return exp_; }
  bool is_zero() const { return sign_ == 0; }
  bool is_subnormal() const { return sign_ != 0 && sig_ < leading(); }

  Rational to_rational() const {
    if (sign_ == 0) return Rational(0);
    Rational q(sig_);
    q = mul_pow2(q, exp_ - fmt_.L);
    return sign_ < 0 ? Rational(-q) : q;
  }

  SoftFloat abs() const {
    SoftFloat r = *this;
    if (r.sign_ < 0) r.sign_ = 1;
    return r;
  }
  SoftFloat operator-() const {
    SoftFloat r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  // Exponent of the leading bit: 2^top <= |x| < 2^(top+1).
  long top_exponent() const { return exp_ - fmt_.L + bit_length(sig_) - 1; }

  static SoftFloat round(const Rational& x, Format f, Rounding mode = Rounding::NearestEven,
                         const char* op = "round", bool raise_underflow = true) {
    if (sgn(x) == 0) return zero(f);
    Integer num = abs_int(x.get_num());
    return round_scaled(sgn(x) < 0, num, x.get_den(), 0, f, mode, op, raise_underflow);
  }

  // Rounds sign * num/den * 2^s (num >= 0, den > 0) into F.
  static SoftFloat round_scaled(bool negative, const Integer& num, const Integer& den, long s,
                                Format f, Rounding mode, const char* op, bool raise_underflow) {
    if (sgn(num) == 0) return zero(f);
    long bl = bit_length(num) - bit_length(den);
    {
      int c = bl >= 0 ? cmp_shifted(num, 0, den, bl) : cmp_shifted(num, -bl, den, 0);
      if (c < 0) --bl;
    }
    const long e = bl + s;
    const bool tiny = e < f.emin();
    long eeff = std::max(e, f.emin());
    const long t = s - eeff + f.L;

    Integer q;
    int half_cmp = -1;
    bool inexact = false;
    if (den == 1) {
      if (t >= 0) {
        mpz_mul_2exp(q.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(t));
      } else {
        const auto sh = static_cast<mp_bitcnt_t>(-t);
        mpz_fdiv_q_2exp(q.get_mpz_t(), num.get_mpz_t(), sh);
        Integer r;
        mpz_fdiv_r_2exp(r.get_mpz_t(), num.get_mpz_t(), sh);
        if (sgn(r) != 0) {
          inexact = true;
          Integer half;
          mpz_setbit(half.get_mpz_t(), sh - 1);
          half_cmp = cmp(r, half) < 0 ? -1 : (cmp(r, half) == 0 ? 0 : 1);
        }
      }
    } else {
      Integer n = num, d = den;
      if (t >= 0)
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(t));
      else
        mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-t));
      Integer r;
      mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
      if (sgn(r) != 0) {
        inexact = true;
        Integer r2 = r * 2;
        int c = cmp(r2, d);
        half_cmp = c < 0 ? -1 : (c == 0 ? 0 : 1);
      }
    }

    bool up = false;
    if (inexact) {
      switch (mode) {
        case Rounding::NearestEven:
          up = half_cmp > 0 || (half_cmp == 0 && mpz_odd_p(q.get_mpz_t()));
          break;
        case Rounding::AwayFromZero: up = true; break;
        case Rounding::TowardZero: up = false; break;
      }
    }
    if (up) {
      q += 1;
      if (bit_length(q) > f.L + 1) {
        mpz_fdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), 1);
        ++eeff;
      }
    }
    if (eeff > f.emax()) throw RangeError(RangeKind::Overflow, op, "exponent above 2^(K-1)");
    if (tiny && inexact && raise_underflow)
      throw RangeError(RangeKind::Underflow, op, "inexact result below 2^emin");
    SoftFloat r(f);
    if (sgn(q) == 0) return r;
    r.sign_ = negative ? -1 : 1;
    r.sig_ = std::move(q);
    r.exp_ = eeff;
    return r;
  }

  static SoftFloat add(const SoftFloat& a, const SoftFloat& b, Rounding mode = Rounding::NearestEven,
                       const char* op = "add", bool raise_underflow = true) {
    check_same(a, b);
    const Format f = a.fmt_;
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const SoftFloat* big = &a;
    const SoftFloat* small = &b;
    if (a.top_exponent() < b.top_exponent()) std::swap(big, small);
    const long gap = big->top_exponent() - small->top_exponent();
    // A far smaller operand only acts as a sticky bit below a quarter ulp.
    if (gap > f.L + 4)
      return add_raw(big->sign_, big->sig_, big->exp_ - f.L, small->sign_, Integer(1),
                     big->top_exponent() - f.L - 4, f, mode, op, raise_underflow);
    return add_raw(big->sign_, big->sig_, big->exp_ - f.L, small->sign_, small->sig_,
                   small->exp_ - f.L, f, mode, op, raise_underflow);
  }

  static SoftFloat sub(const SoftFloat& a, const SoftFloat& b, Rounding mode = Rounding::NearestEven,
                       const char* op = "sub", bool raise_underflow = true) {
    return add(a, -b, mode, op, raise_underflow);
  }

  static SoftFloat mul(const SoftFloat& a, const SoftFloat& b, Rounding mode = Rounding::NearestEven,
                       const char* op = "mul", bool raise_underflow = true) {
    check_same(a, b);
    if (a.is_zero() || b.is_zero()) return zero(a.fmt_);
    Integer n = a.sig_ * b.sig_;
    return round_scaled((a.sign_ * b.sign_) < 0, n, Integer(1), a.exp_ + b.exp_ - 2L * a.fmt_.L,
                        a.fmt_, mode, op, raise_underflow);
  }

  static SoftFloat div(const SoftFloat& a, const SoftFloat& b, Rounding mode = Rounding::NearestEven,
                       const char* op = "div", bool raise_underflow = true) {
    check_same(a, b);
    if (b.is_zero()) throw DivisionByZero(op);
    if (a.is_zero()) return zero(a.fmt_);
    return round_scaled((a.sign_ * b.sign_) < 0, a.sig_, b.sig_, a.exp_ - b.exp_, a.fmt_, mode, op,
                        raise_underflow);
  }

  friend SoftFloat operator+(const SoftFloat& a, const SoftFloat& b) { return add(a, b); }
  friend SoftFloat operator-(const SoftFloat& a, const SoftFloat& b) { return sub(a, b); }
  friend SoftFloat operator*(const SoftFloat& a, const SoftFloat& b) { return mul(a, b); }
  friend SoftFloat operator/(const SoftFloat& a, const SoftFloat& b) { return div(a, b); }

  // Total order on values; formats must agree.
  friend int compare(const SoftFloat& a, const SoftFloat& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    if (a.sign_ == 0) return 0;
    int mag;
    if (a.exp_ != b.exp_)
      mag = a.exp_ < b.exp_ ? -1 : 1;
    else {
      int c = cmp(a.sig_, b.sig_);
      mag = c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    return a.sign_ > 0 ? mag : -mag;
  }
  friend bool operator==(const SoftFloat& a, const SoftFloat& b) {
    return a.fmt_ == b.fmt_ && compare(a, b) == 0;
  }
  friend bool operator<(const SoftFloat& a, const SoftFloat& b) { return compare(a, b) < 0; }
  friend bool operator>(const SoftFloat& a, const SoftFloat& b) { return compare(a, b) > 0; }

  std::string str() const { return to_string(to_rational()); }

 private:
  Format fmt_{};
  int sign_ = 0;
  Integer sig_ = 0;
  long exp_ = 0;

  Integer leading() const {
    Integer one = 1;
    mpz_mul_2exp(one.get_mpz_t(), one.get_mpz_t(), static_cast<mp_bitcnt_t>(fmt_.L));
    return one;
  }

  static Integer abs_int(const Integer& z) { return sgn(z) < 0 ? Integer(-z) : z; }

  // compares a*2^sa with b*2^sb
  static int cmp_shifted(const Integer& a, long sa, const Integer& b, long sb) {
    Integer x = a, y = b;
    if (sa > 0) mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(sa));
    if (sb > 0) mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), static_cast<mp_bitcnt_t>(sb));
    int c = cmp(x, y);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }

  // sa*ma*2^qa + sb*mb*2^qb, exact, then rounded
  static SoftFloat add_raw(int sa, const Integer& ma, long qa, int sb, const Integer& mb, long qb,
                           Format f, Rounding mode, const char* op, bool raise_underflow) {
    const long q = std::min(qa, qb);
    Integer x = ma, y = mb;
    mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(qa - q));
    mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), static_cast<mp_bitcnt_t>(qb - q));
    Integer n = (sa < 0 ? Integer(-x) : x) + (sb < 0 ? Integer(-y) : y);
    if (sgn(n) == 0) return zero(f);
    bool neg = sgn(n) < 0;
    if (neg) n = -n;
    return round_scaled(neg, n, Integer(1), q, f, mode, op, raise_underflow);
  }

  static void check_same(const SoftFloat& a, const SoftFloat& b) {
    if (!(a.fmt_ == b.fmt_)) throw std::invalid_argument("softfloat operands differ in format");
  }
};

inline SoftFloat fl_round(const Rational& x, Format f) { return SoftFloat::round(x, f); }

inline bool representable(const Rational& x, Format f) {
  try {
    return SoftFloat::round(x, f, Rounding::NearestEven, "round", true).to_rational() == x;
  } catch (const RangeError&) {
    return false;
  }
}

enum class BinOp { Add, Sub, Mul, Div };

inline SoftFloat fl_binop(BinOp op, const SoftFloat& a, const SoftFloat& b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div: return a / b;
  }
  throw std::logic_error("bad op");
}

// Number of members of F in [a, b] (exact count, closed interval).
inline Integer count_members(const Rational& a, const Rational& b, Format f) {
  if (b < a) return 0;
  if (sgn(a) < 0) {
    if (sgn(b) <= 0) return count_members(-b, -a, f);
    return count_members(0, -a, f) + count_members(0, b, f) - 1;
  }
  Integer total = 0;
  auto count_multiples = [&](const Rational& lo, const Rational& hi, long unit_exp, const Integer& mlo,
                             const Integer& mhi) -> Integer {
    // m * 2^unit_exp in [lo, hi] with mlo <= m <= mhi
    Rational unit = pow2(unit_exp);
    Integer m0 = ceil_div(lo / unit), m1 = floor_div(hi / unit);
    if (m0 < mlo) m0 = mlo;
    if (m1 > mhi) m1 = mhi;
    return m1 >= m0 ? Integer(m1 - m0 + 1) : Integer(0);
  };
  Integer lead = 1;
  mpz_mul_2exp(lead.get_mpz_t(), lead.get_mpz_t(), static_cast<mp_bitcnt_t>(f.L));
  // zero and subnormals share the unit 2^(emin-L)
  total += count_multiples(a, b, f.emin() - f.L, Integer(0), Integer(lead - 1));
  long elo = f.emin(), ehi = f.emax();
  if (sgn(b) > 0) ehi = std::min(ehi, floor_log2(b));
  if (sgn(a) > 0) elo = std::max(elo, floor_log2(a));
  for (long e = elo; e <= ehi; ++e)
    total += count_multiples(a, b, e - f.L, lead, Integer(2 * lead - 1));
  return total;
}

// All members of F in [a, b], ascending. Caller bounds the size.
inline std::vector<Rational> enumerate_members(const Rational& a, const Rational& b, Format f) {
  std::vector<Rational> out;
  if (b < a) return out;
  Integer lead = 1;
  mpz_mul_2exp(lead.get_mpz_t(), lead.get_mpz_t(), static_cast<mp_bitcnt_t>(f.L));
  std::vector<Rational> pos;
  for (Integer m = 0; m < lead; ++m) pos.push_back(Rational(m) * pow2(f.emin() - f.L));
  Rational lim = std::max(rabs(a), rabs(b));
  for (long e = f.emin(); e <= f.emax(); ++e) {
    if (pow2(e) > lim) break;
    for (Integer m = lead; m < 2 * lead; ++m) pos.push_back(Rational(m) * pow2(e - f.L));
  }
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (sgn(*it) > 0 && -*it >= a && -*it <= b) out.push_back(-*it);
  for (const auto& v : pos)
    if (v >= a && v <= b) out.push_back(v);
  return out;
}

}  // namespace cp
