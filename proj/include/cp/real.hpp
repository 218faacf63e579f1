#pragma once

#include "cp/rational.hpp"

#include <mpfr.h>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace cp {

// Certified enclosures of real quantities. Rational inputs stay exact through
// + - * / and integer powers; roots, logarithms and pi fall back to MPFR intervals
// at the thread's working precision.

namespace detail {
inline thread_local mpfr_prec_t working_prec = 256;
inline thread_local bool conservative = false;
}  // namespace detail

class PrecisionScope {
 public:
  explicit PrecisionScope(mpfr_prec_t p, bool conservative = false)
      : saved_(detail::working_prec), saved_c_(detail::conservative) {
    detail::working_prec = p;
    detail::conservative = conservative;
  }
  ~PrecisionScope() {
    detail::working_prec = saved_;
    detail::conservative = saved_c_;
  }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t saved_;
  bool saved_c_;
};

// An integer decision (ceil/floor) that the current precision cannot settle.
struct Undecided : std::runtime_error {
  Undecided() : std::runtime_error("enclosure too wide to decide") {}
};

class Interval {
 public:
  Interval() {
    init();
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }
  explicit Interval(const Rational& q) {
    init();
    mpfr_set_q(lo_, q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(hi_, q.get_mpq_t(), MPFR_RNDU);
  }
  Interval(const Interval& o) {
    mpfr_init2(lo_, mpfr_get_prec(o.lo_));
    mpfr_init2(hi_, mpfr_get_prec(o.hi_));
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  Interval& operator=(const Interval& o) {
    if (this != &o) {
      mpfr_set_prec(lo_, mpfr_get_prec(o.lo_));
      mpfr_set_prec(hi_, mpfr_get_prec(o.hi_));
      mpfr_set(lo_, o.lo_, MPFR_RNDD);
      mpfr_set(hi_, o.hi_, MPFR_RNDU);
    }
    return *this;
  }
  ~Interval() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
  }

  static Interval pi() {
    Interval r;
    mpfr_const_pi(r.lo_, MPFR_RNDD);
    mpfr_const_pi(r.hi_, MPFR_RNDU);
    return r;
  }

  const mpfr_t& lo() const { return lo_; }
  const mpfr_t& hi() const { return hi_; }
  double lo_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
  double hi_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }
  double mid_double() const { return 0.5 * (lo_double() + hi_double()); }

  bool certainly_positive() const { return mpfr_sgn(lo_) > 0; }
  bool certainly_negative() const { return mpfr_sgn(hi_) < 0; }
  bool contains_zero() const { return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0; }

  friend bool certainly_less(const Interval& a, const Interval& b) { return mpfr_less_p(a.hi_, b.lo_); }

  friend Interval operator+(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
  }
  Interval operator-() const {
    Interval r;
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
  }
  friend Interval operator*(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_t t;
    mpfr_init2(t, detail::working_prec);
    const mpfr_t* xs[2] = {&a.lo_, &a.hi_};
    const mpfr_t* ys[2] = {&b.lo_, &b.hi_};
    bool first = true;
    for (auto x : xs)
      for (auto y : ys) {
        mpfr_mul(t, *x, *y, MPFR_RNDD);
        if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_mul(t, *x, *y, MPFR_RNDU);
        if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    mpfr_clear(t);
    return r;
  }
  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero()) throw std::domain_error("interval division by an enclosure of zero");
    Interval inv;
    mpfr_ui_div(inv.lo_, 1, b.hi_, MPFR_RNDD);
    mpfr_ui_div(inv.hi_, 1, b.lo_, MPFR_RNDU);
    return a * inv;
  }

  Interval pow(unsigned long n) const {
    Interval r;
    if (n == 0) {
      mpfr_set_ui(r.lo_, 1, MPFR_RNDD);
      mpfr_set_ui(r.hi_, 1, MPFR_RNDU);
      return r;
    }
    if (mpfr_sgn(lo_) >= 0) {
      mpfr_pow_ui(r.lo_, lo_, n, MPFR_RNDD);
      mpfr_pow_ui(r.hi_, hi_, n, MPFR_RNDU);
      return r;
    }
    if (mpfr_sgn(hi_) <= 0) {
      Interval m = -*this;
      Interval p = m.pow(n);
      return (n % 2 == 0) ? p : -p;
    }
    if (n % 2 == 1) {
      mpfr_pow_ui(r.lo_, lo_, n, MPFR_RNDD);
      mpfr_pow_ui(r.hi_, hi_, n, MPFR_RNDU);
      return r;
    }
    Interval m = abs();
    mpfr_set_zero(r.lo_, 1);
    mpfr_pow_ui(r.hi_, m.hi_, n, MPFR_RNDU);
    return r;
  }

  Interval abs() const {
    if (mpfr_sgn(lo_) >= 0) return *this;
    if (mpfr_sgn(hi_) <= 0) return -*this;
    Interval r;
    mpfr_set_zero(r.lo_, 1);
    if (mpfr_cmpabs(lo_, hi_) > 0)
      mpfr_abs(r.hi_, lo_, MPFR_RNDU);
    else
      mpfr_set(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  // k-th root of a nonnegative enclosure
  Interval root(unsigned long k) const {
    if (mpfr_sgn(hi_) < 0) throw std::domain_error("root of a negative value");
    Interval r;
    if (mpfr_sgn(lo_) <= 0)
      mpfr_set_zero(r.lo_, 1);
    else
      mpfr_rootn_ui(r.lo_, lo_, k, MPFR_RNDD);
    mpfr_rootn_ui(r.hi_, hi_, k, MPFR_RNDU);
    return r;
  }

  Interval log2() const {
    if (mpfr_sgn(lo_) <= 0) throw std::domain_error("log2 of a non-positive enclosure");
    Interval r;
    mpfr_log2(r.lo_, lo_, MPFR_RNDD);
    mpfr_log2(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval exp2() const {
    Interval r;
    mpfr_exp2(r.lo_, lo_, MPFR_RNDD);
    mpfr_exp2(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  friend Interval min(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_min(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_min(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }
  friend Interval max(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_max(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }

  // hull of two enclosures
  friend Interval hull(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_min(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }

  // integer decisions; nullopt when the enclosure straddles an integer boundary
  std::optional<long> ceil_exact() const {
    mpfr_t a, b;
    mpfr_init2(a, mpfr_get_prec(lo_));
    mpfr_init2(b, mpfr_get_prec(hi_));
    mpfr_ceil(a, lo_);
    mpfr_ceil(b, hi_);
    std::optional<long> r;
    if (mpfr_equal_p(a, b)) r = mpfr_get_si(a, MPFR_RNDN);
    mpfr_clear(a);
    mpfr_clear(b);
    return r;
  }
  std::optional<long> floor_exact() const {
    mpfr_t a, b;
    mpfr_init2(a, mpfr_get_prec(lo_));
    mpfr_init2(b, mpfr_get_prec(hi_));
    mpfr_floor(a, lo_);
    mpfr_floor(b, hi_);
    std::optional<long> r;
    if (mpfr_equal_p(a, b)) r = mpfr_get_si(a, MPFR_RNDN);
    mpfr_clear(a);
    mpfr_clear(b);
    return r;
  }
  long ceil_hi() const { return mpfr_get_si(hi_, MPFR_RNDU); }
  long floor_lo() const { return mpfr_get_si(lo_, MPFR_RNDD); }

  std::string str(int digits = 17) const {
    char buf[128];
    mpfr_snprintf(buf, sizeof buf, "[%.*Rg, %.*Rg]", digits, lo_, digits, hi_);
    return buf;
  }

  static Interval from_bounds(const Interval& lo_src, const Interval& hi_src) {
    Interval r;
    mpfr_set(r.lo_, lo_src.lo_, MPFR_RNDD);
    mpfr_set(r.hi_, hi_src.hi_, MPFR_RNDU);
    return r;
  }

  // midpoint (rounded) as a degenerate-width interval source for bisection
  Interval midpoint() const {
    Interval r;
    mpfr_add(r.lo_, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(r.lo_, r.lo_, 1, MPFR_RNDN);
    mpfr_set(r.hi_, r.lo_, MPFR_RNDN);
    return r;
  }

  // relative width small enough at current precision
  bool narrow(long bits) const {
    if (mpfr_equal_p(lo_, hi_)) return true;
    mpfr_t w, m;
    mpfr_init2(w, 64);
    mpfr_init2(m, 64);
    mpfr_sub(w, hi_, lo_, MPFR_RNDU);
    mpfr_abs(m, hi_, MPFR_RNDD);
    bool r = mpfr_zero_p(m) || mpfr_get_exp(w) < mpfr_get_exp(m) - bits;
    mpfr_clear(w);
    mpfr_clear(m);
    return r;
  }

 private:
  mpfr_t lo_, hi_;
  void init() {
    mpfr_init2(lo_, detail::working_prec);
    mpfr_init2(hi_, detail::working_prec);
  }
};

class Real {
 public:
  Real() : q_(Rational(0)), iv_(Rational(0)) {}
  Real(const Rational& q) : q_(q), iv_(q) {}  // NOLINT
  Real(long n) : Real(Rational(n)) {}         // NOLINT
  Real(int n) : Real(Rational(n)) {}          // NOLINT
  explicit Real(const Interval& iv) : iv_(iv) {}

  static Real pi() { return Real(Interval::pi()); }

  bool exact() const { return q_.has_value(); }
  const Rational& rational() const { return *q_; }
  const Interval& interval() const { return iv_; }
  double to_double() const { return exact() ? q_->get_d() : iv_.mid_double(); }
  double lower_double() const { return exact() ? q_->get_d() : iv_.lo_double(); }
  double upper_double() const { return exact() ? q_->get_d() : iv_.hi_double(); }

  bool certainly_positive() const { return exact() ? sgn(*q_) > 0 : iv_.certainly_positive(); }
  bool certainly_negative() const { return exact() ? sgn(*q_) < 0 : iv_.certainly_negative(); }

  friend bool certainly_less(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return *a.q_ < *b.q_;
    return certainly_less(a.iv_, b.iv_);
  }
  friend bool certainly_less_equal(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return *a.q_ <= *b.q_;
    return certainly_less(a.iv_, b.iv_) || false;
  }

  friend Real operator+(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return Real(Rational(*a.q_ + *b.q_));
    return Real(a.iv_ + b.iv_);
  }
  friend Real operator-(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return Real(Rational(*a.q_ - *b.q_));
    return Real(a.iv_ - b.iv_);
  }
  Real operator-() const {
    if (exact()) return Real(Rational(-*q_));
    return Real(-iv_);
  }
  friend Real operator*(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return Real(Rational(*a.q_ * *b.q_));
    return Real(a.iv_ * b.iv_);
  }
  friend Real operator/(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) {
      if (sgn(*b.q_) == 0) throw std::domain_error("division by zero");
      return Real(Rational(*a.q_ / *b.q_));
    }
    return Real(a.iv_ / b.iv_);
  }

  friend Real pow(const Real& a, unsigned long n) {
    if (a.exact()) {
      Rational r;
      mpz_pow_ui(r.get_num_mpz_t(), a.q_->get_num_mpz_t(), n);
      mpz_pow_ui(r.get_den_mpz_t(), a.q_->get_den_mpz_t(), n);
      r.canonicalize();
      return Real(r);
    }
    return Real(a.iv_.pow(n));
  }

  // k-th root; exact when the rational is a perfect k-th power
  friend Real root(const Real& a, unsigned long k) {
    if (k == 1) return a;
    if (a.exact() && sgn(*a.q_) >= 0) {
      Integer n, d;
      bool en = mpz_root(n.get_mpz_t(), a.q_->get_num_mpz_t(), k) != 0;
      bool ed = mpz_root(d.get_mpz_t(), a.q_->get_den_mpz_t(), k) != 0;
      if (en && ed) return Real(Rational(n, d));
    }
    return Real(a.iv_.root(k));
  }

  friend Real abs(const Real& a) {
    if (a.exact()) return Real(rabs(*a.q_));
    return Real(a.iv_.abs());
  }
  friend Real min(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return *a.q_ < *b.q_ ? a : b;
    if (certainly_less(a, b)) return a;
    if (certainly_less(b, a)) return b;
    return Real(min(a.iv_, b.iv_));
  }
  friend Real max(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return *a.q_ < *b.q_ ? b : a;
    if (certainly_less(a, b)) return b;
    if (certainly_less(b, a)) return a;
    return Real(max(a.iv_, b.iv_));
  }

  friend Real log2(const Real& a) {
    if (a.exact() && is_power_of_two(*a.q_)) return Real(Rational(floor_log2(*a.q_)));
    return Real(a.iv_.log2());
  }
  friend Real exp2(const Real& a) {
    if (a.exact() && a.q_->get_den() == 1 && a.q_->get_num().fits_slong_p())
      return Real(pow2(a.q_->get_num().get_si()));
    return Real(a.iv_.exp2());
  }

  std::string str() const { return exact() ? to_string(*q_) : iv_.str(); }

 private:
  std::optional<Rational> q_;
  Interval iv_;
};

// Integer decisions. When the enclosure is too wide, Undecided is thrown unless the
// thread runs in conservative mode, in which case the side named by prefer_larger wins.
inline long ceil_int(const Real& x, bool prefer_larger = true) {
  if (x.exact()) return ceil_div(x.rational()).get_si();
  if (auto c = x.interval().ceil_exact()) return *c;
  if (!detail::conservative) throw Undecided();
  return prefer_larger ? x.interval().ceil_hi() : static_cast<long>(mpfr_get_si(x.interval().lo(), MPFR_RNDU));
}

inline long floor_int(const Real& x, bool prefer_larger = false) {
  if (x.exact()) return floor_div(x.rational()).get_si();
  if (auto c = x.interval().floor_exact()) return *c;
  if (!detail::conservative) throw Undecided();
  return prefer_larger ? static_cast<long>(mpfr_get_si(x.interval().hi(), MPFR_RNDD)) : x.interval().floor_lo();
}

// smallest e with x <= 2^e
inline long ceil_log2(const Real& x, bool prefer_larger = true) {
  if (x.exact()) return ceil_log2(x.rational());
  return ceil_int(log2(x), prefer_larger);
}

// largest e with 2^e <= x
inline long floor_log2(const Real& x, bool prefer_larger = false) {
  if (x.exact()) return floor_log2(x.rational());
  return floor_int(log2(x), prefer_larger);
}

// Runs f at increasing precision until its integer decisions settle.
template <class F>
auto with_refinement(F&& f) -> decltype(f()) {
  for (mpfr_prec_t p = 128; p <= 4096; p *= 2) {
    PrecisionScope scope(p);
    try {
      return f();
    } catch (const Undecided&) {
    }
  }
  PrecisionScope scope(4096, true);
  return f();
}

// Solves f(x) = target for x in [lo, hi] with f monotone and the root bracketed;
// returns an enclosure of the root.
template <class F>
Real invert_monotone(F&& f, const Real& target, Real lo, Real hi, bool increasing) {
  auto below = [&](const Real& x) {
    Real v = f(x);
    return increasing ? certainly_less(v, target) : certainly_less(target, v);
  };
  auto above = [&](const Real& x) {
    Real v = f(x);
    return increasing ? certainly_less(target, v) : certainly_less(v, target);
  };
  if (below(hi) || above(lo)) throw std::domain_error("monotone inversion: root not bracketed");
  const long bits = static_cast<long>(detail::working_prec) - 8;
  for (long it = 0; it < 4 * static_cast<long>(detail::working_prec); ++it) {
    Interval span = Interval::from_bounds(lo.interval(), hi.interval());
    if (span.narrow(bits)) break;
    Real mid(span.midpoint());
    if (below(mid))
      lo = mid;
    else if (above(mid))
      hi = mid;
    else
      break;
  }
  return Real(Interval::from_bounds(lo.interval(), hi.interval()));
}

}  // namespace cp
