#pragma once

#include "cp/bounds.hpp"
#include "cp/errorbounds.hpp"
#include "cp/rational.hpp"
#include "cp/real.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cp {

// Method of quantified relations: probability -> volume budget -> gamma -> phi -> precision.

struct ArithmeticRequirement {
  std::string predicate;
  Rational p;
  RegionKind region = RegionKind::Nu;
  std::optional<Real> eps;  // eps_nu, or eps_chi for chi bound sets
  std::optional<Real> lambda;
  std::vector<Real> gamma;
  std::vector<Real> t_gamma;
  Real phi;
  Real phi_sup;
  Rational safety_C;
  long L_safe = 0;
  long L_grid = 0;
  long L_f = 0;
  int K_sup = 2;
  int K_expr = 2;
  int K_f = 2;
};

// emax - 1 - floor(log2(min(t, 1-t) * min gamma))
inline long lgrid(const std::vector<Real>& gamma, const Rational& t, long emax) {
  if (gamma.empty()) throw std::invalid_argument("lgrid: empty gamma");
  if (sgn(t) <= 0 || t >= 1) throw std::invalid_argument("lgrid: t must lie in (0,1)");
  Real m = gamma[0];
  for (const auto& g : gamma) m = min(m, g);
  if (!m.certainly_positive()) throw std::invalid_argument("lgrid: gamma must be positive");
  return emax - 1 - floor_log2(Real(std::min(t, Rational(1 - t))) * m);
}

inline long lgrid(const std::vector<Rational>& gamma, const Rational& t, long emax) {
  std::vector<Real> g(gamma.begin(), gamma.end());
  return lgrid(g, t, emax);
}

// Smallest K >= 2 with 2^(2^(K-1)) >= v.
inline int exponent_for_magnitude(const Real& v) {
  if (!certainly_less(Real(2), v)) {
    if (certainly_less(v, Real(2)) || v.exact()) return 2;
    if (!detail::conservative) throw Undecided();
  }
  long c = ceil_log2(log2(v));
  return static_cast<int>(std::max(2L, c + 1));
}

namespace detail {
inline void check_p(const Rational& p) {
  if (sgn(p) <= 0 || p >= 1) throw std::invalid_argument("p must lie in (0,1)");
}

inline ArithmeticRequirement quantified_relations_once(const PredicateDescription& desc, const BoundSet& b,
                                                        const Rational& p) {
  check_p(p);
  ArithmeticRequirement r;
  r.predicate = desc.name.empty() ? b.name : desc.name;
  r.p = p;
  r.region = b.region;
  r.safety_C = b.safety.C;
  if (!b.phi_inf) throw NotAnalyzable(b.name + ": value bound phi_inf missing");
  if (sgn(b.safety.C) <= 0) throw NotAnalyzable(b.name + ": safety bound missing");
  Real tl;
  if (b.region == RegionKind::None) {
    // no critical set: the first four steps collapse to the constant bound
    r.phi = b.phi_inf(Real(0));
    r.L_grid = 0;
    tl = Real(0);
  } else {
    // Step 1: volume budget
    Real mu(b.mu_U);
    r.eps = b.region == RegionKind::Nu ? Real(Rational(1 - p)) * mu : Real(p) * mu;
    // Step 2: gamma on the line
    Real lam = b.lambda_for_budget(*r.eps);
    b.check_lambda(lam);
    r.lambda = lam;
    r.gamma = b.gamma(lam);
    // Step 3: augmentation by t
    tl = Real(desc.t) * lam;
    r.t_gamma = b.gamma(tl);
    // Step 4: lower bound on |f|
    r.phi = b.phi_inf(tl);
    // Step 6 (grid part)
    r.L_grid = lgrid(r.gamma, desc.t, desc.emax);
  }
  if (!r.phi.certainly_positive()) throw NotAnalyzable(b.name + ": value bound is not positive at t*gamma");
  // Step 5: precision from the safety bound
  r.L_safe = ceil_log2(Real(b.safety.C) / r.phi);
  r.L_f = std::max(r.L_safe, r.L_grid);
  // exponent
  if (!b.phi_sup) throw NotAnalyzable(b.name + ": value bound phi_sup missing");
  r.phi_sup = b.phi_sup(tl);
  Real s_inf = Real(b.safety(std::max(r.L_f, 1L)));
  r.K_sup = exponent_for_magnitude(r.phi_sup + s_inf);
  r.K_expr = exponent_requirement_expr(desc.expr, desc.emax, static_cast<int>(std::max(r.L_f, 1L)));
  r.K_f = std::max(r.K_sup, r.K_expr);
  return r;
}
}  // namespace detail

inline ArithmeticRequirement quantified_relations(const PredicateDescription& desc, const BoundSet& b,
                                                  const Rational& p) {
  return with_refinement([&] { return detail::quantified_relations_once(desc, b, p); });
}

inline int exponent_requirement(const PredicateDescription& desc, const BoundSet& b, const Rational& p) {
  return quantified_relations(desc, b, p).K_f;
}

// ---------------------------------------------------------------- probability functions

struct ProbabilityReport {
  Real p_inf;
  Real p_sup;
  Real p_grid;
  Real p_f;
  bool clamped = false;
};

namespace detail {
// Probability that a uniform point avoids the region at lambda; 0 outside the valid range.
inline Real region_probability(const BoundSet& b, const Real& lam, bool& clamped) {
  if (b.region == RegionKind::None) return Real(1);
  if (certainly_less(Real(b.lambda_valid), lam) || certainly_less(Real(1), lam)) {
    clamped = true;
    return Real(0);
  }
  Real mu(b.mu_U);
  Real p = b.region == RegionKind::Nu ? Real(1) - b.region_fn(lam) / mu : b.region_fn(lam) / mu;
  if (p.certainly_negative()) {
    clamped = true;
    return Real(0);
  }
  if (certainly_less(Real(1), p)) {
    clamped = true;
    return Real(1);
  }
  return p;
}

inline Real p_inf_once(const PredicateDescription& desc, const BoundSet& b, long L, bool& clamped) {
  Real s(b.safety(L));
  if (b.region == RegionKind::None) return certainly_less(b.phi_inf(Real(0)), s) ? Real(0) : Real(1);
  auto mu = b.lambda_for_phi(s);
  if (!mu) {
    clamped = true;
    return Real(0);
  }
  return region_probability(b, *mu / Real(desc.t), clamped);
}

inline Real p_grid_once(const PredicateDescription& desc, const BoundSet& b, long L, bool& clamped) {
  if (b.region == RegionKind::None) return Real(1);
  Rational m = std::min(desc.t, Rational(1 - desc.t));
  Real lam(pow2(desc.emax - L - 1) / (m * b.gamma_hat_min()));
  return region_probability(b, lam, clamped);
}

inline Real p_sup_once(const PredicateDescription& desc, const BoundSet& b, long L, int K, bool& clamped) {
  if (!b.phi_sup) throw NotAnalyzable(b.name + ": value bound phi_sup missing");
  if (K < exponent_requirement_expr(desc.expr, desc.emax, static_cast<int>(std::max(L, 1L)))) return Real(0);
  Real limit(safety_upper(K, b.safety(std::max(L, 1L))));
  auto fits = [&](const Real& lam) { return !certainly_less(limit, b.phi_sup(lam)); };
  if (b.phi_sup_constant || b.region == RegionKind::None) return fits(Real(0)) ? Real(1) : Real(0);
  // phi_sup is nonincreasing: find the smallest t*lambda where it fits
  if (fits(Real(0))) return Real(1);
  Real top(b.lambda_valid);
  if (!fits(top)) {
    clamped = true;
    return Real(0);
  }
  Real mu = invert_monotone(b.phi_sup, limit, Real(0), top, false);
  return region_probability(b, mu / Real(desc.t), clamped);
}
}  // namespace detail

inline ProbabilityReport probability(const PredicateDescription& desc, const BoundSet& b, long L, int K) {
  return with_refinement([&] {
    ProbabilityReport r;
    r.p_inf = detail::p_inf_once(desc, b, L, r.clamped);
    r.p_sup = detail::p_sup_once(desc, b, L, K, r.clamped);
    r.p_grid = detail::p_grid_once(desc, b, L, r.clamped);
    r.p_f = min(min(r.p_inf, r.p_sup), r.p_grid);
    return r;
  });
}

// ---------------------------------------------------------------- closed forms

// ceil(-d log2(1-p) + c_u) with c_u = log2((d+2) max|a_i| 2^(emax(d+1)+1) / (|a_d| (t delta/d)^d))
inline long univariate_lsafe_closed_form(const std::vector<Rational>& coeffs, const Rational& delta, long emax,
                                         const Rational& t, const Rational& p) {
  detail::check_p(p);
  std::size_t n = coeffs.size();
  while (n > 0 && sgn(coeffs[n - 1]) == 0) --n;
  if (n < 2) throw NotAnalyzable("univariate: degree must be at least 1");
  const long d = static_cast<long>(n - 1);
  Rational m = 0;
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, rabs(coeffs[i]));
  Rational base = t * delta * (1 - p) / d, den = rabs(coeffs[n - 1]);
  for (long i = 0; i < d; ++i) den *= base;
  return ceil_log2(Rational((d + 2) * m * pow2(emax * (d + 1) + 1) / den));
}

// Cubical multivariate closed form:
// ceil(-beta* log2(1 - p^(1/k)) + c_m),
// c_m = log2((d+1+ceil log2 N_T) N_T max|a| 2^(emax d + beta* + 1) beta_hat^beta* / (|a_beta| (t delta)^beta*))
inline long multivariate_lsafe_closed_form(const Polynomial& poly, const ExponentTuple& beta, const Rational& delta,
                                           long emax, const Rational& t, const Rational& p) {
  detail::check_p(p);
  return with_refinement([&] {
    const long bs = beta_star(beta), bh = beta_hat(beta);
    const long nt = static_cast<long>(poly.terms.size());
    const long lg = nt <= 1 ? 0 : ceil_log2(Rational(nt));
    Rational num = Rational(poly.degree() + 1 + lg) * Rational(nt) * poly.max_coeff() *
                   pow2(emax * poly.degree() + bs + 1);
    for (long i = 0; i < bs; ++i) num *= bh;
    Real y = Real(1) - root(Real(p), static_cast<unsigned long>(poly.k));
    Real den = Real(rabs(poly.coeff(beta))) * pow(Real(t * delta) * y, static_cast<unsigned long>(bs));
    return ceil_log2(Real(num) / den);
  });
}

// lambda = log2((1 - p^(1/k)) / (1 - ((1+p)/2)^(1/k))) of the multivariate shift bound
inline Real multivariate_shift_lambda(int k, const Rational& p) {
  Rational q = (1 + p) / 2;
  Real a = Real(1) - root(Real(p), static_cast<unsigned long>(k));
  Real b = Real(1) - root(Real(q), static_cast<unsigned long>(k));
  return log2(a / b);
}

// ---------------------------------------------------------------- rational functions

struct RationalRequirement {
  ArithmeticRequirement numerator;
  ArithmeticRequirement denominator;
  Rational p;
  long L_f = 0;
  int K_quot = 2;
  int K_f = 2;
};

// f = g / h; both parts analyzed at (1+p)/2 so the failure budgets add up to 1-p.
inline RationalRequirement quantified_relations_rational(const PredicateDescription& dg, const BoundSet& bg,
                                                         const PredicateDescription& dh, const BoundSet& bh,
                                                         const Rational& p) {
  detail::check_p(p);
  RationalRequirement r;
  r.p = p;
  Rational q = (1 + p) / 2;
  r.numerator = quantified_relations(dg, bg, q);
  r.denominator = quantified_relations(dh, bh, q);
  r.L_f = std::max(r.numerator.L_f, r.denominator.L_f);
  r.K_quot = with_refinement([&] {
    // certified parts are within a factor 2 of their exact values
    Real hi = r.numerator.phi_sup / r.denominator.phi;
    Real lo = r.numerator.phi / r.denominator.phi_sup;
    long top = ceil_log2(hi) + 3;
    long bottom = floor_log2(lo) - 2;
    long span = std::max(top, 1 - bottom);
    int K = 2;
    while (K < Format::max_K && (1L << (K - 1)) < span) ++K;
    return K;
  });
  int Kg = std::max(r.numerator.K_sup, exponent_requirement_expr(dg.expr, dg.emax, static_cast<int>(std::max(r.L_f, 1L))));
  int Kh = std::max(r.denominator.K_sup, exponent_requirement_expr(dh.expr, dh.emax, static_cast<int>(std::max(r.L_f, 1L))));
  r.K_f = std::max({Kg, Kh, r.K_quot});
  return r;
}

}  // namespace cp
