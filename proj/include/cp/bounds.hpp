#pragma once

#include "cp/errorbounds.hpp"
#include "cp/expr.hpp"
#include "cp/grid.hpp"
#include "cp/rational.hpp"
#include "cp/real.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cp {

struct NotAnalyzable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GammaTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArityTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexSplitInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using RealFn = std::function<Real(const Real&)>;

// ---------------------------------------------------------------- polynomials

using ExponentTuple = std::vector<int>;

inline int beta_star(const ExponentTuple& b) { return std::accumulate(b.begin(), b.end(), 0); }
inline int beta_hat(const ExponentTuple& b) { return b.empty() ? 0 : *std::max_element(b.begin(), b.end()); }

struct Polynomial {
  int k = 0;
  std::map<ExponentTuple, Rational> terms;  // nonzero coefficients only

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms) d = std::max(d, beta_star(e));
    return d;
  }
  Rational max_coeff() const {
    Rational m = 0;
    for (const auto& [e, c] : terms) m = std::max(m, rabs(c));
    return m;
  }
  Rational coeff(const ExponentTuple& e) const {
    auto it = terms.find(e);
    return it == terms.end() ? Rational(0) : it->second;
  }
  std::vector<ExponentTuple> support() const {
    std::vector<ExponentTuple> out;
    for (const auto& [e, c] : terms) out.push_back(e);
    return out;
  }
  void add(const ExponentTuple& e, const Rational& c) {
    Rational& slot = terms[e];
    slot += c;
    if (sgn(slot) == 0) terms.erase(e);
  }
};

namespace detail {
inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
  Polynomial r{a.k, {}};
  for (const auto& [ea, ca] : a.terms)
    for (const auto& [eb, cb] : b.terms) {
      ExponentTuple e(static_cast<std::size_t>(a.k));
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.add(e, ca * cb);
    }
  return r;
}
}  // namespace detail

// Multiplies out a polynomial expression over inputs x0..x(k-1).
inline Polynomial expand(const Expr& e, int k) {
  const ExprNode& n = *e.raw();
  Polynomial p{k, {}};
  switch (n.op) {
    case Op::Const: p.add(ExponentTuple(static_cast<std::size_t>(k), 0), n.value); return p;
    case Op::Input: {
      if (n.index >= k) throw std::out_of_range("input index beyond arity");
      ExponentTuple t(static_cast<std::size_t>(k), 0);
      t[static_cast<std::size_t>(n.index)] = 1;
      p.add(t, 1);
      return p;
    }
    case Op::Add:
    case Op::Sub: {
      Polynomial a = expand(e.child(0), k), b = expand(e.child(1), k);
      for (const auto& [t, c] : b.terms) a.add(t, n.op == Op::Add ? c : Rational(-c));
      return a;
    }
    case Op::Mul: return detail::poly_mul(expand(e.child(0), k), expand(e.child(1), k));
    default: throw UnsupportedNode(std::string("cannot expand '") + op_name(n.op) + "' as a polynomial");
  }
}

// Sum of monomials, each coefficient times inputs left to right.
inline Expr polynomial_expr(const Polynomial& p) {
  Expr acc;
  for (const auto& [e, c] : p.terms) {
    Expr m;
    if (c != 1) m = cst(c);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int j = 0; j < e[i]; ++j) m = m ? m * var(static_cast<int>(i)) : var(static_cast<int>(i));
    if (!m) m = cst(c);
    acc = acc ? acc + m : m;
  }
  return acc ? acc : cst(0);
}

// Horner form of sum a_i x^i in input x_var, skipping zero and unit coefficients.
inline Expr horner_expr(const std::vector<Rational>& coeffs, int x_var = 0) {
  if (coeffs.empty()) return cst(0);
  std::size_t d = coeffs.size() - 1;
  while (d > 0 && sgn(coeffs[d]) == 0) --d;
  Expr acc = cst(coeffs[d]);
  bool unit = coeffs[d] == 1;
  for (std::size_t i = d; i-- > 0;) {
    acc = unit ? var(x_var) : acc * var(x_var);
    unit = false;
    if (sgn(coeffs[i]) != 0) acc = acc + cst(coeffs[i]);
  }
  return acc;
}

// All tuples that are the reverse-lexicographic maximum of I under some permutation.
inline std::vector<ExponentTuple> select_beta(const std::vector<ExponentTuple>& I, int k) {
  if (k > 8) throw ArityTooLarge("arity " + std::to_string(k) + " exceeds 8");
  if (I.empty()) throw std::invalid_argument("empty index set");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<ExponentTuple> out;
  do {
    const ExponentTuple* best = &I[0];
    for (const auto& b : I) {
      // compare from the last permuted component toward the first
      for (int i = k - 1; i >= 0; --i) {
        int x = b[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        int y = (*best)[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        if (x != y) {
          if (x > y) best = &b;
          break;
        }
      }
    }
    if (std::find(out.begin(), out.end(), *best) == out.end()) out.push_back(*best);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest beta* wins; ties go to the reverse-lex maximum under the identity order.
inline ExponentTuple choose_beta(const std::vector<ExponentTuple>& imax) {
  ExponentTuple best = imax.at(0);
  for (const auto& b : imax) {
    if (beta_star(b) < beta_star(best)) {
      best = b;
      continue;
    }
    if (beta_star(b) == beta_star(best)) {
      for (std::size_t i = b.size(); i-- > 0;)
        if (b[i] != best[i]) {
          if (b[i] > best[i]) best = b;
          break;
        }
    }
  }
  return best;
}

// ---------------------------------------------------------------- descriptions

struct PredicateDescription {
  std::string name;
  Expr expr;                     // realizing expression over all inputs
  std::vector<Rational> center;  // one value per input
  std::vector<Rational> delta;   // zero for inputs that are not perturbed
  long emax = 0;
  Rational t = make_rational(1, 2);

  static PredicateDescription make(std::string name, Expr e, std::vector<Rational> center,
                                   std::vector<Rational> delta, Rational t = make_rational(1, 2)) {
    if (center.size() != delta.size()) throw std::invalid_argument("center and radius differ in size");
    if (sgn(t) <= 0 || t >= 1) throw std::invalid_argument("t must lie in (0,1)");
    long emax = compute_emax(center, delta);
    return {std::move(name), std::move(e), std::move(center), std::move(delta), emax, std::move(t)};
  }

  // explicit input value parameter; must cover |center_i| + delta_i
  static PredicateDescription make(std::string name, Expr e, std::vector<Rational> center,
                                   std::vector<Rational> delta, long emax, Rational t) {
    PredicateDescription d = make(std::move(name), std::move(e), std::move(center), std::move(delta), std::move(t));
    if (emax < d.emax) throw std::invalid_argument("emax too small for the perturbation area");
    d.emax = emax;
    return d;
  }

  std::vector<Rational> input_sup() const { return std::vector<Rational>(center.size(), pow2(emax)); }
  PerturbationBox box() const { return {center, delta}; }
};

// C with C * 2^-L certifying every |f| > C * 2^-L through the guard of e.
// Three units cover the error itself, the bound, and its upward rounding.
inline Rational expression_safety_constant(const Expr& e, long emax) {
  Annotated a = annotate(e, emax, 1);
  return Rational(3 * a.ind()) * a.sup();
}

// ---------------------------------------------------------------- bound sets

enum class RegionKind { Nu, Chi, None };

inline const char* to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Nu: return "nu";
    case RegionKind::Chi: return "chi";
    case RegionKind::None: return "none";
  }
  return "?";
}

// Bounding functions along the line gamma = lambda * gamma_hat, lambda in (0, 1].
struct BoundSet {
  std::string name;
  std::vector<Rational> gamma_hat;
  Rational mu_U;
  RegionKind region = RegionKind::Nu;
  RealFn region_fn;   // nu(lambda), nondecreasing, or chi(lambda), nonincreasing
  RealFn region_inv;  // optional closed form
  RealFn phi_inf;     // lower bound on |f| outside the region, nondecreasing in lambda
  RealFn phi_inf_inv; // optional closed form
  RealFn phi_sup;     // upper bound on |f| outside the region, nonincreasing in lambda
  bool phi_sup_constant = false;
  SafetyBound safety;
  Rational lambda_valid = 1;  // preconditions hold for lambda <= lambda_valid

  Rational gamma_hat_min() const {
    if (gamma_hat.empty()) throw NotAnalyzable(name + ": empty gamma direction");
    return *std::min_element(gamma_hat.begin(), gamma_hat.end());
  }

  std::vector<Real> gamma(const Real& lam) const {
    std::vector<Real> g;
    for (const auto& h : gamma_hat) g.push_back(lam * Real(h));
    return g;
  }

  Real nu(const Real& lam) const {
    switch (region) {
      case RegionKind::Nu: return region_fn(lam);
      case RegionKind::Chi: return max(Real(0), Real(mu_U) - region_fn(lam));
      case RegionKind::None: return Real(0);
    }
    return Real(0);
  }
  Real chi(const Real& lam) const {
    switch (region) {
      case RegionKind::Chi: return region_fn(lam);
      case RegionKind::Nu: return max(Real(0), Real(mu_U) - region_fn(lam));
      case RegionKind::None: return Real(mu_U);
    }
    return Real(mu_U);
  }

  // lambda whose region volume equals the budget (nu = eps, or chi = eps for chi sets)
  Real lambda_for_budget(const Real& eps) const {
    if (region == RegionKind::None) throw NotAnalyzable(name + ": no region function");
    if (!region_fn) throw NotAnalyzable(name + ": region bound missing");
    const bool increasing = region == RegionKind::Nu;
    Real end = region_fn(Real(1));
    if (increasing ? certainly_less(end, eps) : certainly_less(eps, end))
      throw BudgetTooLarge(name + ": volume budget " + eps.str() + " exceeds what the gamma line absorbs");
    if (region_inv) return region_inv(eps);
    return invert_monotone(region_fn, eps, Real(0), Real(1), increasing);
  }

  Real phi_at(const Real& lam) const {
    if (!phi_inf) throw NotAnalyzable(name + ": value bound missing");
    return phi_inf(lam);
  }

  // lambda with phi_inf(lambda) = v on [0, lambda_valid]
  std::optional<Real> lambda_for_phi(const Real& v) const {
    if (!phi_inf) throw NotAnalyzable(name + ": value bound missing");
    if (certainly_less(phi_inf(Real(lambda_valid)), v)) return std::nullopt;
    if (phi_inf_inv) return phi_inf_inv(v);
    return invert_monotone(phi_inf, v, Real(0), Real(lambda_valid), true);
  }

  void check_lambda(const Real& lam) const {
    if (certainly_less(Real(lambda_valid), lam))
      throw GammaTooLarge(name + ": gamma parameter " + lam.str() + " beyond the validity limit " +
                          to_string(lambda_valid));
  }
};

namespace detail {
inline Rational product_2delta(const std::vector<Rational>& delta) {
  Rational m = 1;
  for (const auto& d : delta)
    if (sgn(d) > 0) m *= 2 * d;
  return m;
}

inline std::vector<Rational> perturbed(const std::vector<Rational>& delta) {
  std::vector<Rational> out;
  for (const auto& d : delta)
    if (sgn(d) > 0) out.push_back(d);
  return out;
}

inline Real root_k(const Real& x, unsigned long k) { return root(x, k); }

inline void constant_phi_sup(BoundSet& b, const Expr& e, long emax) {
  Rational s = annotate(e, emax, 1).sup();
  b.phi_sup = [s](const Real&) { return Real(s); };
  b.phi_sup_constant = true;
}
}  // namespace detail

// Degree d polynomial sum a_i x^i in one perturbed input.
inline BoundSet bounds_univariate(const std::vector<Rational>& coeffs, const PredicateDescription& desc) {
  std::size_t d = coeffs.size();
  while (d > 0 && sgn(coeffs[d - 1]) == 0) --d;
  if (d < 2) throw NotAnalyzable("univariate: degree must be at least 1");
  const int deg = static_cast<int>(d - 1);
  const Rational ad = rabs(coeffs[d - 1]);
  auto dl = detail::perturbed(desc.delta);
  if (dl.size() != 1) throw NotAnalyzable("univariate: exactly one perturbed input expected");
  const Rational delta = dl[0];

  BoundSet b;
  b.name = "univariate";
  b.mu_U = 2 * delta;
  b.gamma_hat = {delta / deg};
  const Rational gh = b.gamma_hat[0];
  b.region = RegionKind::Nu;
  b.region_fn = [deg, gh](const Real& lam) { return Real(Rational(2 * deg) * gh) * lam; };
  b.region_inv = [deg, gh](const Real& eps) { return eps / Real(Rational(2 * deg) * gh); };
  b.phi_inf = [ad, gh, deg](const Real& lam) { return Real(ad) * pow(lam * Real(gh), static_cast<unsigned long>(deg)); };
  b.phi_inf_inv = [ad, gh, deg](const Real& v) {
    return root(v / Real(ad), static_cast<unsigned long>(deg)) / Real(gh);
  };
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  Rational cor = safety_lower_univariate(deg, std::vector<Rational>(coeffs.begin(), coeffs.begin() + static_cast<long>(d)),
                                         desc.emax, 0);
  b.safety.C = std::max(cor, expression_safety_constant(desc.expr, desc.emax));
  return b;
}

// Bounds for a k-variate polynomial and a chosen beta in I_max.
// The cubical form replaces every beta_i by beta_hat and needs equal radii.
inline BoundSet bounds_multivariate(const Polynomial& poly, const ExponentTuple& beta,
                                    const PredicateDescription& desc, bool cubical = false) {
  const int k = poly.k;
  if (static_cast<int>(beta.size()) != k) throw std::invalid_argument("exponent tuple arity mismatch");
  if (desc.delta.size() != static_cast<std::size_t>(k))
    throw NotAnalyzable("multivariate: radius vector must match the polynomial arity");
  for (const auto& d : desc.delta)
    if (sgn(d) <= 0) throw NotAnalyzable("multivariate: every input must be perturbed");
  const Rational ab = rabs(poly.coeff(beta));
  if (sgn(ab) == 0) throw NotAnalyzable("multivariate: coefficient of the chosen beta is zero");
  const int bs = beta_star(beta), bh = beta_hat(beta);
  if (bh == 0) throw NotAnalyzable("multivariate: constant leading tuple");
  if (cubical)
    for (const auto& d : desc.delta)
      if (d != desc.delta[0]) throw NotAnalyzable("multivariate: cubical form needs equal radii");

  BoundSet b;
  b.name = cubical ? "multivariate_cubical" : "multivariate";
  b.mu_U = detail::product_2delta(desc.delta);
  for (const auto& d : desc.delta) b.gamma_hat.push_back(d / bh);
  Rational ghb = 1;  // prod gamma_hat_i^beta_i
  for (int i = 0; i < k; ++i) {
    Rational g = b.gamma_hat[static_cast<std::size_t>(i)];
    for (int j = 0; j < beta[static_cast<std::size_t>(i)]; ++j) ghb *= g;
  }
  b.phi_inf = [ab, ghb, bs](const Real& lam) { return Real(ab * ghb) * pow(lam, static_cast<unsigned long>(bs)); };
  b.phi_inf_inv = [ab, ghb, bs](const Real& v) { return root(v / Real(ab * ghb), static_cast<unsigned long>(bs)); };
  b.region = RegionKind::Chi;
  const Rational mu = b.mu_U;
  if (cubical) {
    b.region_fn = [mu, k](const Real& lam) { return Real(mu) * pow(Real(1) - lam, static_cast<unsigned long>(k)); };
    b.region_inv = [mu, k](const Real& eps) {
      return Real(1) - root(eps / Real(mu), static_cast<unsigned long>(k));
    };
  } else {
    std::vector<Rational> delta = desc.delta;
    std::vector<int> bt = beta;
    b.region_fn = [delta, bt, bh](const Real& lam) {
      Real r(1);
      for (std::size_t i = 0; i < delta.size(); ++i)
        r = r * (Real(2 * delta[i]) * (Real(1) - lam * Real(make_rational(bt[i], bh))));
      return r;
    };
  }
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  Rational cor = safety_lower_multivariate(poly.degree(), static_cast<long>(poly.terms.size()), poly.max_coeff(),
                                           desc.emax, 0);
  b.safety.C = std::max(cor, expression_safety_constant(desc.expr, desc.emax));
  return b;
}

// in_box(u, v, q) with fixed corners; q = (inputs 4, 5) perturbed by (dx, dy).
inline BoundSet bounds_inbox_direct(const std::vector<Rational>& u, const std::vector<Rational>& v,
                                    const PredicateDescription& desc) {
  auto dl = detail::perturbed(desc.delta);
  if (dl.size() != 2 || u.size() != 2 || v.size() != 2)
    throw NotAnalyzable("in_box direct: two perturbed query coordinates expected");
  const Rational wx = rabs(Rational(v[0] - u[0])), wy = rabs(Rational(v[1] - u[1]));
  BoundSet b;
  b.name = "in_box_direct";
  b.mu_U = 4 * dl[0] * dl[1];
  b.gamma_hat = {dl[0] / 2, dl[1] / 2};
  const Rational gx = b.gamma_hat[0], gy = b.gamma_hat[1];
  b.region = RegionKind::Nu;
  // 4 (gx dy + gy dx) lambda = mu lambda
  const Rational dx = dl[0], dy = dl[1];
  b.region_fn = [gx, gy, dx, dy](const Real& lam) { return Real(4 * (gx * dy + gy * dx)) * lam; };
  b.region_inv = [gx, gy, dx, dy](const Real& eps) { return eps / Real(4 * (gx * dy + gy * dx)); };
  b.phi_inf = [gx, gy, wx, wy](const Real& lam) {
    Real a = lam * Real(gx), c = lam * Real(gy);
    return min(abs(a * a - a * Real(wx)), abs(c * c - c * Real(wy)));
  };
  // each term is increasing while gamma <= w/2
  b.lambda_valid = std::min({Rational(1), Rational(wx / (2 * gx)), Rational(wy / (2 * gy))});
  if (sgn(b.lambda_valid) <= 0) throw GammaTooLarge("in_box direct: degenerate box");
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  b.safety.C = expression_safety_constant(desc.expr, desc.emax);
  return b;
}

// in_circle(c, r, q): (qx-cx)^2 + (qy-cy)^2 - r^2 with q perturbed by (dx, dy).
inline BoundSet bounds_incircle_direct(const Rational& r, const PredicateDescription& desc) {
  auto dl = detail::perturbed(desc.delta);
  if (dl.size() != 2) throw NotAnalyzable("in_circle direct: two perturbed query coordinates expected");
  if (sgn(r) <= 0) throw NotAnalyzable("in_circle direct: radius must be positive");
  const Rational dmin = std::min(dl[0], dl[1]);
  BoundSet b;
  b.name = "in_circle_direct";
  b.mu_U = 4 * dl[0] * dl[1];
  // pi > 3 makes nu(gamma_hat) exceed mu(U)
  const Rational gh = b.mu_U / (12 * dmin);
  b.gamma_hat = {gh, gh};
  b.region = RegionKind::Nu;
  b.region_fn = [gh, dmin](const Real& lam) { return Real(4) * Real::pi() * lam * Real(gh * dmin); };
  b.region_inv = [gh, dmin](const Real& eps) { return eps / (Real(4) * Real::pi() * Real(gh * dmin)); };
  b.phi_inf = [gh, r](const Real& lam) {
    Real g = lam * Real(gh);
    return g * (Real(2 * r) - g);
  };
  b.phi_inf_inv = [gh, r](const Real& v) {
    // gamma = r - sqrt(r^2 - v)
    return (Real(r) - root(Real(r * r) - v, 2)) / Real(gh);
  };
  b.lambda_valid = std::min(Rational(1), Rational(r / gh));
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  b.safety.C = expression_safety_constant(desc.expr, desc.emax);
  return b;
}

// Top-down in_box bounds for a box with half-lengths ell; q perturbed in every dimension.
inline BoundSet bounds_inbox_topdown(const std::vector<Rational>& ell, const PredicateDescription& desc) {
  auto dl = detail::perturbed(desc.delta);
  const int k = static_cast<int>(ell.size());
  if (static_cast<int>(dl.size()) != k) throw NotAnalyzable("in_box top-down: one perturbed query coordinate per dimension");
  BoundSet b;
  b.name = "in_box_topdown";
  b.mu_U = detail::product_2delta(dl);
  Rational lim = 1;
  for (int i = 0; i < k; ++i) {
    b.gamma_hat.push_back(dl[static_cast<std::size_t>(i)] / 2);
    lim = std::min(lim, Rational(ell[static_cast<std::size_t>(i)] / b.gamma_hat.back()));
  }
  b.lambda_valid = lim;
  std::vector<Rational> gh = b.gamma_hat;
  b.phi_inf = [gh, ell](const Real& lam) {
    std::optional<Real> m;
    for (std::size_t j = 0; j < gh.size(); ++j) {
      Real g = lam * Real(gh[j]);
      Real term = (Real(2 * ell[j]) - g) * g;
      m = m ? min(*m, term) : term;
    }
    return *m;
  };
  const Rational mu = b.mu_U;
  b.region = RegionKind::Chi;
  // prod (2 delta_i - 4 lambda delta_i / 2) = mu (1 - lambda)^k
  b.region_fn = [mu, k](const Real& lam) { return Real(mu) * pow(Real(1) - lam, static_cast<unsigned long>(k)); };
  b.region_inv = [mu, k](const Real& eps) { return Real(1) - root(eps / Real(mu), static_cast<unsigned long>(k)); };
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  b.safety.C = expression_safety_constant(desc.expr, desc.emax);
  return b;
}

// A nonvanishing function: empty critical set, constant lower bound.
inline BoundSet bounds_no_critical_set(const Rational& phi, const PredicateDescription& desc) {
  BoundSet b;
  b.name = "no_critical_set";
  b.mu_U = detail::product_2delta(desc.delta);
  b.region = RegionKind::None;
  b.phi_inf = [phi](const Real&) { return Real(phi); };
  detail::constant_phi_sup(b, desc.expr, desc.emax);
  b.safety.C = expression_safety_constant(desc.expr, desc.emax);
  return b;
}

// ---------------------------------------------------------------- rules

// c1 |g| <= |f| <= c2 |g|; c2 absent keeps only the lower bound.
inline BoundSet rule_sandwich(const BoundSet& g, const Rational& c1, std::optional<Rational> c2 = std::nullopt) {
  if (sgn(c1) <= 0 || (c2 && *c2 < c1)) throw std::invalid_argument("sandwich constants need 0 < c1 <= c2");
  BoundSet f = g;
  f.name = "sandwich(" + g.name + ")";
  auto pi = g.phi_inf;
  f.phi_inf = [pi, c1](const Real& lam) { return Real(c1) * pi(lam); };
  if (g.phi_inf_inv) {
    auto inv = g.phi_inf_inv;
    f.phi_inf_inv = [inv, c1](const Real& v) { return inv(v / Real(c1)); };
  }
  if (c2 && g.phi_sup) {
    auto ps = g.phi_sup;
    Rational c = *c2;
    f.phi_sup = [ps, c](const Real& lam) { return Real(c) * ps(lam); };
  } else {
    f.phi_sup = nullptr;
    f.phi_sup_constant = false;
  }
  return f;
}

// Argument layout of a binary rule: g reads args [0, ell), h reads args [j, k).
struct ArgSplit {
  int j = 0;
  int ell = 0;
  int k = 0;
};

namespace detail {
inline void check_split(const ArgSplit& s, const BoundSet& g, const BoundSet& h) {
  if (!(0 <= s.j && s.j <= s.ell && s.ell <= s.k))
    throw IndexSplitInvalid("need 0 <= j <= ell <= k");
  if (static_cast<int>(g.gamma_hat.size()) != s.ell || static_cast<int>(h.gamma_hat.size()) != s.k - s.j)
    throw IndexSplitInvalid("operand arities do not match the split");
}

// f's gamma direction: shared arguments take the smaller direction.
inline std::vector<Rational> merged_gamma_hat(const ArgSplit& s, const BoundSet& g, const BoundSet& h) {
  std::vector<Rational> out(static_cast<std::size_t>(s.k));
  for (int i = 0; i < s.k; ++i) {
    std::optional<Rational> v;
    if (i < s.ell) v = g.gamma_hat[static_cast<std::size_t>(i)];
    if (i >= s.j) {
      Rational w = h.gamma_hat[static_cast<std::size_t>(i - s.j)];
      v = v ? std::min(*v, w) : w;
    }
    out[static_cast<std::size_t>(i)] = *v;
  }
  return out;
}

// region of the compound; mu_g and mu_h are the operands' own volumes
inline void combine_regions(BoundSet& f, const ArgSplit& s, const BoundSet& g, const BoundSet& h,
                            const std::vector<Rational>& delta) {
  if (delta.size() != static_cast<std::size_t>(s.k)) throw IndexSplitInvalid("radius vector must have k entries");
  f.mu_U = product_2delta(delta);
  if (g.region == RegionKind::None && h.region == RegionKind::None) {
    f.region = RegionKind::None;
    return;
  }
  if (s.j == s.ell) {
    f.region = RegionKind::Chi;
    BoundSet gc = g, hc = h;
    f.region_fn = [gc, hc](const Real& lam) { return gc.chi(lam) * hc.chi(lam); };
    f.region_inv = nullptr;
    return;
  }
  Rational outer_h = 1, outer_g = 1;
  for (int i = s.ell; i < s.k; ++i) outer_h *= 2 * delta[static_cast<std::size_t>(i)];
  for (int i = 0; i < s.j; ++i) outer_g *= 2 * delta[static_cast<std::size_t>(i)];
  BoundSet gc = g, hc = h;
  const Rational mu = f.mu_U;
  f.region = RegionKind::Nu;
  f.region_fn = [gc, hc, outer_h, outer_g, mu](const Real& lam) {
    return min(Real(mu), gc.nu(lam) * Real(outer_h) + hc.nu(lam) * Real(outer_g));
  };
  f.region_inv = nullptr;
}

inline SafetyBound combine_safety(const BoundSet& g, const BoundSet& h, const Expr& e, long emax) {
  if (e) return SafetyBound{expression_safety_constant(e, emax)};
  return SafetyBound{std::max(g.safety.C, h.safety.C)};
}
}  // namespace detail

// f = g * h. The safety bound comes from the realizing expression when one is given.
inline BoundSet rule_product(const BoundSet& g, const BoundSet& h, const ArgSplit& s,
                             const std::vector<Rational>& delta, const Expr& realizing = Expr(), long emax = 0) {
  detail::check_split(s, g, h);
  BoundSet f;
  f.name = "product(" + g.name + "," + h.name + ")";
  f.gamma_hat = detail::merged_gamma_hat(s, g, h);
  detail::combine_regions(f, s, g, h, delta);
  auto gp = g.phi_inf, hp = h.phi_inf;
  f.phi_inf = [gp, hp](const Real& lam) { return gp(lam) * hp(lam); };
  if (g.phi_sup && h.phi_sup) {
    auto gs = g.phi_sup, hs = h.phi_sup;
    f.phi_sup = [gs, hs](const Real& lam) { return gs(lam) * hs(lam); };
    f.phi_sup_constant = g.phi_sup_constant && h.phi_sup_constant;
  }
  f.lambda_valid = std::min(g.lambda_valid, h.lambda_valid);
  f.safety = detail::combine_safety(g, h, realizing, emax);
  return f;
}

enum class MinMax { Min, Max };

// f = min(g, h) or max(g, h). Both use the smaller child bound: |max(g,h)| can equal the
// smaller of |g| and |h| (g = -5, h = 1), so the larger child bound is not a lower bound.
inline BoundSet rule_minmax(const BoundSet& g, const BoundSet& h, MinMax which, const ArgSplit& s,
                            const std::vector<Rational>& delta, const Expr& realizing = Expr(), long emax = 0) {
  detail::check_split(s, g, h);
  BoundSet f;
  f.name = std::string(which == MinMax::Min ? "min(" : "max(") + g.name + "," + h.name + ")";
  f.gamma_hat = detail::merged_gamma_hat(s, g, h);
  detail::combine_regions(f, s, g, h, delta);
  auto gp = g.phi_inf, hp = h.phi_inf;
  f.phi_inf = [gp, hp](const Real& lam) { return min(gp(lam), hp(lam)); };
  if (g.phi_sup && h.phi_sup) {
    auto gs = g.phi_sup, hs = h.phi_sup;
    f.phi_sup = [gs, hs](const Real& lam) { return max(gs(lam), hs(lam)); };
    f.phi_sup_constant = g.phi_sup_constant && h.phi_sup_constant;
  }
  f.lambda_valid = std::min(g.lambda_valid, h.lambda_valid);
  f.safety = detail::combine_safety(g, h, realizing, emax);
  return f;
}

// Precision of f = g / h from the component precision functions.
inline std::function<long(const Rational&)> rational_precision(std::function<long(const Rational&)> Lg,
                                                               std::function<long(const Rational&)> Lh) {
  return [Lg = std::move(Lg), Lh = std::move(Lh)](const Rational& p) {
    Rational q = (1 + p) / 2;
    return std::max(Lg(q), Lh(q));
  };
}

}  // namespace cp
