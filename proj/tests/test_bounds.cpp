#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cp/bounds.hpp"

using namespace cp;

namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

Rational exact_of(const Real& r) {
  REQUIRE(r.exact());
  return r.rational();
}

bool encloses(const Real& r, double v) { return r.lower_double() <= v + 1e-12 && v - 1e-12 <= r.upper_double(); }

PredicateDescription one_dim(const Expr& e, const Rational& delta) {
  return PredicateDescription::make("f", e, {Rational(0)}, {delta}, 1, q(1, 2));
}

std::vector<Real> sweep() {
  std::vector<Real> out;
  for (int i = 19; i >= 0; --i) out.push_back(Real(make_rational(1, 1) / pow2(i)) * Real(q(15, 16)));
  return out;
}

// in_box(u, v, q) over inputs (ux, uy, vx, vy, qx, qy)
Expr inbox_uvq() {
  return max((var(4) - var(0)) * (var(4) - var(2)), (var(5) - var(1)) * (var(5) - var(3)));
}

Expr inbox_center(const std::vector<Rational>& c, const std::vector<Rational>& ell) {
  Expr acc;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Expr d = var(static_cast<int>(i)) - cst(c[i]);
    Expr term = cst(ell[i] * ell[i]) - d * d;
    acc = acc ? min(acc, term) : term;
  }
  return acc;
}

}  // namespace

TEST_CASE("select_beta") {
  auto a = select_beta({{2, 0}, {0, 1}}, 2);
  CHECK(a == std::vector<ExponentTuple>{{0, 1}, {2, 0}});
  CHECK(select_beta({{3, 1, 2}}, 3) == std::vector<ExponentTuple>{{3, 1, 2}});
  CHECK(select_beta({{1, 1}, {0, 1}, {1, 0}}, 2) == std::vector<ExponentTuple>{{1, 1}});
  CHECK_THROWS_AS(select_beta({ExponentTuple(9, 1)}, 9), ArityTooLarge);
  CHECK(choose_beta(a) == ExponentTuple{0, 1});
  CHECK(choose_beta({{1, 2}, {2, 1}}) == ExponentTuple{1, 2});
}

TEST_CASE("expand and polynomial forms") {
  Expr e = (var(0) - var(1)) * (var(0) + var(1)) + cst(3);
  Polynomial p = expand(e, 2);
  CHECK(p.terms.size() == 3);
  CHECK(p.coeff({2, 0}) == 1);
  CHECK(p.coeff({0, 2}) == -1);
  CHECK(p.coeff({0, 0}) == 3);
  CHECK(p.degree() == 2);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<Rational> x{q(static_cast<long>(rng.below(64)) - 32, 8), q(static_cast<long>(rng.below(64)) - 32, 8)};
    CHECK(rat_eval(polynomial_expr(p), x) == rat_eval(e, x));
  }
  std::vector<Rational> c{q(1, 3), Rational(0), Rational(1), Rational(-2)};
  Expr h = horner_expr(c);
  for (long v = -4; v <= 4; ++v) {
    Rational x = q(v, 2);
    CHECK(rat_eval(h, {x}) == c[0] + c[2] * x * x + c[3] * x * x * x);
  }
}

TEST_CASE("univariate bounds") {
  auto d1 = bounds_univariate({Rational(0), Rational(1)}, one_dim(var(0), Rational(1)));
  for (const auto& lam : sweep()) {
    CHECK(exact_of(d1.nu(lam)) == 2 * exact_of(lam));
    CHECK(exact_of(d1.phi_at(lam)) == exact_of(lam));
  }
  // d=3, a_d=2, gamma=1/4: delta = 3/4 puts gamma_hat at 1/4
  Expr cubic = cst(2) * var(0) * var(0) * var(0);
  auto d3 = bounds_univariate({Rational(0), Rational(0), Rational(0), Rational(2)}, one_dim(cubic, q(3, 4)));
  CHECK(d3.gamma_hat[0] == q(1, 4));
  CHECK(exact_of(d3.phi_at(Real(1))) == q(1, 32));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Rational lam = q(1 + static_cast<long>(rng.below(1000)), 1001);
    CHECK(exact_of(d3.lambda_for_budget(d3.nu(Real(lam)))) == lam);
  }
  CHECK_THROWS_AS(bounds_univariate({Rational(1)}, one_dim(cst(1), Rational(1))), NotAnalyzable);
  CHECK_THROWS_AS(d1.lambda_for_budget(Real(3)), BudgetTooLarge);
}

TEST_CASE("multivariate bounds and the product rule") {
  Expr e = var(0) * var(1);
  auto desc = PredicateDescription::make("x1x2", e, {Rational(0), Rational(0)}, {Rational(1), Rational(1)}, 1, q(1, 2));
  Polynomial p = expand(e, 2);
  auto b = bounds_multivariate(p, {1, 1}, desc);
  auto cube = bounds_multivariate(p, {1, 1}, desc, true);
  Real lam(q(1, 4));
  CHECK(b.gamma(lam)[0].rational() == q(1, 4));
  CHECK(exact_of(b.phi_at(lam)) == q(1, 16));
  CHECK(exact_of(b.chi(lam)) == q(9, 4));
  CHECK(exact_of(cube.chi(lam)) == q(9, 4));
  CHECK(exact_of(b.chi(Real(q(1, 1 << 20)))) < 4);
  CHECK(exact_of(b.chi(Real(0))) == 4);

  // g = x1 and h = x2 as one-input monomials
  auto dg = PredicateDescription::make("x", var(0), {Rational(0)}, {Rational(1)}, 1, q(1, 2));
  Polynomial px = expand(var(0), 1);
  auto g = bounds_multivariate(px, {1}, dg);
  auto f = rule_product(g, g, ArgSplit{1, 1, 2}, {Rational(1), Rational(1)}, e, 1);
  CHECK(f.region == RegionKind::Chi);
  for (const auto& l : sweep()) {
    CHECK(exact_of(f.chi(l)) == exact_of(b.chi(l)));
    CHECK(exact_of(f.phi_at(l)) == exact_of(b.phi_at(l)));
  }
  // shared all arguments: nu sums and is capped at mu(U)
  auto one = bounds_univariate({Rational(0), Rational(1)}, one_dim(var(0), Rational(1)));
  auto shared = rule_product(one, one, ArgSplit{0, 1, 1}, {Rational(1)});
  CHECK(exact_of(shared.nu(Real(q(1, 4)))) == 1);
  CHECK(exact_of(shared.nu(Real(1))) == 2);
  CHECK_THROWS_AS(rule_product(g, g, ArgSplit{2, 1, 2}, {Rational(1), Rational(1)}), IndexSplitInvalid);
  CHECK_THROWS_AS(bounds_multivariate(p, {2, 0}, desc), NotAnalyzable);
}

TEST_CASE("sandwich rule") {
  auto g = bounds_univariate({Rational(0), Rational(1)}, one_dim(var(0), Rational(1)));
  auto same = rule_sandwich(g, 1, Rational(1));
  auto twice = rule_sandwich(g, 2, Rational(3));
  auto lower = rule_sandwich(g, 2);
  for (const auto& l : sweep()) {
    CHECK(exact_of(same.phi_at(l)) == exact_of(g.phi_at(l)));
    CHECK(exact_of(same.nu(l)) == exact_of(g.nu(l)));
    CHECK(exact_of(twice.phi_at(l)) == 2 * exact_of(l));
    CHECK(exact_of(twice.phi_sup(l)) == 3 * exact_of(g.phi_sup(l)));
    CHECK(exact_of(lower.phi_at(l)) == 2 * exact_of(l));
  }
  CHECK(!lower.phi_sup);
  CHECK_THROWS(rule_sandwich(g, 2, Rational(1)));
}

TEST_CASE("min and max rules") {
  auto desc = one_dim(var(0), Rational(1));
  auto g = bounds_univariate({Rational(0), Rational(1)}, desc);
  auto h = bounds_univariate({Rational(0), Rational(0), Rational(1)}, one_dim(var(0) * var(0), Rational(2)));
  // h has gamma_hat 1 as well, so phi_h(lambda) = lambda^2
  ArgSplit s{0, 1, 1};
  auto mn = rule_minmax(g, h, MinMax::Min, s, {Rational(1)});
  auto mx = rule_minmax(g, h, MinMax::Max, s, {Rational(1)});
  Real half(q(1, 2));
  CHECK(exact_of(mn.phi_at(half)) == q(1, 4));
  // the larger child bound is not a lower bound on |max|, so max uses the smaller one too
  CHECK(exact_of(mx.phi_at(half)) == q(1, 4));
  auto ident = rule_minmax(g, g, MinMax::Max, s, {Rational(1)});
  for (const auto& l : sweep()) CHECK(exact_of(ident.phi_at(l)) == exact_of(g.phi_at(l)));
}

TEST_CASE("max of values with large magnitudes can be small") {
  Expr m = max(var(0), var(1));
  CHECK(rat_eval(m, {Rational(-5), Rational(1)}) == 1);
  CHECK(rabs(rat_eval(m, {Rational(-5), Rational(1)})) < std::max(Rational(5), Rational(1)));
}

TEST_CASE("in_box direct bounds") {
  std::vector<Rational> c{Rational(0), Rational(0), Rational(2), Rational(2), Rational(1), Rational(1)};
  std::vector<Rational> d{0, 0, 0, 0, q(1, 2), q(1, 2)};
  auto desc = PredicateDescription::make("in_box", inbox_uvq(), c, d, 2, q(1, 2));
  auto b = bounds_inbox_direct({Rational(0), Rational(0)}, {Rational(2), Rational(2)}, desc);
  CHECK(b.gamma_hat[0] == q(1, 4));
  CHECK(exact_of(b.phi_at(Real(1))) == q(7, 16));
  for (const auto& l : sweep()) {
    Rational g0 = exact_of(b.gamma(l)[0]);
    CHECK(exact_of(b.nu(l)) == 8 * g0 * q(1, 2));
  }
  CHECK(exact_of(b.nu(Real(q(1, 1 << 30)))) < q(1, 1 << 25));
  // narrow box: the validity limit keeps gamma below half the width
  auto narrow = bounds_inbox_direct({Rational(0), Rational(0)}, {q(1, 4), Rational(2)}, desc);
  CHECK(narrow.lambda_valid == q(1, 2));
  CHECK_THROWS_AS(narrow.check_lambda(Real(q(3, 4))), GammaTooLarge);
}

TEST_CASE("in_circle direct bounds") {
  Expr e = (var(3) - var(0)) * (var(3) - var(0)) + (var(4) - var(1)) * (var(4) - var(1)) - var(2) * var(2);
  std::vector<Rational> c{Rational(0), Rational(0), Rational(1), Rational(1), Rational(0)};
  std::vector<Rational> d{0, 0, 0, Rational(1), Rational(2)};
  auto desc = PredicateDescription::make("in_circle", e, c, d, 2, q(1, 2));
  auto b = bounds_incircle_direct(Rational(1), desc);
  CHECK(b.gamma_hat[0] == q(2, 3));
  CHECK(exact_of(b.phi_at(Real(q(3, 4)))) == q(3, 4));
  // gamma = 1/8: nu = 4 pi (1/8) 1 = pi/2
  CHECK(encloses(b.nu(Real(q(3, 16))), 3.14159265358979323846 / 2));
  CHECK(certainly_less(Real(b.mu_U), b.nu(Real(1))));
  CHECK(exact_of(b.phi_at(Real(q(1, 1 << 30)))) < q(1, 1 << 28));
}

TEST_CASE("in_box top-down bounds") {
  auto desc1 = PredicateDescription::make("in_box", inbox_center({Rational(0)}, {Rational(1)}), {Rational(0)},
                                          {q(1, 2)}, 1, q(1, 2));
  auto b1 = bounds_inbox_topdown({Rational(1)}, desc1);
  CHECK(exact_of(b1.phi_at(Real(1))) == q(7, 16));
  auto desc2 = PredicateDescription::make("in_box", inbox_center({Rational(0)}, {Rational(1)}), {Rational(0)},
                                          {Rational(1)}, 1, q(1, 2));
  auto b2 = bounds_inbox_topdown({Rational(1)}, desc2);
  CHECK(exact_of(b2.chi(Real(q(1, 4)))) == q(3, 2));
  CHECK(exact_of(b2.chi(Real(0))) == 2);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    Rational lam = q(1 + static_cast<long>(rng.below(1000)), 1001);
    CHECK(exact_of(b2.lambda_for_budget(b2.chi(Real(lam)))) == lam);
  }
}

TEST_CASE("rational precision composition") {
  auto Lg = [](const Rational& p) { return static_cast<long>(10 + floor_log2(Rational(1 / (1 - p)))); };
  auto Lh = [](const Rational& p) { return static_cast<long>(12 * (p > q(1, 2) ? 2 : 1)); };
  auto same = rational_precision(Lg, Lg);
  for (long i = 1; i < 20; ++i) {
    Rational p = q(i, 20);
    CHECK(same(p) == Lg((1 + p) / 2));
  }
  std::vector<Rational> seen;
  auto spy = [&](const Rational& p) {
    seen.push_back(p);
    return 1L;
  };
  rational_precision(spy, spy)(q(1, 2));
  CHECK(seen == std::vector<Rational>{q(3, 4), q(3, 4)});
  Rational p = q(7, 10);
  CHECK(2 * (1 - (1 + p) / 2) == 1 - p);
  CHECK(rational_precision(Lg, Lh)(p) == std::max(Lg(q(17, 20)), Lh(q(17, 20))));
}

TEST_CASE("bound set invariants on a lambda sweep") {
  std::vector<BoundSet> sets;
  sets.push_back(bounds_univariate({Rational(1), Rational(-3), Rational(0), Rational(2)},
                                   one_dim(horner_expr({Rational(1), Rational(-3), Rational(0), Rational(2)}), Rational(1))));
  Expr e = var(0) * var(1) * var(1) - var(0);
  auto dm = PredicateDescription::make("m", e, {Rational(0), Rational(0)}, {Rational(1), q(1, 2)}, 1, q(1, 2));
  Polynomial pm = expand(e, 2);
  sets.push_back(bounds_multivariate(pm, choose_beta(select_beta(pm.support(), 2)), dm));
  std::vector<Rational> c{Rational(0), Rational(0), Rational(2), Rational(2), Rational(1), Rational(1)};
  std::vector<Rational> d{0, 0, 0, 0, q(1, 2), q(1, 2)};
  sets.push_back(bounds_inbox_direct({Rational(0), Rational(0)}, {Rational(2), Rational(2)},
                                     PredicateDescription::make("b", inbox_uvq(), c, d, 2, q(1, 2))));
  sets.push_back(bounds_inbox_topdown({Rational(1), Rational(1)},
                                      PredicateDescription::make("t", inbox_center({0, 0}, {1, 1}), {0, 0},
                                                                 {q(1, 2), q(1, 2)}, 1, q(1, 2))));
  for (const auto& b : sets) {
    CAPTURE(b.name);
    std::optional<Real> prev_nu, prev_phi, prev_chi;
    for (const auto& l : sweep()) {
      Real nu = b.nu(l), phi = b.phi_at(l), chi = b.chi(l);
      CHECK(!nu.certainly_negative());
      CHECK(phi.certainly_positive());
      CHECK(chi.certainly_positive());
      CHECK(certainly_less(phi, b.phi_sup(l)));
      if (prev_nu) {
        CHECK(!certainly_less(nu, *prev_nu));
        CHECK(certainly_less(*prev_phi, phi));
        CHECK(!certainly_less(*prev_chi, chi));
      }
      prev_nu = nu;
      prev_phi = phi;
      prev_chi = chi;
      Real eps = b.region == RegionKind::Chi ? chi : nu;
      Real back = b.lambda_for_budget(eps);
      if (back.exact() && l.exact())
        CHECK(back.rational() == l.rational());
      else
        CHECK(encloses(back, l.to_double()));
      auto lp = b.lambda_for_phi(phi);
      REQUIRE(lp);
      CHECK(encloses(*lp, l.to_double()));
    }
  }
}

TEST_CASE("empirical phi soundness outside the region of uncertainty") {
  Rng rng(11);
  GridSpec g{20, 10, 1};
  SUBCASE("univariate with known real roots") {
    // 2 (x - 1/4)(x + 1/2)(x - 3/4)
    std::vector<Rational> roots{q(1, 4), q(-1, 2), q(3, 4)};
    Expr e = cst(2) * (var(0) - cst(roots[0])) * (var(0) - cst(roots[1])) * (var(0) - cst(roots[2]));
    Polynomial p = expand(e, 1);
    std::vector<Rational> coeffs(4);
    for (const auto& [t, c] : p.terms) coeffs[static_cast<std::size_t>(t[0])] = c;
    auto b = bounds_univariate(coeffs, one_dim(e, Rational(1)));
    for (int i = 0; i < 10000; ++i) {
      Rational lam = q(1 + static_cast<long>(rng.below(255)), 256);
      Rational gam = exact_of(b.gamma(Real(lam))[0]);
      auto x = sample_grid_point(PerturbationBox{{0}, {1}}, g, rng);
      bool outside = true;
      for (const auto& r : roots) outside = outside && rabs(Rational(x[0] - r)) > gam;
      if (!outside) continue;
      CHECK(rabs(rat_eval(e, x)) >= exact_of(b.phi_at(Real(lam))));
    }
  }
  SUBCASE("monomial") {
    Expr e = cst(3) * var(0) * var(0) * var(1);
    auto desc = PredicateDescription::make("m", e, {0, 0}, {1, 1}, 1, q(1, 2));
    auto b = bounds_multivariate(expand(e, 2), {2, 1}, desc);
    for (int i = 0; i < 10000; ++i) {
      Real lam(q(1 + static_cast<long>(rng.below(255)), 256));
      auto gam = b.gamma(lam);
      auto x = sample_grid_point(desc.box(), g, rng);
      if (rabs(x[0]) <= gam[0].rational() || rabs(x[1]) <= gam[1].rational()) continue;
      CHECK(rabs(rat_eval(e, x)) >= exact_of(b.phi_at(lam)));
    }
  }
  SUBCASE("in_box direct") {
    std::vector<Rational> c{Rational(0), Rational(0), Rational(2), Rational(2), Rational(1), Rational(1)};
    std::vector<Rational> d{0, 0, 0, 0, Rational(1), Rational(1)};
    auto desc = PredicateDescription::make("b", inbox_uvq(), c, d, 2, q(1, 2));
    auto b = bounds_inbox_direct({Rational(0), Rational(0)}, {Rational(2), Rational(2)}, desc);
    GridSpec gb{20, 10, 2};
    for (int i = 0; i < 10000; ++i) {
      Real lam(q(1 + static_cast<long>(rng.below(255)), 256));
      auto gam = b.gamma(lam);
      auto x = sample_grid_point(desc.box(), gb, rng);
      Rational qx = x[4], qy = x[5];
      // distance to the boundary of [0,2]^2 in the maximum norm
      auto axis = [](const Rational& v) { return std::min(rabs(v), rabs(Rational(v - 2))); };
      bool in_x = qx >= 0 && qx <= 2, in_y = qy >= 0 && qy <= 2;
      bool near = (in_y && axis(qx) <= gam[0].rational()) || (in_x && axis(qy) <= gam[1].rational()) ||
                  (axis(qx) <= gam[0].rational() && axis(qy) <= gam[1].rational());
      if (near) continue;
      CHECK(rabs(rat_eval(desc.expr, x)) >= exact_of(b.phi_at(lam)));
    }
  }
  SUBCASE("in_circle direct") {
    Expr e = (var(3) - var(0)) * (var(3) - var(0)) + (var(4) - var(1)) * (var(4) - var(1)) - var(2) * var(2);
    std::vector<Rational> c{Rational(0), Rational(0), Rational(1), Rational(1), Rational(0)};
    std::vector<Rational> d{0, 0, 0, q(1, 2), q(1, 2)};
    auto desc = PredicateDescription::make("c", e, c, d, 2, q(1, 2));
    auto b = bounds_incircle_direct(Rational(1), desc);
    GridSpec gc{20, 10, 2};
    for (int i = 0; i < 10000; ++i) {
      Real lam(q(1 + static_cast<long>(rng.below(255)), 256));
      Rational gam = b.gamma(lam)[0].rational();
      auto x = sample_grid_point(desc.box(), gc, rng);
      Rational r2 = x[3] * x[3] + x[4] * x[4];
      // |q| outside (1 - gam, 1 + gam)
      Rational lo = 1 - gam, hi = 1 + gam;
      if (r2 > lo * lo && r2 < hi * hi) continue;
      CHECK(rabs(rat_eval(e, x)) >= exact_of(b.phi_at(lam)));
    }
  }
  SUBCASE("in_box top-down") {
    std::vector<Rational> center{q(1, 4), Rational(0)}, ell{Rational(1), q(1, 2)};
    Expr e = inbox_center(center, ell);
    auto desc = PredicateDescription::make("t", e, {Rational(1), q(1, 2)}, {q(1, 2), q(1, 2)}, 1, q(1, 2));
    auto b = bounds_inbox_topdown(ell, desc);
    for (int i = 0; i < 10000; ++i) {
      Real lam(q(1 + static_cast<long>(rng.below(255)), 256));
      auto gam = b.gamma(lam);
      auto x = sample_grid_point(desc.box(), g, rng);
      bool near = false;
      for (std::size_t j = 0; j < 2; ++j) {
        Rational dist = rabs(Rational(rabs(Rational(x[j] - center[j])) - ell[j]));
        near = near || dist <= gam[j].rational();
      }
      if (near) continue;
      CHECK(rabs(rat_eval(e, x)) >= exact_of(b.phi_at(lam)));
    }
  }
}

TEST_CASE("empirical nu soundness in one dimension") {
  // roots 1/3 and -1/5 are off the grid; 2 tau d slack covers the discretization
  Expr e = (var(0) - cst(q(1, 3))) * (var(0) + cst(q(1, 5)));
  std::vector<Rational> roots{q(1, 3), q(-1, 5)};
  Polynomial p = expand(e, 1);
  std::vector<Rational> coeffs(3);
  for (const auto& [t, c] : p.terms) coeffs[static_cast<std::size_t>(t[0])] = c;
  auto b = bounds_univariate(coeffs, one_dim(e, Rational(1)));
  GridSpec g{12, 10, 1};
  auto pts = enumerate_grid(-1, 1, g);
  for (int i = 1; i <= 64; ++i) {
    Real lam(q(i, 64));
    Rational gam = exact_of(b.gamma(lam)[0]);
    long count = 0;
    for (const auto& x : pts) {
      bool near = false;
      for (const auto& r : roots) near = near || rabs(Rational(x - r)) < gam;
      count += near;
    }
    CHECK(Rational(count) * g.tau() <= exact_of(b.nu(lam)) + 2 * g.tau() * 2);
  }
}
