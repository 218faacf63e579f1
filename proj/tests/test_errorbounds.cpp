#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cp/errorbounds.hpp"
#include "support.hpp"

using namespace cp;

namespace {

Expr product(const Rational& a, int k) {
  Expr e = cst(a);
  for (int i = 0; i < k; ++i) e = e * var(i);
  return e;
}

}  // namespace

TEST_CASE("annotation table") {
  // non-representable leading constant contributes one unit
  for (int k = 1; k <= 5; ++k) {
    Rational a = make_rational(1, 3);
    Annotated an = annotate(product(a, k), 2, 20);
    CHECK(an.ind() == k + 1);
    CHECK(an.sup() == a * pow2(2L * k));
    CHECK(static_bound(an) == Rational(k + 1) * a * pow2(2L * k - 20));
    Annotated exact_a = annotate(product(Rational(3), k), 2, 20);
    CHECK(exact_a.ind() == k);
  }
  Annotated x = annotate(var(0), 3, 10);
  CHECK(x.ind() == 0);
  CHECK(x.sup() == pow2(3));
  CHECK(static_bound(x) == 0);
  Annotated s = annotate(var(0) + var(1), 3, 10);
  CHECK(s.ind() == 1);
  CHECK(s.sup() == pow2(4));
  Annotated m = annotate(max(var(0) * var(1), abs(var(2))), 1, 10);
  CHECK(m.ind() == 1);
  CHECK(m.sup() == 4);
  CHECK_THROWS_AS(annotate(var(0) / var(1), 1, 10), UnsupportedNode);
  Expr e = var(0) * var(1) - var(2);
  CHECK(static_bound(annotate(e, 1, 21)) * 2 == static_bound(annotate(e, 1, 20)));
}

TEST_CASE("dynamic bound of the product example") {
  Rational a = make_rational(1, 3);
  Expr e = product(a, 3);
  std::vector<Rational> x{make_rational(3, 4), make_rational(-5, 4), make_rational(7, 8)};
  Annotated an = annotate(e, 1, 30);
  Rational m = rabs(Rational(a * x[0] * x[1] * x[2]));
  CHECK(dynamic_bound_exact(an, x) == Rational(4) * m * pow2(-30));
  GuardedExpr g(e, 1, Format{30, 8});
  CHECK(dynamic_bound(g, x).to_rational() >= dynamic_bound_exact(an, x));
  std::vector<Rational> zero{Rational(0), make_rational(1, 2), Rational(1)};
  CHECK(dynamic_bound_exact(an, zero) == 0);
  CHECK(dynamic_bound(g, zero).to_rational() == 0);
}

TEST_CASE("guarded evaluation examples") {
  auto v = guarded_eval(var(0), {Rational(1)}, 16, 8);
  CHECK(v.kind == GuardVerdict::Kind::SignCertified);
  CHECK(v.sign == 1);
  Expr orient = (var(2) - var(0)) * (var(5) - var(1)) - (var(3) - var(1)) * (var(4) - var(0));
  std::vector<Rational> col{Rational(0), Rational(0), Rational(1), Rational(1), Rational(2), Rational(2)};
  for (int L = 4; L <= 64; L += 6) CHECK(guarded_eval(orient, col, L, 8).kind == GuardVerdict::Kind::GuardFailed);
  Expr f = var(0) * var(1) - var(2) * var(3);
  std::vector<Rational> x{make_rational(3, 4), make_rational(3, 4), make_rational(9, 16), Rational(1)};
  CHECK(rat_sign(f, x) == 0);
  CHECK(guarded_eval(f, x, 4, 8).kind == GuardVerdict::Kind::GuardFailed);
  CHECK(guarded_eval(f, x, 40, 8).kind == GuardVerdict::Kind::GuardFailed);
  std::vector<Rational> y{make_rational(3, 4), make_rational(3, 4), make_rational(1, 2), Rational(1)};
  auto c = guarded_eval(f, y, 40, 8);
  CHECK(c.kind == GuardVerdict::Kind::SignCertified);
  CHECK(c.sign == rat_sign(f, y));
  // overflow at a tiny exponent range
  auto r = guarded_eval(var(0) * var(0) * var(0), {Rational(8)}, 10, 3);
  CHECK(r.kind == GuardVerdict::Kind::RangeError);
  CHECK(r.range == RangeKind::Overflow);
}

TEST_CASE("top-level division is guarded by both parts") {
  Expr q = (var(0) - cst(make_rational(1, 2))) / (var(1) + cst(1));
  auto v = guarded_eval(q, {Rational(1), Rational(1)}, 20, 8);
  CHECK(v.kind == GuardVerdict::Kind::SignCertified);
  CHECK(v.sign == 1);
  auto w = guarded_eval(q, {Rational(0), Rational(1)}, 20, 8);
  CHECK(w.sign == -1);
  // a pole fails the denominator guard before any division happens
  auto z = guarded_eval(q, {Rational(1), Rational(-1)}, 20, 8);
  CHECK(z.kind == GuardVerdict::Kind::GuardFailed);
  // quotient outside the exponent range
  auto big = guarded_eval(var(0) / var(1), {Rational(16), make_rational(1, 16)}, 10, 3);
  CHECK(big.kind == GuardVerdict::Kind::RangeError);
  CHECK(big.range == RangeKind::Overflow);
  auto f = guarded_eval(q, {make_rational(1, 2), Rational(1)}, 20, 8);
  CHECK(f.kind == GuardVerdict::Kind::GuardFailed);
}

TEST_CASE("safety bounds") {
  SafetyBound s1{safety_lower_univariate(1, {Rational(0), Rational(1)}, 0, 0)};
  CHECK(s1(10) == Rational(3) * pow2(-9));
  CHECK(safety_lower_univariate(1, {Rational(0), Rational(1)}, 0, 10) == Rational(3) * pow2(-9));
  CHECK(safety_lower_univariate(2, {Rational(1), Rational(1), Rational(-1)}, 1, 20) == pow2(-14));
  CHECK(safety_lower_multivariate(2, 1, 1, 1, 10) == Rational(3) * pow2(-7));
  CHECK(safety_lower_multivariate(2, 1, 1, 1, 10) == Rational(2 + 1 + 0) * pow2(2 + 1 - 10));
  CHECK(safety_upper(5, 1) == 65535);
  CHECK(safety_upper(5, 0) == pow2(16));
  for (int K = 2; K < 12; ++K) CHECK(safety_upper(K + 1, 1) > safety_upper(K, 1));
  for (long L = 1; L < 40; ++L) {
    CHECK(safety_lower_univariate(3, {Rational(1), Rational(2), Rational(3), Rational(-5)}, 2, L + 1) * 2 ==
          safety_lower_univariate(3, {Rational(1), Rational(2), Rational(3), Rational(-5)}, 2, L));
    CHECK(safety_lower_multivariate(4, 7, 3, 1, L + 1) * 2 == safety_lower_multivariate(4, 7, 3, 1, L));
  }
  SafetyBound sb{Rational(48)};
  CHECK(sb.ceil_inverse(make_rational(1, 2)) == 7);
  CHECK(sb(7) <= make_rational(1, 2));
  CHECK(sb(6) > make_rational(1, 2));
}

TEST_CASE("guard soundness and bound ordering on random expressions") {
  Rng rng(99);
  int certified = 0;
  for (int i = 0; i < 20000; ++i) {
    int n = 1 + static_cast<int>(rng.below(4));
    Expr e = testing::random_expr(rng, n, 4);
    int L = 8 + static_cast<int>(rng.below(57));
    int K = 4 + static_cast<int>(rng.below(7));
    long emax = static_cast<long>(rng.below(3)) - 1;
    GridSpec g{L, K, emax};
    auto x = testing::random_grid_input(rng, n, g);
    Format f{L, K};
    GuardedExpr ge(e, emax, f);
    auto v = ge.guard(x);
    int exact_sign = rat_sign(e, x);
    if (v.ok()) {
      ++certified;
      CHECK(v.sign == exact_sign);
    }
    try {
      auto ev = ge.evaluate(x);
      Rational exact = rat_eval(e, x);
      Rational dyn = dynamic_bound_exact(ge.annotation(), x);
      CHECK(rabs(Rational(ev.value.to_rational() - exact)) <= dyn);
      CHECK(dyn <= static_bound(ge.annotation()));
      CHECK(ev.bound.to_rational() >= dyn);
    } catch (const RangeError&) {
    }
  }
  CHECK(certified > 5000);
}

TEST_CASE("values above twice the static bound are certified") {
  Rng rng(5);
  int hits = 0;
  for (int i = 0; i < 5000; ++i) {
    int n = 2 + static_cast<int>(rng.below(3));
    Expr e = testing::random_expr(rng, n, 3);
    int L = 10 + static_cast<int>(rng.below(40));
    GridSpec g{L, 12, 1};
    auto x = testing::random_grid_input(rng, n, g);
    GuardedExpr ge(e, 1, Format{L, 12});
    Rational exact = rat_eval(e, x);
    if (rabs(exact) > 2 * static_bound(ge.annotation())) {
      ++hits;
      CHECK(ge.guard(x).ok());
    }
  }
  CHECK(hits > 1000);
}

TEST_CASE("exponent requirement of an expression") {
  Expr e = var(0) * var(1) - var(2);
  int K = exponent_requirement_expr(e, 1, 10);
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    GridSpec g{10, K, 1};
    auto x = testing::random_grid_input(rng, 3, g);
    CHECK(GuardedExpr(e, 1, Format{10, K}).guard(x).kind != GuardVerdict::Kind::RangeError);
  }
  CHECK(exponent_requirement_expr(var(0) * var(0) * var(0) * var(0), 20, 10) >= 8);
}
