#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cp/errorbounds.hpp"
#include "cp/expr.hpp"
#include "cp/grid.hpp"

using namespace cp;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/4") == make_rational(3, 4));
  CHECK(parse_rational("-6/8") == make_rational(-3, 4));
  CHECK(parse_rational("0.375") == make_rational(3, 8));
  CHECK(parse_rational("-1.5e1") == Rational(-15));
  CHECK(parse_rational("25e-2") == make_rational(1, 4));
  CHECK(parse_rational("0.1") == make_rational(1, 10));
  CHECK_THROWS_AS(parse_rational("0.1", true), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("abc"), ParseError);
  CHECK_THROWS_AS(parse_rational(""), ParseError);
}

TEST_CASE("exact logarithms") {
  CHECK(floor_log2(Rational(1)) == 0);
  CHECK(ceil_log2(Rational(1)) == 0);
  CHECK(floor_log2(make_rational(1, 3)) == -2);
  CHECK(ceil_log2(make_rational(1, 3)) == -1);
  CHECK(floor_log2(Rational(48)) == 5);
  CHECK(ceil_log2(Rational(48)) == 6);
  CHECK(floor_log2(make_rational(1, 16)) == -4);
  CHECK(ceil_log2(make_rational(1, 16)) == -4);
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    Rational x = make_rational(1 + static_cast<long>(rng.below(1u << 20)), 1 + static_cast<long>(rng.below(1u << 20)));
    long f = floor_log2(x), c = ceil_log2(x);
    CHECK(pow2(f) <= x);
    CHECK(x < pow2(f + 1));
    CHECK(x <= pow2(c));
    CHECK(pow2(c - 1) < x);
  }
}

TEST_CASE("rat_eval and rat_sign") {
  Expr e = var(0) * var(1) - cst(1);
  CHECK(rat_eval(e, {Rational(2), make_rational(1, 2)}) == 0);
  CHECK_THROWS_AS(rat_eval(cst(1) / var(0), {Rational(0)}), ExactPole);
  CHECK(rat_sign(var(0) * var(0) + cst(1), {Rational(5)}) == 1);
  Expr m = max(abs(var(0)) - cst(1), min(var(0), var(1)));
  CHECK(rat_eval(m, {Rational(-3), Rational(1)}) == 2);
  CHECK(rat_eval(m, {make_rational(1, 2), Rational(-4)}) == make_rational(-1, 2));
}

TEST_CASE("prefix expression format") {
  Expr e = parse_expr("(sub (mul x0 x3) (mul x1 x2))");
  CHECK(e.str() == "(sub (mul x0 x3) (mul x1 x2))");
  CHECK(e.num_inputs() == 4);
  CHECK(rat_eval(e, {Rational(1), Rational(2), Rational(3), Rational(4)}) == -2);
  Expr n = parse_expr("(add x0 x1 3/4)");
  CHECK(n.str() == "(add (add x0 x1) 3/4)");
  CHECK(parse_expr(e.str()).str() == e.str());
  CHECK(parse_expr("(div 1 (abs x0))").op() == Op::Div);
  CHECK_THROWS_AS(parse_expr("(foo x0 x1)"), ParseError);
  CHECK_THROWS_AS(parse_expr("(add x0"), ParseError);
  CHECK_THROWS_AS(parse_expr("(abs x0 x1)"), ParseError);
  CHECK_THROWS_AS(parse_expr("x0 x1"), ParseError);
}

TEST_CASE("softfloat evaluation converges to the exact value") {
  Expr e = (var(0) * var(1) - var(2)) * (var(0) + var(2)) - cst(make_rational(1, 3)) * var(1);
  Rng rng(5);
  PerturbationBox box{{Rational(0), Rational(0), Rational(0)}, {Rational(2), Rational(2), Rational(2)}};
  GridSpec g{16, 16, 1};
  for (int i = 0; i < 200; ++i) {
    auto x = sample_grid_point(box, g, rng);
    Rational exact = rat_eval(e, x);
    Rational prev_bound = -1;
    for (int L : {16, 32, 64, 128}) {
      GuardedExpr ge(e, 1, Format{L, 16});
      auto ev = ge.evaluate(x);
      Rational err = rabs(Rational(ev.value.to_rational() - exact));
      Rational sb = static_bound(ge.annotation());
      CHECK(err <= sb);
      if (prev_bound >= 0) CHECK(sb * 2 <= prev_bound);
      prev_bound = sb;
    }
  }
}
