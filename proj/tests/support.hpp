#pragma once

#include "cp/expr.hpp"
#include "cp/grid.hpp"

#include <algorithm>
#include <functional>

namespace cp::testing {

// Random expression over n inputs built from + - * abs min max and small constants.
inline Expr random_expr(Rng& rng, int n, int depth) {
  if (depth == 0 || rng.below(4) == 0) {
    if (rng.below(5) == 0) {
      long num = static_cast<long>(rng.below(17)) - 8;
      long den = rng.below(2) == 0 ? 4 : 3;
      return cst(make_rational(num, den));
    }
    return var(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
  }
  switch (rng.below(7)) {
    case 0: return random_expr(rng, n, depth - 1) + random_expr(rng, n, depth - 1);
    case 1:
    case 2: return random_expr(rng, n, depth - 1) - random_expr(rng, n, depth - 1);
    case 3:
    case 4: return random_expr(rng, n, depth - 1) * random_expr(rng, n, depth - 1);
    case 5: return abs(random_expr(rng, n, depth - 1));
    default:
      return rng.below(2) == 0 ? min(random_expr(rng, n, depth - 1), random_expr(rng, n, depth - 1))
                               : max(random_expr(rng, n, depth - 1), random_expr(rng, n, depth - 1));
  }
}

// Grid point of G_{L,K,emax}, optionally snapped to a coarser grid to provoke cancellation.
inline std::vector<Rational> random_grid_input(Rng& rng, int n, const GridSpec& g) {
  int coarse = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.L + 1)));
  GridSpec c{coarse, g.K, g.emax};
  PerturbationBox box{std::vector<Rational>(static_cast<std::size_t>(n), Rational(0)),
                      std::vector<Rational>(static_cast<std::size_t>(n), pow2(g.emax))};
  return sample_grid_point(box, rng.below(3) == 0 ? c : g, rng);
}

// Measure of the union of open intervals (c - r, c + r) clipped to [lo, hi].
inline Rational union_measure(std::vector<Rational> centers, const Rational& r, const Rational& lo, const Rational& hi) {
  std::sort(centers.begin(), centers.end());
  Rational total = 0, reach = lo;
  for (const auto& c : centers) {
    Rational a = std::max(Rational(c - r), reach), b = std::min(Rational(c + r), hi);
    if (b > a) {
      total += b - a;
      reach = b;
    }
  }
  return total;
}

// Grid-count ratio of the t*gamma neighborhood against the volume ratio of the gamma neighborhood
// in U = [-2^emax, 2^emax]; true when the grid inequality holds.
inline bool grid_inequality_holds(const std::vector<Rational>& roots, const Rational& gamma, const Rational& t,
                                  const GridSpec& g) {
  Rational lo = -pow2(g.emax), hi = pow2(g.emax);
  auto pts = enumerate_grid(lo, hi, g);
  long inside = 0;
  for (const auto& x : pts) {
    bool near = false;
    for (const auto& r : roots) near = near || rabs(Rational(x - r)) < t * gamma;
    inside += near;
  }
  Rational lhs = Rational(inside) / Rational(static_cast<long>(pts.size()));
  Rational rhs = union_measure(roots, gamma, lo, hi) / (hi - lo);
  return lhs <= rhs;
}

}  // namespace cp::testing
