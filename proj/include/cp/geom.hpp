#pragma once

#include "cp/algo.hpp"
#include "cp/bounds.hpp"
#include "cp/errorbounds.hpp"
#include "cp/expr.hpp"
#include "cp/rational.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace cp {

// ---------------------------------------------------------------- predicate expressions

// orient(p, q, r) over (px, py, qx, qy, rx, ry); positive for a left turn
inline Expr orientation2d_expr() {
  return (var(2) - var(0)) * (var(5) - var(1)) - (var(3) - var(1)) * (var(4) - var(0));
}

// in_box(u, v, q) over (ux, uy, vx, vy, qx, qy); negative inside
inline Expr inbox_expr() {
  return max((var(4) - var(0)) * (var(4) - var(2)), (var(5) - var(1)) * (var(5) - var(3)));
}

// in_box for a fixed box with center c and half-lengths ell over the query coordinates; positive inside
inline Expr inbox_center_expr(const std::vector<Rational>& c, const std::vector<Rational>& ell) {
  Expr acc;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Expr d = var(static_cast<int>(i)) - cst(c[i]);
    Expr term = cst(ell[i] * ell[i]) - d * d;
    acc = acc ? min(acc, term) : term;
  }
  return acc;
}

// in_circle(c, r, q) over (cx, cy, r, qx, qy); negative inside
inline Expr incircle_expr() {
  Expr dx = var(3) - var(0), dy = var(4) - var(1);
  return dx * dx + dy * dy - var(2) * var(2);
}

// (x0^2 - 1/4) / (x1 + 3/4)
inline Expr rational_sample_expr() {
  return (var(0) * var(0) - cst(make_rational(1, 4))) / (var(1) + cst(make_rational(3, 4)));
}

// ---------------------------------------------------------------- predicate instances

struct PredicateInstance {
  std::string name;
  Expr expr;
  PredicateDescription desc;
  BoundSet bounds;
};

inline PredicateInstance univariate_instance(const std::vector<Rational>& coeffs, const Rational& center,
                                             const Rational& delta, std::optional<long> emax = std::nullopt,
                                             const Rational& t = make_rational(1, 2)) {
  Expr e = horner_expr(coeffs);
  auto d = emax ? PredicateDescription::make("univariate", e, {center}, {delta}, *emax, t)
                : PredicateDescription::make("univariate", e, {center}, {delta}, t);
  return {"univariate", e, d, bounds_univariate(coeffs, d)};
}

inline PredicateInstance multivariate_instance(const Expr& e, const std::vector<Rational>& center,
                                               const std::vector<Rational>& delta, std::optional<long> emax = std::nullopt,
                                               const Rational& t = make_rational(1, 2), bool cubical = false) {
  const int k = static_cast<int>(center.size());
  auto d = emax ? PredicateDescription::make("multivariate", e, center, delta, *emax, t)
                : PredicateDescription::make("multivariate", e, center, delta, t);
  Polynomial p = expand(e, k);
  ExponentTuple beta = choose_beta(select_beta(p.support(), k));
  return {"multivariate", e, d, bounds_multivariate(p, beta, d, cubical)};
}

// points p, q, r in the flat coordinate vector, each perturbed by delta per coordinate
inline PredicateInstance orientation2d_instance(const std::vector<Rational>& pqr, const Rational& delta,
                                                std::optional<long> emax = std::nullopt,
                                                const Rational& t = make_rational(1, 2)) {
  auto inst = multivariate_instance(orientation2d_expr(), pqr, std::vector<Rational>(6, delta), emax, t);
  inst.name = inst.desc.name = "orientation2d";
  return inst;
}

inline PredicateInstance inbox_instance(const std::vector<Rational>& u, const std::vector<Rational>& v,
                                        const std::vector<Rational>& q, const std::vector<Rational>& delta_q,
                                        std::optional<long> emax = std::nullopt,
                                        const Rational& t = make_rational(1, 2)) {
  std::vector<Rational> c{u[0], u[1], v[0], v[1], q[0], q[1]};
  std::vector<Rational> d{0, 0, 0, 0, delta_q[0], delta_q[1]};
  auto desc = emax ? PredicateDescription::make("in_box", inbox_expr(), c, d, *emax, t)
                   : PredicateDescription::make("in_box", inbox_expr(), c, d, t);
  return {"in_box", desc.expr, desc, bounds_inbox_direct(u, v, desc)};
}

inline PredicateInstance inbox_topdown_instance(const std::vector<Rational>& c, const std::vector<Rational>& ell,
                                                const std::vector<Rational>& q, const std::vector<Rational>& delta_q,
                                                std::optional<long> emax = std::nullopt,
                                                const Rational& t = make_rational(1, 2)) {
  Expr e = inbox_center_expr(c, ell);
  auto desc = emax ? PredicateDescription::make("in_box", e, q, delta_q, *emax, t)
                   : PredicateDescription::make("in_box", e, q, delta_q, t);
  return {"in_box", e, desc, bounds_inbox_topdown(ell, desc)};
}

inline PredicateInstance incircle_instance(const std::vector<Rational>& c, const Rational& r,
                                           const std::vector<Rational>& q, const std::vector<Rational>& delta_q,
                                           std::optional<long> emax = std::nullopt,
                                           const Rational& t = make_rational(1, 2)) {
  std::vector<Rational> center{c[0], c[1], r, q[0], q[1]};
  std::vector<Rational> d{0, 0, 0, delta_q[0], delta_q[1]};
  auto desc = emax ? PredicateDescription::make("in_circle", incircle_expr(), center, d, *emax, t)
                   : PredicateDescription::make("in_circle", incircle_expr(), center, d, t);
  return {"in_circle", desc.expr, desc, bounds_incircle_direct(r, desc)};
}

// numerator and denominator of the rational sample as separate instances over (x0, x1)
inline std::pair<PredicateInstance, PredicateInstance> rational_sample_parts(const std::vector<Rational>& center,
                                                                             const std::vector<Rational>& delta,
                                                                             std::optional<long> emax = std::nullopt,
                                                                             const Rational& t = make_rational(1, 2)) {
  Expr f = rational_sample_expr();
  auto make = [&](const std::string& name, const Expr& e, std::vector<Rational> d) {
    return emax ? PredicateDescription::make(name, e, center, std::move(d), *emax, t)
                : PredicateDescription::make(name, e, center, std::move(d), t);
  };
  auto dg = make("rational.numerator", f.child(0), {delta[0], 0});
  auto dh = make("rational.denominator", f.child(1), {0, delta[1]});
  dg.emax = dh.emax = std::max(dg.emax, dh.emax);
  PredicateInstance g{"rational.numerator", f.child(0), dg,
                      bounds_univariate({make_rational(-1, 4), Rational(0), Rational(1)}, dg)};
  PredicateInstance h{"rational.denominator", f.child(1), dh, bounds_univariate({make_rational(3, 4), Rational(1)}, dh)};
  return {g, h};
}

// ---------------------------------------------------------------- convex hull

using Point2 = std::pair<Rational, Rational>;
using Hull = std::vector<int>;

inline std::vector<Rational> flatten(const std::vector<Point2>& pts) {
  std::vector<Rational> out;
  for (const auto& [x, y] : pts) {
    out.push_back(x);
    out.push_back(y);
  }
  return out;
}

inline std::vector<Point2> unflatten(const std::vector<Rational>& y) {
  if (y.size() % 2 != 0) throw std::invalid_argument("odd coordinate count");
  std::vector<Point2> out;
  for (std::size_t i = 0; i < y.size(); i += 2) out.emplace_back(y[i], y[i + 1]);
  return out;
}

namespace detail {
// Andrew's monotone chain on an index order sorted by (x, y); sign(i, j, k) gives orientation.
// Returns counterclockwise vertex indices starting at the smallest point, or nullopt when sign aborts.
template <class Sign>
std::optional<Hull> monotone_chain(const std::vector<Point2>& pts, Sign&& sign) {
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return pts[static_cast<std::size_t>(a)] < pts[static_cast<std::size_t>(b)]; });
  std::vector<int> h;
  auto push = [&](int i, std::size_t floor) -> bool {
    while (h.size() >= floor) {
      auto s = sign(h[h.size() - 2], h.back(), i);
      if (!s) return false;
      if (*s > 0) break;
      h.pop_back();
    }
    h.push_back(i);
    return true;
  };
  for (int i : idx)
    if (!push(i, 2)) return std::nullopt;
  const std::size_t floor = h.size() + 1;
  for (std::size_t i = idx.size() - 1; i-- > 0;)
    if (!push(idx[i], floor)) return std::nullopt;
  h.pop_back();
  return h;
}
}  // namespace detail

// Guarded monotone chain: every orientation sign must be certified.
inline GuardedOutcome<Hull> guarded_convex_hull(const std::vector<Point2>& pts, const Format& f) {
  if (pts.size() < 3) throw std::invalid_argument("hull needs at least 3 points");
  Rational m = 0;
  for (const auto& [x, y] : pts) m = std::max({m, rabs(x), rabs(y)});
  long emax = sgn(m) == 0 ? 0 : ceil_log2(m);
  GuardedExpr ge(orientation2d_expr(), emax, f);
  long evals = 0;
  std::optional<Outcome> failure;
  auto sign = [&](int a, int b, int c) -> std::optional<int> {
    const auto &p = pts[static_cast<std::size_t>(a)], &q = pts[static_cast<std::size_t>(b)],
               &r = pts[static_cast<std::size_t>(c)];
    ++evals;
    auto v = ge.guard({p.first, p.second, q.first, q.second, r.first, r.second});
    if (v.ok()) return v.sign;
    failure = v.kind == GuardVerdict::Kind::RangeError ? Outcome::RangeError : Outcome::GuardFailure;
    return std::nullopt;
  };
  auto h = detail::monotone_chain(pts, sign);
  if (!h) return GuardedOutcome<Hull>::failure(*failure, evals);
  return GuardedOutcome<Hull>::success(std::move(*h), evals);
}

inline GuardedAlgorithm<Hull> hull_algorithm() {
  return [](const std::vector<Rational>& y, const Format& f) { return guarded_convex_hull(unflatten(y), f); };
}

// Exact hull by gift wrapping: strict vertices, counterclockwise from the smallest (x, y) point.
inline Hull rational_hull(const std::vector<Point2>& pts) {
  const Expr o = orientation2d_expr();
  auto orient = [&](int a, int b, int c) {
    const auto &p = pts[static_cast<std::size_t>(a)], &q = pts[static_cast<std::size_t>(b)],
               &r = pts[static_cast<std::size_t>(c)];
    return rat_sign(o, {p.first, p.second, q.first, q.second, r.first, r.second});
  };
  auto dist2 = [&](int a, int b) {
    Rational dx = pts[static_cast<std::size_t>(a)].first - pts[static_cast<std::size_t>(b)].first;
    Rational dy = pts[static_cast<std::size_t>(a)].second - pts[static_cast<std::size_t>(b)].second;
    return Rational(dx * dx + dy * dy);
  };
  const int n = static_cast<int>(pts.size());
  int start = 0;
  for (int i = 1; i < n; ++i)
    if (pts[static_cast<std::size_t>(i)] < pts[static_cast<std::size_t>(start)]) start = i;
  Hull h;
  int cur = start;
  do {
    h.push_back(cur);
    int next = -1;
    for (int i = 0; i < n; ++i) {
      if (pts[static_cast<std::size_t>(i)] == pts[static_cast<std::size_t>(cur)]) continue;
      if (next < 0) {
        next = i;
        continue;
      }
      int s = orient(cur, next, i);
      // i is to the right of cur->next, or collinear and farther
      if (s < 0 || (s == 0 && dist2(cur, i) > dist2(cur, next))) next = i;
    }
    if (next < 0) break;
    cur = next;
  } while (pts[static_cast<std::size_t>(cur)] != pts[static_cast<std::size_t>(start)] &&
           h.size() <= pts.size());
  return h;
}

// Orientation evaluations of the monotone chain: each point is pushed and popped at most twice per chain.
inline Integer hull_evaluation_bound(long n) { return Integer(4 * n); }

// Hull as an algorithm description: orientation with radius delta per coordinate on points within 2^emax.
inline AlgorithmDescription hull_description(const PerturbationShape& shape, long emax,
                                             const Rational& t = make_rational(1, 2)) {
  Rational hw = shape.sampling_half_width();
  auto inst = orientation2d_instance(std::vector<Rational>(6, Rational(0)), hw, emax, t);
  return {{{inst.name, inst.desc, inst.bounds}}, hull_evaluation_bound, shape};
}

// ---------------------------------------------------------------- input

struct PointParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV "x,y" rows of p/q or decimal rationals; values must be dyadic. Blank lines, '#' comments
// and a leading "x,y" header are skipped.
inline std::vector<Point2> parse_points_csv(std::istream& in) {
  std::vector<Point2> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw PointParseError("line " + std::to_string(lineno) + ": expected x,y");
    std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
    if (out.empty() && lineno == 1 && xs.find_first_of("xX") != std::string::npos) continue;
    try {
      out.emplace_back(parse_rational(xs, true), parse_rational(ys, true));
    } catch (const ParseError& e) {
      throw PointParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cp
