#pragma once

#include "cp/expr.hpp"
#include "cp/rational.hpp"
#include "cp/softfloat.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cp {

struct UnsupportedNode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flattened expression (children before parents, root last) with ind/sup per node.
struct Annotated {
  struct Node {
    Op op;
    int a = -1, b = -1;
    int index = -1;
    Rational value;
    long ind = 0;
    Rational sup;
  };
  std::vector<Node> nodes;
  int L = 0;

  const Node& root() const { return nodes.back(); }
  long ind() const { return root().ind; }
  const Rational& sup() const { return root().sup; }
};

namespace detail {
inline int flatten(const ExprNode& n, const std::vector<Rational>& input_sup, int L, Annotated& out) {
  Annotated::Node node;
  node.op = n.op;
  switch (n.op) {
    case Op::Const:
      node.value = n.value;
      node.ind = representable(n.value, Format{L, Format::max_K}) ? 0 : 1;
      node.sup = rabs(n.value);
      break;
    case Op::Input:
      if (n.index < 0 || static_cast<std::size_t>(n.index) >= input_sup.size())
        throw std::out_of_range("no domain bound for input x" + std::to_string(n.index));
      node.index = n.index;
      node.ind = 0;
      node.sup = input_sup[static_cast<std::size_t>(n.index)];
      break;
    case Op::Div:
      throw UnsupportedNode("division inside an annotated expression");
    case Op::Abs: {
      node.a = flatten(*n.kids[0], input_sup, L, out);
      node.ind = out.nodes[static_cast<std::size_t>(node.a)].ind;
      node.sup = out.nodes[static_cast<std::size_t>(node.a)].sup;
      break;
    }
    default: {
      node.a = flatten(*n.kids[0], input_sup, L, out);
      node.b = flatten(*n.kids[1], input_sup, L, out);
      const auto& x = out.nodes[static_cast<std::size_t>(node.a)];
      const auto& y = out.nodes[static_cast<std::size_t>(node.b)];
      if (n.op == Op::Add || n.op == Op::Sub) {
        node.ind = 1 + std::max(x.ind, y.ind);
        node.sup = x.sup + y.sup;
      } else if (n.op == Op::Mul) {
        node.ind = 1 + x.ind + y.ind;
        node.sup = x.sup * y.sup;
      } else {
        node.ind = std::max(x.ind, y.ind);
        node.sup = std::max(x.sup, y.sup);
      }
    }
  }
  out.nodes.push_back(std::move(node));
  return static_cast<int>(out.nodes.size()) - 1;
}
}  // namespace detail

// input_sup[i] bounds |x_i| over the perturbation domain.
inline Annotated annotate(const Expr& e, const std::vector<Rational>& input_sup, int L) {
  Annotated out;
  out.L = L;
  detail::flatten(*e.raw(), input_sup, L, out);
  return out;
}

inline Annotated annotate(const Expr& e, long emax, int L) {
  std::vector<Rational> sup(static_cast<std::size_t>(std::max(e.num_inputs(), 0)), pow2(emax));
  return annotate(e, sup, L);
}

inline Rational static_bound(const Annotated& a, int L) { return Rational(a.ind()) * a.sup() * pow2(-L); }

inline Rational static_bound(const Annotated& a) { return static_bound(a, a.L); }

// ind * mes * 2^-L where mes composes |x| and |c| like sup does, computed exactly.
inline Rational dynamic_bound_exact(const Annotated& a, const std::vector<Rational>& x) {
  std::vector<Rational> mes(a.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& n = a.nodes[i];
    switch (n.op) {
      case Op::Const: mes[i] = rabs(n.value); break;
      case Op::Input: mes[i] = rabs(x.at(static_cast<std::size_t>(n.index))); break;
      case Op::Abs: mes[i] = mes[static_cast<std::size_t>(n.a)]; break;
      case Op::Add:
      case Op::Sub: mes[i] = mes[static_cast<std::size_t>(n.a)] + mes[static_cast<std::size_t>(n.b)]; break;
      case Op::Mul: mes[i] = mes[static_cast<std::size_t>(n.a)] * mes[static_cast<std::size_t>(n.b)]; break;
      default: mes[i] = std::max(mes[static_cast<std::size_t>(n.a)], mes[static_cast<std::size_t>(n.b)]);
    }
  }
  return Rational(a.ind()) * mes.back() * pow2(-a.L);
}

struct GuardVerdict {
  enum class Kind { SignCertified, GuardFailed, RangeError };
  Kind kind = Kind::GuardFailed;
  int sign = 0;
  RangeKind range = RangeKind::Overflow;

  static GuardVerdict certified(int s) { return {Kind::SignCertified, s, RangeKind::Overflow}; }
  static GuardVerdict failed() { return {Kind::GuardFailed, 0, RangeKind::Overflow}; }
  static GuardVerdict range_error(RangeKind k) { return {Kind::RangeError, 0, k}; }

  bool ok() const { return kind == Kind::SignCertified; }
};

inline const char* to_string(GuardVerdict::Kind k) {
  switch (k) {
    case GuardVerdict::Kind::SignCertified: return "sign_certified";
    case GuardVerdict::Kind::GuardFailed: return "guard_failed";
    case GuardVerdict::Kind::RangeError: return "range_error";
  }
  return "?";
}

// Softfloat evaluation of an annotated expression together with its upward-rounded
// dynamic error bound.
class GuardedExpr {
 public:
  GuardedExpr(const Expr& e, const std::vector<Rational>& input_sup, Format f)
      : ann_(annotate(e, input_sup, f.L)), fmt_(f) {}
  GuardedExpr(const Expr& e, long emax, Format f) : ann_(annotate(e, emax, f.L)), fmt_(f) {}

  const Annotated& annotation() const { return ann_; }
  const Format& format() const { return fmt_; }

  struct Evaluation {
    SoftFloat value;
    SoftFloat bound;
  };

  // Throws RangeError on overflow, inexact underflow, or division by zero.
  Evaluation evaluate(const std::vector<Rational>& x) const {
    const auto up = Rounding::AwayFromZero;
    std::vector<SoftFloat> val(ann_.nodes.size()), mes(ann_.nodes.size());
    for (std::size_t i = 0; i < ann_.nodes.size(); ++i) {
      const auto& n = ann_.nodes[i];
      const auto ia = static_cast<std::size_t>(n.a), ib = static_cast<std::size_t>(n.b);
      switch (n.op) {
        case Op::Const:
          val[i] = SoftFloat::round(n.value, fmt_, Rounding::NearestEven, "const");
          mes[i] = SoftFloat::round(rabs(n.value), fmt_, up, "const", false);
          break;
        case Op::Input: {
          const Rational& v = x.at(static_cast<std::size_t>(n.index));
          val[i] = SoftFloat::round(v, fmt_, Rounding::NearestEven, "input");
          if (val[i].to_rational() != v) throw std::invalid_argument("input is not a member of F_{L,K}");
          mes[i] = val[i].abs();
          break;
        }
        case Op::Add:
          val[i] = SoftFloat::add(val[ia], val[ib], Rounding::NearestEven, "add");
          mes[i] = SoftFloat::add(mes[ia], mes[ib], up, "add", false);
          break;
        case Op::Sub:
          val[i] = SoftFloat::sub(val[ia], val[ib], Rounding::NearestEven, "sub");
          mes[i] = SoftFloat::add(mes[ia], mes[ib], up, "sub", false);
          break;
        case Op::Mul:
          val[i] = SoftFloat::mul(val[ia], val[ib], Rounding::NearestEven, "mul");
          mes[i] = SoftFloat::mul(mes[ia], mes[ib], up, "mul", false);
          break;
        case Op::Abs:
          val[i] = val[ia].abs();
          mes[i] = mes[ia];
          break;
        case Op::Min:
          val[i] = val[ia] < val[ib] ? val[ia] : val[ib];
          mes[i] = mes[ia] < mes[ib] ? mes[ib] : mes[ia];
          break;
        case Op::Max:
          val[i] = val[ia] < val[ib] ? val[ib] : val[ia];
          mes[i] = mes[ia] < mes[ib] ? mes[ib] : mes[ia];
          break;
        default: throw UnsupportedNode("unexpected node");
      }
    }
    SoftFloat ind = SoftFloat::round(Rational(ann_.ind()), fmt_, up, "bound", false);
    SoftFloat scaled = SoftFloat::mul(ind, mes.back(), up, "bound", false);
    SoftFloat bound = SoftFloat::mul(scaled, SoftFloat::round(pow2(-fmt_.L), fmt_, up, "bound", false),
                                     up, "bound", false);
    return {val.back(), bound};
  }

  // The table bound is a first-order model; it stays valid while ind * 2^(-L-1) <= 1.
  bool bound_valid() const { return Rational(ann_.ind()) <= pow2(fmt_.L + 1); }

  GuardVerdict guard(const std::vector<Rational>& x) const {
    if (!bound_valid()) return GuardVerdict::failed();
    try {
      Evaluation ev = evaluate(x);
      if (ev.value.abs() > ev.bound) return GuardVerdict::certified(ev.value.sign());
      return GuardVerdict::failed();
    } catch (const RangeError& e) {
      return GuardVerdict::range_error(e.kind);
    }
  }

 private:
  Annotated ann_;
  Format fmt_;
};

inline SoftFloat dynamic_bound(const GuardedExpr& g, const std::vector<Rational>& x) {
  return g.evaluate(x).bound;
}

// A predicate expression; a top-level division is guarded as numerator AND denominator.
class GuardedPredicate {
 public:
  GuardedPredicate(const Expr& e, const std::vector<Rational>& input_sup, Format f) : fmt_(f) {
    if (e.op() == Op::Div) {
      num_.emplace(e.child(0), input_sup, f);
      den_.emplace(e.child(1), input_sup, f);
    } else {
      num_.emplace(e, input_sup, f);
    }
  }
  GuardedPredicate(const Expr& e, long emax, Format f)
      : GuardedPredicate(e, std::vector<Rational>(static_cast<std::size_t>(std::max(e.num_inputs(), 0)), pow2(emax)), f) {}

  bool is_rational() const { return den_.has_value(); }
  const GuardedExpr& numerator() const { return *num_; }
  const GuardedExpr* denominator() const { return den_ ? &*den_ : nullptr; }

  // Guards of numerator and denominator first; the quotient is formed only when both hold.
  GuardVerdict operator()(const std::vector<Rational>& x) const {
    if (!den_) return num_->guard(x);
    try {
      auto g = num_->evaluate(x);
      auto h = den_->evaluate(x);
      if (!num_->bound_valid() || !den_->bound_valid()) return GuardVerdict::failed();
      if (!(g.value.abs() > g.bound && h.value.abs() > h.bound)) return GuardVerdict::failed();
      SoftFloat::div(g.value, h.value, Rounding::NearestEven, "div");
      return GuardVerdict::certified(g.value.sign() * h.value.sign());
    } catch (const RangeError& e) {
      return GuardVerdict::range_error(e.kind);
    }
  }

 private:
  Format fmt_;
  std::optional<GuardedExpr> num_, den_;
};

inline GuardVerdict guarded_eval(const Expr& e, const std::vector<Rational>& x, long emax, Format f) {
  return GuardedPredicate(e, emax, f)(x);
}

inline GuardVerdict guarded_eval(const Expr& e, const std::vector<Rational>& x, int L, int K) {
  // domain bound taken from the input itself when no perturbation domain is given
  Rational m = 0;
  for (const auto& v : x) m = std::max(m, rabs(v));
  long emax = sgn(m) == 0 ? 0 : ceil_log2(m);
  return guarded_eval(e, x, emax, Format{L, K});
}

// S(L) = C * 2^-L
struct SafetyBound {
  Rational C;

  Rational operator()(long L) const { return C * pow2(-L); }
  // smallest integer L with S(L) <= phi
  long ceil_inverse(const Rational& phi) const {
    if (sgn(C) == 0) return std::numeric_limits<long>::min() / 4;
    return ceil_log2(C / phi);
  }
};

inline Rational safety_lower_univariate(int d, const std::vector<Rational>& coeffs, long emax, long L) {
  Rational m = 0;
  for (int i = 1; i <= d && i < static_cast<int>(coeffs.size()); ++i) m = std::max(m, rabs(coeffs[static_cast<std::size_t>(i)]));
  return Rational(d + 2) * m * pow2(emax * (d + 1) + 1 - L);
}

inline Rational safety_lower_multivariate(int d, long n_terms, const Rational& maxcoeff, long emax, long L) {
  long lg = n_terms <= 1 ? 0 : ceil_log2(Rational(n_terms));
  return Rational(d + 1 + lg) * Rational(n_terms) * maxcoeff * pow2(emax * d + 1 - L);
}

inline Rational safety_upper(int K, const Rational& s_inf) {
  return pow2(1L << (std::min(K, Format::max_K) - 1)) - s_inf;
}

// Smallest K >= 2 so that no node of e overflows and no nonzero intermediate falls
// below the subnormal grid, for inputs that are multiples of 2^(emax-L-1) in [-2^emax, 2^emax].
inline int exponent_requirement_expr(const Expr& e, long emax, int L) {
  auto need = [&](const Expr& part) {
    Annotated a = annotate(part, emax, L);
    std::vector<long> lo(a.nodes.size());
    long min_lo = 0, max_top = 0;
    bool first = true;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      const auto& n = a.nodes[i];
      const auto ia = static_cast<std::size_t>(n.a), ib = static_cast<std::size_t>(n.b);
      switch (n.op) {
        case Op::Const:
          if (sgn(n.value) == 0)
            lo[i] = 0;
          else if (n.ind == 0) {
            Integer num = n.value.get_num();
            if (sgn(num) < 0) num = -num;
            lo[i] = static_cast<long>(mpz_scan1(num.get_mpz_t(), 0)) - (bit_length(n.value.get_den()) - 1);
          } else
            lo[i] = floor_log2(rabs(n.value)) - L;
          break;
        case Op::Input: lo[i] = emax - L - 1; break;
        case Op::Abs: lo[i] = lo[ia]; break;
        case Op::Mul: lo[i] = lo[ia] + lo[ib]; break;
        default: lo[i] = std::min(lo[ia], lo[ib]);
      }
      long top = sgn(n.sup) == 0 ? 0 : ceil_log2(n.sup) + 1;
      if (first || lo[i] < min_lo) min_lo = lo[i];
      if (first || top > max_top) max_top = top;
      first = false;
    }
    // emax(K) = 2^(K-1) >= max_top and emin(K) = 1 - 2^(K-1) <= min_lo + L
    long span = std::max(max_top, 1 - (min_lo + L));
    int K = 2;
    while (K < Format::max_K && (1L << (K - 1)) < span) ++K;
    return K;
  };
  if (e.op() == Op::Div) return std::max(need(e.child(0)), need(e.child(1)));
  return need(e);
}

}  // namespace cp
