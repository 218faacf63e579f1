#pragma once

#include "cp/rational.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cp {

enum class Op { Const, Input, Add, Sub, Mul, Div, Abs, Min, Max };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Input: return "input";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Abs: return "abs";
    case Op::Min: return "min";
    case Op::Max: return "max";
  }
  return "?";
}

struct ExprNode {
  Op op;
  Rational value;  // Const
  int index = -1;  // Input
  std::vector<std::shared_ptr<const ExprNode>> kids;
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  static Expr constant(const Rational& q) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Const;
    n->value = q;
    return Expr(n);
  }
  static Expr input(int i) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Input;
    n->index = i;
    return Expr(n);
  }
  static Expr make(Op op, std::vector<Expr> kids) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    for (auto& k : kids) n->kids.push_back(k.node_);
    return Expr(n);
  }

  Op op() const { return node_->op; }
  const Rational& value() const { return node_->value; }
  int index() const { return node_->index; }
  std::size_t arity() const { return node_->kids.size(); }
  Expr child(std::size_t i) const { return Expr(node_->kids.at(i)); }
  const ExprNode* raw() const { return node_.get(); }
  explicit operator bool() const { return static_cast<bool>(node_); }

  // 1 + largest input index
  int num_inputs() const {
    int m = 0;
    visit([&](const ExprNode& n) {
      if (n.op == Op::Input) m = std::max(m, n.index + 1);
    });
    return m;
  }

  template <class F>
  void visit(F&& f) const {
    visit_node(*node_, f);
  }

  std::string str() const {
    std::string out;
    print(*node_, out);
    return out;
  }

  friend Expr operator+(const Expr& a, const Expr& b) { return make(Op::Add, {a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) { return make(Op::Sub, {a, b}); }
  friend Expr operator*(const Expr& a, const Expr& b) { return make(Op::Mul, {a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return make(Op::Div, {a, b}); }

 private:
  std::shared_ptr<const ExprNode> node_;

  template <class F>
  static void visit_node(const ExprNode& n, F& f) {
    for (const auto& k : n.kids) visit_node(*k, f);
    f(n);
  }

  static void print(const ExprNode& n, std::string& out) {
    switch (n.op) {
      case Op::Const: out += to_string(n.value); return;
      case Op::Input: out += "x" + std::to_string(n.index); return;
      default: break;
    }
    out += "(";
    out += op_name(n.op);
    for (const auto& k : n.kids) {
      out += " ";
      print(*k, out);
    }
    out += ")";
  }
};

inline Expr cst(const Rational& q) { return Expr::constant(q); }
inline Expr cst(long n) { return Expr::constant(Rational(n)); }
inline Expr var(int i) { return Expr::input(i); }
inline Expr abs(const Expr& e) { return Expr::make(Op::Abs, {e}); }
inline Expr min(const Expr& a, const Expr& b) { return Expr::make(Op::Min, {a, b}); }
inline Expr max(const Expr& a, const Expr& b) { return Expr::make(Op::Max, {a, b}); }

struct ExactPole : std::runtime_error {
  ExactPole() : std::runtime_error("divisor evaluates to exactly zero") {}
};

inline Rational rat_eval(const ExprNode& n, const std::vector<Rational>& x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Input:
      if (n.index < 0 || static_cast<std::size_t>(n.index) >= x.size())
        throw std::out_of_range("input index x" + std::to_string(n.index) + " not supplied");
      return x[static_cast<std::size_t>(n.index)];
    case Op::Abs: return rabs(rat_eval(*n.kids[0], x));
    default: break;
  }
  Rational a = rat_eval(*n.kids[0], x);
  Rational b = rat_eval(*n.kids[1], x);
  switch (n.op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (sgn(b) == 0) throw ExactPole();
      return a / b;
    case Op::Min: return a < b ? a : b;
    case Op::Max: return a < b ? b : a;
    default: break;
  }
  throw std::logic_error("unreachable");
}

inline Rational rat_eval(const Expr& e, const std::vector<Rational>& x) { return rat_eval(*e.raw(), x); }

inline int rat_sign(const Expr& e, const std::vector<Rational>& x) { return sgn(rat_eval(e, x)); }

// Prefix text format: (op arg...) with xN inputs and p/q or integer constants.
inline Expr parse_expr(std::string_view text) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto token = [&] {
    std::size_t b = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    return std::string(text.substr(b, pos - b));
  };
  std::function<Expr()> parse = [&]() -> Expr {
    skip();
    if (pos >= text.size()) throw ParseError("unexpected end of expression");
    if (text[pos] == '(') {
      ++pos;
      skip();
      std::string name = token();
      static const std::pair<const char*, Op> table[] = {
          {"add", Op::Add}, {"sub", Op::Sub}, {"mul", Op::Mul}, {"div", Op::Div},
          {"abs", Op::Abs}, {"min", Op::Min}, {"max", Op::Max}};
      Op op{};
      bool found = false;
      for (auto& [s, o] : table)
        if (name == s) {
          op = o;
          found = true;
        }
      if (!found) throw ParseError("unknown operator '" + name + "'");
      std::vector<Expr> kids;
      for (;;) {
        skip();
        if (pos >= text.size()) throw ParseError("missing ')'");
        if (text[pos] == ')') {
          ++pos;
          break;
        }
        kids.push_back(parse());
      }
      std::size_t want = op == Op::Abs ? 1 : 2;
      if (op != Op::Abs && kids.size() > 2 && op != Op::Sub && op != Op::Div) {
        Expr acc = kids[0];
        for (std::size_t i = 1; i < kids.size(); ++i) acc = Expr::make(op, {acc, kids[i]});
        return acc;
      }
      if (kids.size() != want)
        throw ParseError(std::string("operator '") + name + "' expects " + std::to_string(want) +
                         " operands");
      return Expr::make(op, kids);
    }
    if (text[pos] == ')') throw ParseError("unexpected ')'");
    std::string t = token();
    if (!t.empty() && t[0] == 'x') {
      std::string digits = t.substr(1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("bad input name '" + t + "'");
      return Expr::input(std::stoi(digits));
    }
    return Expr::constant(parse_rational(t));
  };
  Expr e = parse();
  skip();
  if (pos != text.size()) throw ParseError("trailing text after expression");
  return e;
}

}  // namespace cp
