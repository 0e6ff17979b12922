#pragma once

// A small arithmetic language over named coordinates.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | name | func '(' expr (',' expr)* ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sinh | cosh | sqrt | atan2
//
// Names resolve to coordinates first, then to bound constants, then to `pi`.
// Anything else is an UnknownIdentifierError. Parsed constants are always
// non-negative; negation is its own node.

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cqg/errors.hpp"
#include "cqg/jet.hpp"

namespace cqg {

enum class Op {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Log,
  Sin,
  Cos,
  Sinh,
  Cosh,
  Sqrt,
  Atan2,
};

struct Node {
  Op op = Op::Constant;
  double value = 0.0;  // Constant
  int variable = -1;   // Variable
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

bool structurally_equal(const Node& a, const Node& b);

// Domain-checked scalar builtins shared by the double and Jet evaluators.
namespace fn {

inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
inline Jet divide(const Jet& a, const Jet& b) { return a / b; }

inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
  if (!(x > 0.0)) throw DomainError("log of non-positive value");
  return std::log(x);
}
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double sinh(double x) { return std::sinh(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double sqrt(double x) {
  if (x < 0.0) throw DomainError("sqrt of negative value");
  return std::sqrt(x);
}
inline double atan2(double y, double x) { return std::atan2(y, x); }
inline double pow(double a, double b) {
  if (a < 0.0 && b != std::floor(b)) {
    throw DomainError("non-integer power of negative value");
  }
  if (a == 0.0 && b < 0.0) throw DomainError("division by zero");
  return std::pow(a, b);
}

using cqg::atan2;
using cqg::cos;
using cqg::cosh;
using cqg::exp;
using cqg::log;
using cqg::pow;
using cqg::sin;
using cqg::sinh;
using cqg::sqrt;

inline Jet constant_like(const Jet& like, double v) { return Jet(like.space(), v); }
inline double constant_like(double, double v) { return v; }

}  // namespace fn

class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, std::vector<std::string> coords)
      : root_(std::move(root)), coords_(std::move(coords)) {}

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  /// Ordered coordinate names; evaluation points follow this order.
  const std::vector<std::string>& free_vars() const { return coords_; }

  /// Evaluate with any scalar type that supports the builtins (double, Jet).
  template <class T>
  T eval(std::span<const T> point) const;

  /// Canonical fully parenthesized text; parse(print(e)) reproduces the AST.
  std::string print() const;

 private:
  NodePtr root_;
  std::vector<std::string> coords_;
};

using Constants = std::map<std::string, double>;

Expression parse(const std::string& text, const std::vector<std::string>& coords,
                 const Constants& constants = {});

double evaluate(const Expression& e, std::span<const double> point);

/// Exact forward-mode partial derivative. `multi_index[i]` is the number of
/// derivatives taken with respect to coordinate i; total order <= 3.
double derive(const Expression& e, std::span<const double> point,
              std::span<const int> multi_index);

namespace detail {

template <class T>
T eval_node(const Node& n, std::span<const T> point, const T& like) {
  using namespace fn;
  switch (n.op) {
    case Op::Constant:
      return constant_like(like, n.value);
    case Op::Variable:
      return point[n.variable];
    case Op::Add:
      return eval_node(*n.args[0], point, like) + eval_node(*n.args[1], point, like);
    case Op::Sub:
      return eval_node(*n.args[0], point, like) - eval_node(*n.args[1], point, like);
    case Op::Mul:
      return eval_node(*n.args[0], point, like) * eval_node(*n.args[1], point, like);
    case Op::Div:
      return divide(eval_node(*n.args[0], point, like), eval_node(*n.args[1], point, like));
    case Op::Pow: {
      const T base = eval_node(*n.args[0], point, like);
      if (n.args[1]->op == Op::Constant) return pow(base, n.args[1]->value);
      return pow(base, eval_node(*n.args[1], point, like));
    }
    case Op::Neg:
      return -eval_node(*n.args[0], point, like);
    case Op::Exp:
      return exp(eval_node(*n.args[0], point, like));
    case Op::Log:
      return log(eval_node(*n.args[0], point, like));
    case Op::Sin:
      return sin(eval_node(*n.args[0], point, like));
    case Op::Cos:
      return cos(eval_node(*n.args[0], point, like));
    case Op::Sinh:
      return sinh(eval_node(*n.args[0], point, like));
    case Op::Cosh:
      return cosh(eval_node(*n.args[0], point, like));
    case Op::Sqrt:
      return sqrt(eval_node(*n.args[0], point, like));
    case Op::Atan2:
      return atan2(eval_node(*n.args[0], point, like), eval_node(*n.args[1], point, like));
  }
  throw Error("corrupt expression node");
}

}  // namespace detail

template <class T>
T Expression::eval(std::span<const T> point) const {
  if (point.size() != coords_.size()) {
    throw Error("point has " + std::to_string(point.size()) +
                " coordinates, expression expects " + std::to_string(coords_.size()));
  }
  if constexpr (std::is_same_v<T, double>) {
    return detail::eval_node<T>(*root_, point, 0.0);
  } else {
    if (point.empty()) throw Error("jet evaluation needs at least one coordinate");
    return detail::eval_node<T>(*root_, point, point.front());
  }
}

}  // namespace cqg
