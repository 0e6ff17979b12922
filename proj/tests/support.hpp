#pragma once

// Random analytic test inputs shared by the unit and acceptance suites.

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cqg/expression.hpp"
#include "cqg/field.hpp"
#include "cqg/rng.hpp"

namespace cqg::testing {

inline std::vector<std::string> coordinate_names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
  return out;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  if (v < 0) {
    os << "(-" << -v << ")";
  } else {
    os << v;
  }
  return os.str();
}

/// Small smooth perturbation: sum of `terms` products a*sin(k.q + c).
inline std::string trig_sum(CounterRng& rng, int n, int terms, double amplitude) {
  std::string out = "0";
  for (int t = 0; t < terms; ++t) {
    std::string arg = num(rng.uniform(-1, 1));
    for (int i = 0; i < n; ++i) {
      arg += " + " + num(rng.uniform(-0.8, 0.8)) + "*q" + std::to_string(i);
    }
    out += " + " + num(amplitude * rng.uniform(-1, 1)) + "*sin(" + arg + ")";
  }
  return out;
}

/// Random analytic metric near diag(signature). Off-diagonal perturbations
/// keep it safely non-degenerate on the unit box.
inline Field random_metric(CounterRng& rng, const std::vector<int>& signature) {
  const int n = static_cast<int>(signature.size());
  const auto coords = coordinate_names(n);
  std::vector<std::string> texts(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::string t = trig_sum(rng, n, 2, i == j ? 0.15 : 0.08);
      if (i == j) t = num(signature[i] * rng.uniform(1.0, 1.5)) + " + " + t;
      texts[i * n + j] = t;
      texts[j * n + i] = t;
    }
  }
  return Field::from_text(texts, coords);
}

inline Field random_covector(CounterRng& rng, int n, double amplitude = 0.5) {
  std::vector<std::string> texts;
  for (int i = 0; i < n; ++i) texts.push_back(trig_sum(rng, n, 2, amplitude));
  return Field::from_text(texts, coordinate_names(n));
}

/// Strictly positive scalar exp(trig sum).
inline Field random_positive(CounterRng& rng, int n, double amplitude = 0.4) {
  return Field::from_text({"exp(" + trig_sum(rng, n, 3, amplitude) + ")"},
                          coordinate_names(n));
}

inline Field random_scalar(CounterRng& rng, int n, double amplitude = 0.6) {
  return Field::from_text({trig_sum(rng, n, 3, amplitude)}, coordinate_names(n));
}

inline Point random_point(CounterRng& rng, int n, double half_width = 1.0) {
  Point q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform(-half_width, half_width);
  return q;
}

/// Random AST over `nvars` variables with non-negative constants, the shape
/// every parsed expression has.
inline NodePtr random_ast(CounterRng& rng, int nvars, int depth) {
  auto n = std::make_shared<Node>();
  if (depth == 0 || rng.uniform() < 0.2) {
    if (rng.uniform() < 0.5) {
      n->op = Op::Variable;
      n->variable = static_cast<int>(rng.below(nvars));
    } else {
      n->op = Op::Constant;
      n->value = rng.uniform(0, 10);
    }
    return n;
  }
  static constexpr Op kOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div,  Op::Pow,
                                Op::Neg, Op::Exp, Op::Log, Op::Sin,  Op::Cos,
                                Op::Sinh, Op::Cosh, Op::Sqrt, Op::Atan2};
  n->op = kOps[rng.below(std::size(kOps))];
  int arity = 1;
  switch (n->op) {
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: case Op::Atan2:
      arity = 2;
      break;
    default:
      break;
  }
  for (int a = 0; a < arity; ++a) n->args.push_back(random_ast(rng, nvars, depth - 1));
  return n;
}

}  // namespace cqg::testing
