#include "cqg/field.hpp"

#include <mutex>

#include "cqg/errors.hpp"

namespace cqg {

Field::Field(int dim, int components, Evaluator evaluator)
    : dim_(dim),
      components_(components),
      evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))) {}

Field Field::from_expressions(std::vector<Expression> exprs) {
  if (exprs.empty()) throw Error("field needs at least one expression");
  const int dim = static_cast<int>(exprs.front().free_vars().size());
  for (const auto& e : exprs) {
    if (e.free_vars() != exprs.front().free_vars()) {
      throw Error("field expressions disagree on coordinates");
    }
  }
  const int count = static_cast<int>(exprs.size());
  return Field(dim, count, [exprs = std::move(exprs)](const Point& q, int order) {
    const std::vector<Jet> vars = seed(std::span<const double>(q.data(), q.size()), order);
    std::vector<Jet> out;
    out.reserve(exprs.size());
    for (const auto& e : exprs) out.push_back(e.eval<Jet>(vars));
    return out;
  });
}

Field Field::from_text(const std::vector<std::string>& texts,
                       const std::vector<std::string>& coords, const Constants& constants) {
  std::vector<Expression> exprs;
  exprs.reserve(texts.size());
  for (const auto& t : texts) exprs.push_back(parse(t, coords, constants));
  return from_expressions(std::move(exprs));
}

Field Field::constant(int dim, std::vector<double> values) {
  const int count = static_cast<int>(values.size());
  return Field(dim, count, [dim, values = std::move(values)](const Point&, int order) {
    const auto& space = JetSpace::get(dim, order);
    std::vector<Jet> out;
    out.reserve(values.size());
    for (double v : values) out.emplace_back(space, v);
    return out;
  });
}

Field Field::zero(int dim, int components) {
  return constant(dim, std::vector<double>(components, 0.0));
}

std::vector<Jet> Field::jets(const Point& q, int order) const {
  if (empty()) throw Error("evaluating an empty field");
  if (q.size() != dim_) {
    throw Error("point dimension " + std::to_string(q.size()) + " does not match field dimension " +
                std::to_string(dim_));
  }
  return (*evaluator_)(q, order);
}

Jet Field::jet(const Point& q, int order, int component) const {
  return jets(q, order).at(component);
}

Eigen::VectorXd Field::values(const Point& q) const {
  const auto js = jets(q, 0);
  Eigen::VectorXd out(js.size());
  for (std::size_t i = 0; i < js.size(); ++i) out[static_cast<Eigen::Index>(i)] = js[i].value();
  return out;
}

double Field::value(const Point& q, int component) const { return jet(q, 0, component).value(); }

Field Field::map(int components,
                 std::function<std::vector<Jet>(const std::vector<Jet>&)> fn) const {
  Field self = *this;
  return Field(dim_, components, [self, fn = std::move(fn)](const Point& q, int order) {
    return fn(self.jets(q, order));
  });
}

Field gradient(const Field& scalar) {
  const int n = scalar.dim();
  return Field(n, n, [scalar, n](const Point& q, int order) {
    const Jet f = scalar.jet(q, order + 1);
    std::vector<Jet> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(f.derivative(i));
    return out;
  });
}

Field concat(const std::vector<Field>& parts) {
  if (parts.empty()) throw Error("concat of no fields");
  int count = 0;
  for (const auto& p : parts) {
    if (p.dim() != parts.front().dim()) throw Error("concat of fields on different charts");
    count += p.components();
  }
  return Field(parts.front().dim(), count, [parts](const Point& q, int order) {
    std::vector<Jet> out;
    for (const auto& p : parts) {
      auto js = p.jets(q, order);
      out.insert(out.end(), std::make_move_iterator(js.begin()),
                 std::make_move_iterator(js.end()));
    }
    return out;
  });
}

Field scale_by_power(const Field& f, const Field& s, double power) {
  return Field(f.dim(), f.components(), [f, s, power](const Point& q, int order) {
    const Jet factor = pow(s.jet(q, order), power);
    auto js = f.jets(q, order);
    for (auto& j : js) j = j * factor;
    return js;
  });
}

Field component(const Field& f, int index) {
  if (index < 0 || index >= f.components()) throw Error("component index out of range");
  return Field(f.dim(), 1, [f, index](const Point& q, int order) {
    return std::vector<Jet>{f.jet(q, order, index)};
  });
}

Field pullback(const Field& f, int dim, std::vector<int> vars) {
  if (static_cast<int>(vars.size()) != f.dim()) throw Error("pullback needs one index per coordinate");
  for (int v : vars) {
    if (v < 0 || v >= dim) throw Error("pullback coordinate out of range");
  }
  return Field(dim, f.components(), [f, dim, vars](const Point& q, int order) {
    Point sub(static_cast<Eigen::Index>(vars.size()));
    for (std::size_t i = 0; i < vars.size(); ++i) sub[static_cast<Eigen::Index>(i)] = q[vars[i]];
    const auto& space = JetSpace::get(dim, order);
    auto js = f.jets(sub, order);
    for (auto& j : js) j = lift(j, space, vars);
    return js;
  });
}

Field cached(const Field& f) {
  struct Memo {
    std::mutex mutex;
    Point q;
    int order = -1;
    std::vector<Jet> jets;
  };
  auto memo = std::make_shared<Memo>();
  return Field(f.dim(), f.components(), [f, memo](const Point& q, int order) {
    {
      std::lock_guard lock(memo->mutex);
      if (memo->order >= order && memo->q.size() == q.size() && memo->q == q) {
        std::vector<Jet> out = memo->jets;
        for (auto& j : out) j = j.truncated(order);
        return out;
      }
    }
    std::vector<Jet> jets = f.jets(q, order);
    std::lock_guard lock(memo->mutex);
    memo->q = q;
    memo->order = order;
    memo->jets = jets;
    return jets;
  });
}

Field direct_sum(const std::vector<Field>& parts) {
  if (parts.empty()) throw Error("direct sum of no fields");
  int dim = 0;
  for (const auto& p : parts) dim += p.dim();
  std::vector<Field> lifted;
  int offset = 0;
  for (const auto& p : parts) {
    std::vector<int> vars(p.dim());
    for (int i = 0; i < p.dim(); ++i) vars[i] = offset + i;
    lifted.push_back(pullback(p, dim, std::move(vars)));
    offset += p.dim();
  }
  return concat(lifted);
}

}  // namespace cqg
