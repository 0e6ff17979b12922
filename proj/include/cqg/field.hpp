#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cqg/expression.hpp"
#include "cqg/jet.hpp"

namespace cqg {

using Point = Eigen::VectorXd;

/// A multi-component analytic map on an n-dimensional chart, evaluated as
/// Taylor jets of any order up to the jet cap. Fields are immutable values;
/// copies share the evaluator.
class Field {
 public:
  using Evaluator = std::function<std::vector<Jet>(const Point& q, int order)>;

  Field() = default;
  Field(int dim, int components, Evaluator evaluator);

  /// One component per expression. All expressions must share `coords`.
  static Field from_expressions(std::vector<Expression> exprs);
  static Field from_text(const std::vector<std::string>& texts,
                         const std::vector<std::string>& coords,
                         const Constants& constants = {});
  static Field constant(int dim, std::vector<double> values);
  static Field zero(int dim, int components);

  bool empty() const { return !evaluator_; }
  int dim() const { return dim_; }
  int components() const { return components_; }

  std::vector<Jet> jets(const Point& q, int order) const;
  Jet jet(const Point& q, int order, int component = 0) const;
  Eigen::VectorXd values(const Point& q) const;
  double value(const Point& q, int component = 0) const;

  /// Component-wise jet transformation sharing the evaluation order.
  Field map(int components,
            std::function<std::vector<Jet>(const std::vector<Jet>&)> fn) const;

 private:
  int dim_ = 0;
  int components_ = 0;
  std::shared_ptr<const Evaluator> evaluator_;
};

/// Partial derivatives of a scalar field as an n-component field.
Field gradient(const Field& scalar);

/// Concatenate the components of several fields on the same chart.
Field concat(const std::vector<Field>& parts);

/// Pointwise product of every component of `f` with `s`^power.
Field scale_by_power(const Field& f, const Field& s, double power);

/// f viewed on a `dim`-dimensional chart whose coordinates vars[0..] feed
/// f's coordinates.
Field pullback(const Field& f, int dim, std::vector<int> vars);

/// Fields on separate charts joined into one field on the product chart:
/// coordinates and components are concatenated block by block.
Field direct_sum(const std::vector<Field>& parts);

/// Same field with a one-entry memo: a request at a point already
/// evaluated to an equal or higher order is served by truncation.
Field cached(const Field& f);

/// Reads one component as a scalar field.
Field component(const Field& f, int index);

}  // namespace cqg
