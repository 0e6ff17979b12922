#include "cqg/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "cqg/errors.hpp"

namespace cqg {

namespace {

// Compositions of `degree` into `n` parts, first part descending.
void compositions(int n, int degree, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  const int pos = static_cast<int>(current.size());
  if (pos == n - 1) {
    current.push_back(degree);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = degree; k >= 0; --k) {
    current.push_back(k);
    compositions(n, degree - k, current, out);
    current.pop_back();
  }
}

std::vector<std::vector<int>> graded(int n, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  for (int d = 0; d <= max_degree; ++d) compositions(n, d, current, out);
  return out;
}

constexpr int kMaxOrder = 6;

}  // namespace

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  const auto extended = graded(nvars, order + 1);
  for (int c = 0; c < static_cast<int>(extended.size()); ++c) {
    lookup_.emplace(extended[c], c);
  }
  for (const auto& alpha : extended) {
    int degree = 0;
    for (int a : alpha) degree += a;
    if (degree > order) break;
    exponents_.insert(exponents_.end(), alpha.begin(), alpha.end());
    degree_.push_back(degree);
  }
  const int count = size();
  raised_.resize(static_cast<std::size_t>(count) * nvars);
  std::vector<int> alpha(nvars);
  for (int c = 0; c < count; ++c) {
    auto e = exponents(c);
    for (int v = 0; v < nvars; ++v) {
      alpha.assign(e.begin(), e.end());
      ++alpha[v];
      raised_[static_cast<std::size_t>(c) * nvars + v] = lookup_.at(alpha);
    }
  }
  for (int a = 0; a < count; ++a) {
    product_start_.push_back(static_cast<int>(products_.size()));
    for (int b = 0; b < count; ++b) {
      if (degree_[a] + degree_[b] > order) continue;
      auto ea = exponents(a);
      auto eb = exponents(b);
      for (int v = 0; v < nvars; ++v) alpha[v] = ea[v] + eb[v];
      products_.push_back({a, b, lookup_.at(alpha)});
    }
  }
  product_start_.push_back(static_cast<int>(products_.size()));
}

const JetSpace& JetSpace::get(int nvars, int order) {
  if (nvars < 1 || order < 0 || order > kMaxOrder) {
    throw Error("jet space out of range: nvars=" + std::to_string(nvars) +
                " order=" + std::to_string(order));
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> spaces;
  std::lock_guard lock(mutex);
  auto& slot = spaces[{nvars, order}];
  if (!slot) slot = std::make_unique<JetSpace>(nvars, order);
  return *slot;
}

int JetSpace::index(std::span<const int> alpha) const {
  int degree = 0;
  for (int a : alpha) degree += a;
  if (degree > order_ || static_cast<int>(alpha.size()) != nvars_) return -1;
  return lookup_.at(std::vector<int>(alpha.begin(), alpha.end()));
}

Jet::Jet(const JetSpace& space, double value)
    : space_(&space), coeffs_(space.size(), 0.0) {
  coeffs_[0] = value;
}

Jet Jet::variable(const JetSpace& space, int var, double value) {
  Jet j(space, value);
  if (space.order() > 0) j.coeffs_[space.unit(var)] = 1.0;
  return j;
}

double Jet::partial(std::span<const int> alpha) const {
  const int c = space_->index(alpha);
  if (c < 0) throw Error("requested derivative exceeds jet order");
  double factorial = 1.0;
  for (int a : alpha) {
    for (int k = 2; k <= a; ++k) factorial *= k;
  }
  return coeffs_[c] * factorial;
}

bool Jet::is_constant() const {
  return std::all_of(coeffs_.begin() + 1, coeffs_.end(),
                     [](double c) { return c == 0.0; });
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  Jet out;
  out.space_ = &JetSpace::get(nvars(), order);
  out.coeffs_.assign(coeffs_.begin(), coeffs_.begin() + out.space_->size());
  return out;
}

Jet Jet::derivative(int var) const {
  if (order() == 0) throw Error("cannot differentiate an order-0 jet");
  Jet out(JetSpace::get(nvars(), order() - 1), 0.0);
  const auto& target = out.space();
  for (int c = 0; c < target.size(); ++c) {
    const int src = target.raised(c, var);
    out.coeffs_[c] = (target.exponents(c)[var] + 1) * coeffs_[src];
  }
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (double& c : out.coeffs_) c = -c;
  return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
  if (rhs.order() < order()) *this = truncated(rhs.order());
  for (int c = 0; c < size(); ++c) coeffs_[c] += rhs.coeffs_[c];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  if (rhs.order() < order()) *this = truncated(rhs.order());
  for (int c = 0; c < size(); ++c) coeffs_[c] -= rhs.coeffs_[c];
  return *this;
}

Jet& Jet::operator*=(const Jet& rhs) {
  *this = *this * rhs;
  return *this;
}

Jet& Jet::operator+=(double rhs) {
  coeffs_[0] += rhs;
  return *this;
}

Jet& Jet::operator-=(double rhs) {
  coeffs_[0] -= rhs;
  return *this;
}

Jet& Jet::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}

Jet& Jet::operator/=(double rhs) {
  if (rhs == 0.0) throw DomainError("division by zero");
  for (double& c : coeffs_) c /= rhs;
  return *this;
}

Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }

Jet operator*(const Jet& lhs, const Jet& rhs) {
  assert(lhs.nvars() == rhs.nvars());
  const auto& space = lhs.order() <= rhs.order() ? lhs.space() : rhs.space();
  Jet out(space, 0.0);
  const auto products = space.products();
  for (int a = 0; a < space.size(); ++a) {
    const double x = lhs[a];
    if (x == 0.0) continue;
    for (int k = space.product_start(a); k < space.product_start(a + 1); ++k) {
      out[products[k].out] += x * rhs[products[k].rhs];
    }
  }
  return out;
}

Jet operator/(const Jet& lhs, const Jet& rhs) { return lhs * reciprocal(rhs); }
Jet operator+(Jet lhs, double rhs) { return lhs += rhs; }
Jet operator+(double lhs, Jet rhs) { return rhs += lhs; }
Jet operator-(Jet lhs, double rhs) { return lhs -= rhs; }
Jet operator-(double lhs, const Jet& rhs) { return (-rhs) += lhs; }
Jet operator*(Jet lhs, double rhs) { return lhs *= rhs; }
Jet operator*(double lhs, Jet rhs) { return rhs *= lhs; }
Jet operator/(Jet lhs, double rhs) { return lhs /= rhs; }
Jet operator/(double lhs, const Jet& rhs) { return reciprocal(rhs) * lhs; }

Jet compose(const Jet& a, std::span<const double> taylor) {
  const int order = a.order();
  assert(static_cast<int>(taylor.size()) > order);
  Jet h = a;
  h[0] = 0.0;
  Jet out(a.space(), taylor[order]);
  for (int k = order - 1; k >= 0; --k) {
    out = out * h;
    out[0] += taylor[k];
  }
  return out;
}

namespace {

// Taylor coefficients of x^r around x0 > 0.
std::vector<double> power_series(double x0, double r, int order) {
  std::vector<double> t(order + 1);
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    t[k] = binom * std::pow(x0, r - k);
    binom *= (r - k) / (k + 1);
  }
  return t;
}

}  // namespace

Jet reciprocal(const Jet& a) {
  const double x0 = a.value();
  if (x0 == 0.0) throw DomainError("division by zero");
  std::vector<double> t(a.order() + 1);
  double term = 1.0 / x0;
  for (double& c : t) {
    c = term;
    term *= -1.0 / x0;
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  double term = std::exp(a.value());
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = term;
    term /= (k + 1);
  }
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double x0 = a.value();
  if (!(x0 > 0.0)) throw DomainError("log of non-positive value");
  std::vector<double> t(a.order() + 1);
  t[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= x0;
    t[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return compose(a, t);
}

namespace {

// sin/cos/sinh/cosh share a period-4 (or period-2) derivative cycle.
Jet cyclic(const Jet& a, const double (&cycle)[4]) {
  std::vector<double> t(a.order() + 1);
  double factorial = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) factorial *= k;
    t[k] = cycle[k % 4] / factorial;
  }
  return compose(a, t);
}

}  // namespace

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {s, c, -s, -c});
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {c, -s, -c, s});
}

Jet sinh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return cyclic(a, {s, c, s, c});
}

Jet cosh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return cyclic(a, {c, s, c, s});
}

Jet sqrt(const Jet& a) {
  const double x0 = a.value();
  if (x0 < 0.0) throw DomainError("sqrt of negative value");
  if (x0 == 0.0) {
    if (a.order() > 0) throw DomainError("sqrt not differentiable at zero");
    return Jet(a.space(), 0.0);
  }
  return compose(a, power_series(x0, 0.5, a.order()));
}

Jet ipow(const Jet& a, int exponent) {
  if (exponent < 0) return reciprocal(ipow(a, -exponent));
  Jet result(a.space(), 1.0);
  Jet base = a;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return result;
}

Jet pow(const Jet& a, double exponent) {
  if (exponent == std::floor(exponent) && std::abs(exponent) < 64.0) {
    return ipow(a, static_cast<int>(exponent));
  }
  const double x0 = a.value();
  if (x0 < 0.0) throw DomainError("non-integer power of negative value");
  if (x0 == 0.0) {
    if (a.order() > 0 || exponent < 0.0) {
      throw DomainError("non-integer power not differentiable at zero");
    }
    return Jet(a.space(), 0.0);
  }
  return compose(a, power_series(x0, exponent, a.order()));
}

Jet pow(const Jet& a, const Jet& exponent) {
  if (exponent.is_constant()) return pow(a, exponent.value());
  return exp(exponent * log(a));
}

Jet atan2(const Jet& y, const Jet& x) {
  const double y0 = y.value(), x0 = x.value();
  if (x0 == 0.0 && y0 == 0.0) throw DomainError("atan2 at the origin");
  // atan2(y, x) = atan2(y0, x0) + atan(w), w = (x0 y - y0 x) / (x0 x + y0 y),
  // with w(q0) = 0 so the odd atan series applies.
  const Jet w = (x0 * y - y0 * x) / (x0 * x + y0 * y);
  std::vector<double> t(w.order() + 1, 0.0);
  for (int k = 1; k <= w.order(); k += 2) t[k] = ((k / 2) % 2 ? -1.0 : 1.0) / k;
  Jet out = compose(w, t);
  out[0] = std::atan2(y0, x0);
  return out;
}

std::vector<Jet> seed(std::span<const double> q, int order) {
  const auto& space = JetSpace::get(static_cast<int>(q.size()), order);
  std::vector<Jet> out;
  out.reserve(q.size());
  for (int v = 0; v < static_cast<int>(q.size()); ++v) {
    out.push_back(Jet::variable(space, v, q[v]));
  }
  return out;
}

Jet lift(const Jet& j, const JetSpace& target, std::span<const int> var_map) {
  if (target.order() != j.order()) throw Error("lift between jets of different order");
  Jet out(target, 0.0);
  for (int c = 0; c < j.size(); ++c) {
    if (j[c] == 0.0) continue;
    const auto e = j.space().exponents(c);
    int at = 0;
    for (int v = 0; v < j.nvars(); ++v)
      for (int k = 0; k < e[v]; ++k) at = target.raised(at, var_map[v]);
    out[at] = j[c];
  }
  return out;
}

}  // namespace cqg
