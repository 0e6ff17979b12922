#pragma once

// Truncated multivariate Taylor jets.
//
// A Jet of order K in n variables carries every Taylor coefficient
// c_a = (d^a f)(q) / a! for multi-indices |a| <= K. Coefficients are stored in
// a graded order that does not depend on K, so an order-K jet is a prefix of
// the order-(K+1) jet of the same function; mixed-order arithmetic truncates
// to the lower order.

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace cqg {

namespace detail {

// Coefficient buffer with inline room for first-order jets in up to 15
// variables; larger jets go to the heap.
class Coefficients {
 public:
  static constexpr int kInline = 16;

  Coefficients() = default;
  Coefficients(int n, double fill) { resize(n, fill); }
  Coefficients(const Coefficients& o) { assign(o.begin(), o.end()); }
  Coefficients(Coefficients&& o) noexcept { steal(o); }
  Coefficients& operator=(const Coefficients& o) {
    if (this != &o) assign(o.begin(), o.end());
    return *this;
  }
  Coefficients& operator=(Coefficients&& o) noexcept {
    if (this != &o) steal(o);
    return *this;
  }

  int size() const { return size_; }
  double* data() { return heap_ ? heap_.get() : local_; }
  const double* data() const { return heap_ ? heap_.get() : local_; }
  double* begin() { return data(); }
  double* end() { return data() + size_; }
  const double* begin() const { return data(); }
  const double* end() const { return data() + size_; }
  double& operator[](int c) { return data()[c]; }
  double operator[](int c) const { return data()[c]; }

  void assign(const double* first, const double* last) {
    resize(static_cast<int>(last - first), 0.0);
    std::copy(first, last, data());
  }

 private:
  void resize(int n, double fill) {
    if (n > kInline) {
      heap_ = std::make_unique<double[]>(n);
    } else {
      heap_.reset();
    }
    size_ = n;
    std::fill(data(), data() + n, fill);
  }
  void steal(Coefficients& o) {
    size_ = o.size_;
    if (o.heap_) {
      heap_ = std::move(o.heap_);
    } else {
      heap_.reset();
      std::copy(o.local_, o.local_ + o.size_, local_);
    }
    o.size_ = 0;
  }

  int size_ = 0;
  double local_[kInline];
  std::unique_ptr<double[]> heap_;
};

}  // namespace detail

class JetSpace {
 public:
  struct Product {
    int lhs;
    int rhs;
    int out;
  };

  /// Interned space for (nvars, order). Thread-safe; references stay valid.
  static const JetSpace& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(degree_.size()); }
  int degree(int c) const { return degree_[c]; }
  std::span<const int> exponents(int c) const {
    return {exponents_.data() + static_cast<std::size_t>(c) * nvars_,
            static_cast<std::size_t>(nvars_)};
  }
  /// Index of a multi-index, or -1 when its degree exceeds the order.
  int index(std::span<const int> alpha) const;
  /// Index of the unit multi-index e_var.
  int unit(int var) const { return 1 + var; }
  /// Index of (alpha_c + e_var) in the enumeration of degree <= order + 1.
  int raised(int c, int var) const {
    return raised_[static_cast<std::size_t>(c) * nvars_ + var];
  }
  /// All (lhs, rhs, out) with deg(lhs) + deg(rhs) <= order.
  std::span<const Product> products() const { return products_; }
  /// Products with lhs == c occupy [product_start(c), product_start(c + 1)).
  int product_start(int c) const { return product_start_[c]; }

  JetSpace(int nvars, int order);

 private:
  int nvars_;
  int order_;
  std::vector<int> exponents_;
  std::vector<int> degree_;
  std::vector<int> raised_;
  std::vector<Product> products_;
  std::vector<int> product_start_;
  std::map<std::vector<int>, int> lookup_;  // degree <= order + 1
};

class Jet {
 public:
  Jet() = default;
  /// Constant jet.
  Jet(const JetSpace& space, double value);
  /// The coordinate function q^var expanded around `value`.
  static Jet variable(const JetSpace& space, int var, double value);

  bool empty() const { return space_ == nullptr; }
  const JetSpace& space() const { return *space_; }
  int order() const { return space_->order(); }
  int nvars() const { return space_->nvars(); }
  int size() const { return coeffs_.size(); }

  double value() const { return coeffs_[0]; }
  double operator[](int c) const { return coeffs_[c]; }
  double& operator[](int c) { return coeffs_[c]; }
  std::span<const double> coefficients() const { return {coeffs_.data(), static_cast<std::size_t>(coeffs_.size())}; }

  /// Partial derivative d^alpha f (not divided by alpha!).
  double partial(std::span<const int> alpha) const;
  /// First partial derivative with respect to `var`.
  double gradient(int var) const { return coeffs_[space_->unit(var)]; }
  /// True when every non-constant coefficient is zero.
  bool is_constant() const;

  Jet truncated(int order) const;
  /// d/dq^var; the result has order one lower.
  Jet derivative(int var) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);
  Jet& operator/=(double rhs);

 private:
  const JetSpace* space_ = nullptr;
  detail::Coefficients coeffs_;
};

Jet operator+(Jet lhs, const Jet& rhs);
Jet operator-(Jet lhs, const Jet& rhs);
Jet operator*(const Jet& lhs, const Jet& rhs);
Jet operator/(const Jet& lhs, const Jet& rhs);
Jet operator+(Jet lhs, double rhs);
Jet operator+(double lhs, Jet rhs);
Jet operator-(Jet lhs, double rhs);
Jet operator-(double lhs, const Jet& rhs);
Jet operator*(Jet lhs, double rhs);
Jet operator*(double lhs, Jet rhs);
Jet operator/(Jet lhs, double rhs);
Jet operator/(double lhs, const Jet& rhs);

/// f(a) from the Taylor coefficients f^(k)(a0)/k!, k = 0..order.
Jet compose(const Jet& a, std::span<const double> taylor);

Jet reciprocal(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet pow(const Jet& a, const Jet& exponent);
Jet ipow(const Jet& a, int exponent);
Jet atan2(const Jet& y, const Jet& x);

/// Re-express a jet in a larger space: variable v of `j` becomes variable
/// var_map[v] of `target`. Orders must match.
Jet lift(const Jet& j, const JetSpace& target, std::span<const int> var_map);

/// Seeded coordinate jets for the point q.
std::vector<Jet> seed(std::span<const double> q, int order);

}  // namespace cqg
