#pragma once

// Dense tensors over a common index range [0, dim). Storage is row-major in
// the index order; nothing is symmetry-compressed.

#include <array>
#include <cmath>
#include <vector>

#include "cqg/jet.hpp"

namespace cqg {

template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, const T& fill = T())
      : dim_(dim), rank_(rank), data_(flat_size(dim, rank), fill) {}

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int size() const { return static_cast<int>(data_.size()); }

  template <class... I>
  T& operator()(I... idx) {
    return data_[offset(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[offset(idx...)];
  }

  T& flat(int k) { return data_[k]; }
  const T& flat(int k) const { return data_[k]; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  /// Index tuple of flat position k.
  std::vector<int> unflatten(int k) const {
    std::vector<int> idx(rank_);
    for (int r = rank_ - 1; r >= 0; --r) {
      idx[r] = k % dim_;
      k /= dim_;
    }
    return idx;
  }

 private:
  static std::size_t flat_size(int dim, int rank) {
    std::size_t s = 1;
    for (int r = 0; r < rank; ++r) s *= static_cast<std::size_t>(dim);
    return s;
  }
  template <class... I>
  std::size_t offset(I... idx) const {
    std::size_t k = 0;
    ((k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return k;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<T> data_;
};

/// Values (order-0 coefficients) of a jet tensor.
inline Tensor<double> values(const Tensor<Jet>& t) {
  Tensor<double> out(t.dim(), t.rank());
  for (int k = 0; k < t.size(); ++k) out.flat(k) = t.flat(k).value();
  return out;
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_difference(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.flat(k) - b.flat(k)));
  return m;
}

}  // namespace cqg
