// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mixed-radix serialization of dense tensors and mode-k matricizations.
//
// A tensor of shape n = [n_0, ..., n_{m-1}] is stored flat with the last mode
// varying fastest: entry k lives at sum_i k_i * b_i with b_{m-1} = 1 and
// b_i = n_{i+1} * b_{i+1}. All indices, including modes, are 0-based.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgk/errors.hpp"

namespace sgk {

using Index = std::size_t;
using MultiIndex = std::vector<Index>;

class Shape {
 public:
  Shape() = default;

  explicit Shape(std::vector<Index> extents) : n_(std::move(extents)) {
    if (n_.empty()) throw InputError("tensor", "shape must have at least one mode");
    total_ = 1;
    for (Index e : n_) {
      if (e == 0) throw InputError("tensor", "shape extents must be positive");
      if (total_ > std::numeric_limits<Index>::max() / e)
        throw InputError("tensor", "shape product overflows the index range");
      total_ *= e;
    }
  }

  Shape(std::initializer_list<Index> extents)
      : Shape(std::vector<Index>(extents)) {}

  Index modes() const noexcept { return n_.size(); }
  Index operator[](Index i) const { return n_[i]; }
  Index total() const noexcept { return total_; }
  const std::vector<Index>& extents() const noexcept { return n_; }

  /// Same shape with mode `k` resized to `extent`.
  Shape with_extent(Index k, Index extent) const {
    auto n = n_;
    n.at(k) = extent;
    return Shape(std::move(n));
  }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<Index> n_;
  Index total_ = 0;
};

inline std::vector<Index> strides(const Shape& n) {
  std::vector<Index> b(n.modes());
  Index acc = 1;
  for (Index i = n.modes(); i-- > 0;) {
    b[i] = acc;
    acc *= n[i];
  }
  return b;
}

inline Index to_scalar_index(std::span<const Index> k, const Shape& n) {
  if (k.size() != n.modes())
    throw InputError("tensor", "multi-index has " + std::to_string(k.size()) +
                                   " components, shape has " +
                                   std::to_string(n.modes()));
  Index p = 0;
  for (Index i = 0; i < k.size(); ++i) {
    if (k[i] >= n[i])
      throw InputError("tensor", "component " + std::to_string(i) + " = " +
                                     std::to_string(k[i]) + " out of range " +
                                     std::to_string(n[i]));
    p = p * n[i] + k[i];
  }
  return p;
}

/// Writes the multi-index of `p` into `k` (size n.modes()) without allocating.
inline void to_multi_index(Index p, const Shape& n, std::span<Index> k) {
  if (p >= n.total())
    throw InputError("tensor", "scalar index " + std::to_string(p) +
                                   " out of range " + std::to_string(n.total()));
  if (k.size() != n.modes())
    throw InputError("tensor", "output has " + std::to_string(k.size()) +
                                   " components, shape has " + std::to_string(n.modes()));
  for (Index i = n.modes(); i-- > 0;) {
    k[i] = p % n[i];
    p /= n[i];
  }
}

inline MultiIndex to_multi_index(Index p, const Shape& n) {
  if (p >= n.total())
    throw InputError("tensor", "scalar index " + std::to_string(p) +
                                   " out of range " + std::to_string(n.total()));
  MultiIndex k(n.modes());
  for (Index i = n.modes(); i-- > 0;) {
    k[i] = p % n[i];
    p /= n[i];
  }
  return k;
}

/// Linear address of row `o`, column `p` of the mode-`k` matricization.
/// Columns enumerate the remaining modes in the order of the stride system
/// with mode `k` removed.
inline Index matricize_index(Index k, Index o, Index p, const Shape& n) {
  if (k >= n.modes())
    throw InputError("tensor", "mode " + std::to_string(k) + " out of range");
  if (o >= n[k])
    throw InputError("tensor", "row " + std::to_string(o) + " out of range " +
                                   std::to_string(n[k]));
  const Index cols = n.total() / n[k];
  if (p >= cols)
    throw InputError("tensor", "column " + std::to_string(p) +
                                   " out of range " + std::to_string(cols));
  // b runs through the strides b_0, b_1, ... without materializing them.
  Index b = n.total();
  Index z = 0;
  Index r = p;
  for (Index i = 0; i < k; ++i) {
    b /= n[i];
    const Index s = b / n[k];
    z += (r / s) * b;
    r %= s;
  }
  b /= n[k];
  z += o * b;
  for (Index i = k + 1; i < n.modes(); ++i) {
    b /= n[i];
    z += (r / b) * b;
    r %= b;
  }
  return z;
}

struct LinearTensor {
  Shape shape;
  std::vector<double> data;

  LinearTensor() = default;
  explicit LinearTensor(Shape s, double fill = 0.0)
      : shape(std::move(s)), data(shape.total(), fill) {}
  LinearTensor(Shape s, std::vector<double> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape.total())
      throw InputError("tensor", "data length " + std::to_string(data.size()) +
                                     " does not match shape product " +
                                     std::to_string(shape.total()));
  }
};

namespace detail {

// Column p of the mode-k unfolding splits as p = outer * b_k + inner; the
// address is outer * n_k * b_k + o * b_k + inner.
template <class F>
void for_each_unfolded(const Shape& n, Index k, F&& f) {
  const auto b = strides(n);
  const Index inner = b[k];
  const Index outer = n.total() / (n[k] * inner);
  const Index block = n[k] * inner;
  for (Index q = 0; q < outer; ++q)
    for (Index o = 0; o < n[k]; ++o)
      for (Index r = 0; r < inner; ++r)
        f(o, q * inner + r, q * block + o * inner + r);
}

}  // namespace detail

inline Eigen::MatrixXd matricize(const LinearTensor& t, Index k) {
  if (k >= t.shape.modes())
    throw InputError("tensor", "mode " + std::to_string(k) + " out of range");
  const Index rows = t.shape[k];
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(t.shape.total() / rows));
  detail::for_each_unfolded(t.shape, k, [&](Index o, Index p, Index z) {
    m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(p)) = t.data[z];
  });
  return m;
}

inline LinearTensor dematricize(const Eigen::MatrixXd& m, Index k,
                                const Shape& n) {
  if (k >= n.modes())
    throw InputError("tensor", "mode " + std::to_string(k) + " out of range");
  if (static_cast<Index>(m.rows()) != n[k] ||
      static_cast<Index>(m.cols()) != n.total() / n[k])
    throw InputError("tensor", "matrix is " + std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()) +
                                   ", expected " + std::to_string(n[k]) + "x" +
                                   std::to_string(n.total() / n[k]));
  LinearTensor t(n);
  detail::for_each_unfolded(n, k, [&](Index o, Index p, Index z) {
    t.data[z] = m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(p));
  });
  return t;
}

}  // namespace sgk
