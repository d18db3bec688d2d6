// SPDX-License-Identifier: Apache-2.0
#pragma once

// Matérn (Sobolev-spline) kernels parameterized by the Bessel order beta:
//
//   kappa(r) = amplitude * 2^{1-beta} / Gamma(beta) * z^beta * K_beta(z),
//   z = r / sigma.
//
// With amplitude 1 this has unit diagonal, and in dimension d it reproduces
// a space norm-equivalent to H^{beta + d/2}.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"

namespace sgk {

/// Modified Bessel function of the second kind, K_beta(z), for z > 0.
inline double bessel_k(double beta, double z) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw DomainError("kernel", "bessel_k requires finite z > 0, got " +
                                    std::to_string(z));
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw DomainError("kernel", "bessel_k requires a finite order >= 0");
  return boost::math::cyl_bessel_k(beta, z);
}

class MaternKernel {
 public:
  MaternKernel(double beta, double sigma, Index dim, double amplitude = 1.0)
      : beta_(beta), sigma_(sigma), dim_(dim), amplitude_(amplitude) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw InputError("kernel", "beta must be positive, got " + std::to_string(beta));
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InputError("kernel", "sigma must be positive, got " + std::to_string(sigma));
    if (dim == 0) throw InputError("kernel", "dimension must be at least 1");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
      throw InputError("kernel", "amplitude must be positive");
    norm_ = amplitude_ * std::exp2(1.0 - beta_) / boost::math::tgamma(beta_);
  }

  /// Kernel with the default length scale 2 sqrt(d).
  static MaternKernel with_default_sigma(double beta, Index dim) {
    return MaternKernel(beta, 2.0 * std::sqrt(static_cast<double>(dim)), dim);
  }

  double beta() const noexcept { return beta_; }
  double sigma() const noexcept { return sigma_; }
  Index dim() const noexcept { return dim_; }
  double amplitude() const noexcept { return amplitude_; }
  /// Sobolev order of the reproduced space.
  double smoothness() const noexcept { return beta_ + 0.5 * static_cast<double>(dim_); }

  /// Value at distance r >= 0. Underflows to 0 once K_beta does (r/sigma > ~700).
  double operator()(double r) const {
    if (!std::isfinite(r) || r < 0.0)
      throw InputError("kernel", "distance must be finite and nonnegative, got " +
                                     std::to_string(r));
    if (r == 0.0) return amplitude_;
    const double z = r / sigma_;
    if (z > 700.0) return 0.0;
    return norm_ * std::pow(z, beta_) * boost::math::cyl_bessel_k(beta_, z);
  }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != dim_ || y.size() != dim_)
      throw InputError("kernel", "point dimension mismatch: kernel dim " +
                                     std::to_string(dim_));
    return (*this)(distance(x, y));
  }

 private:
  double beta_;
  double sigma_;
  Index dim_;
  double amplitude_;
  double norm_;
};

inline double matern_eval(const MaternKernel& k, double r) { return k(r); }

class ProductKernel {
 public:
  explicit ProductKernel(std::vector<MaternKernel> factors)
      : factors_(std::move(factors)) {
    if (factors_.empty()) throw InputError("kernel", "product kernel needs a factor");
    for (const auto& f : factors_) {
      offsets_.push_back(total_dim_);
      total_dim_ += f.dim();
    }
  }

  Index factors() const noexcept { return factors_.size(); }
  const MaternKernel& factor(Index i) const { return factors_.at(i); }
  Index offset(Index i) const { return offsets_.at(i); }
  Index total_dim() const noexcept { return total_dim_; }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& f : factors_) d.push_back(f.dim());
    return d;
  }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != total_dim_ || y.size() != total_dim_)
      throw InputError("kernel", "point dimension " + std::to_string(x.size()) +
                                     "/" + std::to_string(y.size()) +
                                     " does not match product dimension " +
                                     std::to_string(total_dim_));
    double v = 1.0;
    for (Index i = 0; i < factors_.size(); ++i) {
      const Index d = factors_[i].dim();
      v *= factors_[i](x.subspan(offsets_[i], d), y.subspan(offsets_[i], d));
    }
    return v;
  }

 private:
  std::vector<MaternKernel> factors_;
  std::vector<Index> offsets_;
  Index total_dim_ = 0;
};

inline double product_eval(const ProductKernel& k, std::span<const double> x,
                           std::span<const double> y) {
  return k(x, y);
}

/// Gram matrix on X (symmetric, diagonal equal to the amplitude).
inline Eigen::MatrixXd kernel_matrix(const MaternKernel& k, const PointSet& x) {
  if (x.dim() != k.dim())
    throw InputError("kernel", "point set dimension " + std::to_string(x.dim()) +
                                   " does not match kernel dimension " +
                                   std::to_string(k.dim()));
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd m(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = k(0.0);
    for (Eigen::Index j = i + 1; j < n; ++j)
      m(i, j) = k(distance(x[static_cast<Index>(i)], x[static_cast<Index>(j)]));
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) m(i, j) = m(j, i);
  return m;
}

/// Cross-kernel matrix with rows indexed by X and columns by Y.
inline Eigen::MatrixXd kernel_matrix(const MaternKernel& k, const PointSet& x,
                                     const PointSet& y) {
  if (x.dim() != k.dim() || y.dim() != k.dim())
    throw InputError("kernel", "point set dimensions " + std::to_string(x.dim()) +
                                   "/" + std::to_string(y.dim()) +
                                   " do not match kernel dimension " +
                                   std::to_string(k.dim()));
  const auto rows = static_cast<Eigen::Index>(x.size());
  const auto cols = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd m(rows, cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = k(distance(x[static_cast<Index>(i)], y[static_cast<Index>(j)]));
  return m;
}

}  // namespace sgk
