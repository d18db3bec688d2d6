// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense Cholesky factorizations of univariate Gram matrices, cached per
// (direction, level) and shared by every plan entry that needs them.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgk/combitech.hpp"
#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"
#include "sgk/kernel.hpp"

namespace sgk {

inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-14, 1e-12, 1e-10};

class Factorization {
 public:
  Factorization(Eigen::MatrixXd matrix, Eigen::LLT<Eigen::MatrixXd> llt, double jitter)
      : matrix_(std::move(matrix)), llt_(std::move(llt)), jitter_(jitter) {
    const auto d = llt_.matrixLLT().diagonal();
    const double hi = d.maxCoeff();
    const double lo = d.minCoeff();
    condition_ = (hi * hi) / (lo * lo);
  }

  Index size() const noexcept { return static_cast<Index>(matrix_.rows()); }
  double jitter_used() const noexcept { return jitter_; }
  /// Ratio of extreme squared pivots of the factor.
  double condition_estimate() const noexcept { return condition_; }
  /// The matrix that was factorized (before any jitter).
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  Eigen::MatrixXd lower() const { return llt_.matrixL(); }

  void solve_in_place(Eigen::Ref<Eigen::MatrixXd> m) const {
    if (static_cast<Index>(m.rows()) != size())
      throw InputError("solver", "right-hand side has " + std::to_string(m.rows()) +
                                     " rows, factorization has size " +
                                     std::to_string(size()));
    llt_.solveInPlace(m);
  }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_;
  double condition_;
};

/// Cholesky factorization, escalating a diagonal shift through
/// kJitterLadder until the pivots stay positive.
inline Factorization factorize(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols() || k.rows() == 0)
    throw InputError("solver", "factorize needs a nonempty square matrix, got " +
                                   std::to_string(k.rows()) + "x" + std::to_string(k.cols()));
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd a = k;
    if (jitter > 0.0) a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all())
      return Factorization(k, std::move(llt), jitter);
  }
  throw IllConditionedError("solver",
                            "Cholesky failed for a " + std::to_string(k.rows()) +
                                "x" + std::to_string(k.rows()) +
                                " Gram matrix after jitter " +
                                std::to_string(kJitterLadder.back()),
                            kJitterLadder.back());
}

inline void solve_in_place(const Factorization& f, Eigen::Ref<Eigen::MatrixXd> m) {
  f.solve_in_place(m);
}

class FactorCache {
 public:
  using Key = std::pair<Index, Index>;

  const Factorization& get(Index direction, Index level) const {
    auto it = entries_.find({direction, level});
    if (it == entries_.end())
      throw InputError("solver", "no factorization cached for direction " +
                                     std::to_string(direction) + ", level " +
                                     std::to_string(level));
    return *it->second;
  }

  bool contains(Index direction, Index level) const {
    return entries_.count({direction, level}) != 0;
  }

  void insert(Index direction, Index level, Factorization f) {
    auto [it, inserted] = entries_.try_emplace(
        {direction, level}, std::make_shared<const Factorization>(std::move(f)));
    if (!inserted)
      throw InputError("solver", "duplicate factorization for direction " +
                                     std::to_string(direction) + ", level " +
                                     std::to_string(level));
  }

  Index size() const noexcept { return entries_.size(); }
  const std::map<Key, std::shared_ptr<const Factorization>>& entries() const noexcept {
    return entries_;
  }

  double max_jitter() const {
    double j = 0.0;
    for (const auto& [key, f] : entries_) j = std::max(j, f->jitter_used());
    return j;
  }

 private:
  std::map<Key, std::shared_ptr<const Factorization>> entries_;
};

/// One factorization per distinct (direction, level) in the plan.
inline FactorCache build_cache(const ProductKernel& kernel,
                               const std::vector<NestedHierarchy>& hierarchies,
                               const CombinationPlan& plan) {
  if (hierarchies.size() != kernel.factors() || plan.directions() != kernel.factors())
    throw InputError("solver", "kernel, hierarchies and plan disagree on the number of directions");
  std::vector<FactorCache::Key> keys;
  for (Index i = 0; i < plan.directions(); ++i) {
    if (hierarchies[i].dim() != kernel.factor(i).dim())
      throw InputError("solver", "direction " + std::to_string(i) + " has point dimension " +
                                     std::to_string(hierarchies[i].dim()) +
                                     " but kernel dimension " +
                                     std::to_string(kernel.factor(i).dim()));
    for (Index l : plan.levels_in_direction(i)) {
      if (l > hierarchies[i].depth())
        throw InputError("solver", "plan needs level " + std::to_string(l) + " in direction " +
                                       std::to_string(i) + " but the hierarchy has depth " +
                                       std::to_string(hierarchies[i].depth()));
      keys.emplace_back(i, l);
    }
  }
  FactorCache cache;
  for (const auto& [i, l] : keys) {
    try {
      cache.insert(i, l, factorize(kernel_matrix(kernel.factor(i), hierarchies[i].level_points(l))));
    } catch (const IllConditionedError& e) {
      throw IllConditionedError("solver",
                                std::string(e.what()) + " (direction " + std::to_string(i) +
                                    ", level " + std::to_string(l) + ")",
                                e.last_jitter());
    }
  }
  return cache;
}

}  // namespace sgk
