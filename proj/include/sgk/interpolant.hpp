// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sparse-grid kernel interpolation by the combination technique. Every plan
// entry j solves the Kronecker system
//
//   (K^{(1)}_{j_1} ⊗ ... ⊗ K^{(m)}_{j_m}) alpha_j = f_j
//
// by one directional solve per mode on the mode-i unfolding of alpha_j. The
// interpolant is sum_j c_j u_j with u_j the full-grid interpolant at level j.

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sgk/combitech.hpp"
#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"
#include "sgk/kernel.hpp"
#include "sgk/solver.hpp"
#include "sgk/tensor.hpp"

namespace sgk {

inline std::string format_multi_index(std::span<const Index> j) {
  std::ostringstream os;
  os << '(';
  for (Index i = 0; i < j.size(); ++i) os << (i ? "," : "") << j[i];
  os << ')';
  return os.str();
}

/// f over the full product space; the argument concatenates the direction blocks.
using TestFunction = std::function<double(std::span<const double>)>;

/// Values keyed by per-direction global point indices into each hierarchy's base set.
class ValueTable {
 public:
  void set(MultiIndex key, double value) { values_[std::move(key)] = value; }

  std::optional<double> find(const MultiIndex& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  bool erase(const MultiIndex& key) { return values_.erase(key) != 0; }
  Index size() const noexcept { return values_.size(); }

 private:
  std::map<MultiIndex, double> values_;
};

class DataSource {
 public:
  DataSource(TestFunction f) : source_(std::move(f)) {}
  DataSource(ValueTable t) : source_(std::move(t)) {}

  bool is_function() const noexcept { return std::holds_alternative<TestFunction>(source_); }
  const TestFunction& function() const { return std::get<TestFunction>(source_); }
  const ValueTable& table() const { return std::get<ValueTable>(source_); }

 private:
  std::variant<TestFunction, ValueTable> source_;
};

namespace detail {

inline Shape entry_shape(const std::vector<NestedHierarchy>& h, std::span<const Index> j) {
  std::vector<Index> n(j.size());
  for (Index i = 0; i < j.size(); ++i) {
    if (j[i] > h[i].depth())
      throw InputError("interpolant", "level " + std::to_string(j[i]) + " in direction " +
                                          std::to_string(i) + " exceeds hierarchy depth " +
                                          std::to_string(h[i].depth()));
    n[i] = h[i].level_size(j[i]);
  }
  return Shape(std::move(n));
}

// Applies `op(i, M)` to every mode-i unfolding in turn, i = 0..m-1. `op`
// returns the new unfolding, whose row count becomes the new extent of mode i.
template <class Op>
LinearTensor directional_sweep(LinearTensor t, Op&& op) {
  for (Index i = 0; i < t.shape.modes(); ++i) {
    Eigen::MatrixXd m = matricize(t, i);
    Eigen::MatrixXd out = op(i, std::move(m));
    t = dematricize(out, i, t.shape.with_extent(i, static_cast<Index>(out.rows())));
  }
  return t;
}

inline int thread_budget(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Runs body(e) for e in [0, n) in parallel and rethrows the first exception
// in index order.
template <class Body>
void parallel_entries(Index n, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(thread_budget(threads))
  for (std::int64_t e = 0; e < count; ++e) {
    try {
      body(static_cast<Index>(e));
    } catch (...) {
      errors[static_cast<Index>(e)] = std::current_exception();
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace detail

/// f sampled on the tensor grid X_j in stride order, each direction's points
/// in hierarchy order.
inline LinearTensor assemble_rhs(const DataSource& data,
                                 const std::vector<NestedHierarchy>& hierarchies,
                                 std::span<const Index> j) {
  if (j.size() != hierarchies.size())
    throw InputError("interpolant", "level multi-index has " + std::to_string(j.size()) +
                                        " entries for " + std::to_string(hierarchies.size()) +
                                        " directions");
  const Shape shape = detail::entry_shape(hierarchies, j);
  const Index m = j.size();
  Index total_dim = 0;
  for (const auto& h : hierarchies) total_dim += h.dim();

  LinearTensor t(shape);
  std::vector<double> point(total_dim);
  MultiIndex key(m);
  MultiIndex k(m, 0);
  for (Index z = 0; z < shape.total(); ++z) {
    Index offset = 0;
    for (Index i = 0; i < m; ++i) {
      key[i] = hierarchies[i].level(j[i])[k[i]];
      if (data.is_function()) {
        auto p = hierarchies[i].base()[key[i]];
        std::copy(p.begin(), p.end(), point.begin() + static_cast<std::ptrdiff_t>(offset));
      }
      offset += hierarchies[i].dim();
    }
    if (data.is_function()) {
      t.data[z] = data.function()(point);
    } else {
      auto v = data.table().find(key);
      if (!v)
        throw MissingDataError("interpolant", "no value for point indices " +
                                                  format_multi_index(key) + " (entry " +
                                                  format_multi_index(j) + ")");
      t.data[z] = *v;
    }
    // advance k in stride order (last mode fastest)
    for (Index i = m; i-- > 0;) {
      if (++k[i] < shape[i]) break;
      k[i] = 0;
    }
  }
  return t;
}

struct ComputeOptions {
  /// Threads for the loop over plan entries; 0 uses the OpenMP default.
  int threads = 0;
  /// Also compute max relative residual ||K_j alpha_j - f_j||_inf / ||f_j||_inf.
  bool residuals = false;
};

struct SolveReport {
  Index plan_entries = 0;
  Index factorizations = 0;
  Index sparse_grid_points = 0;
  double max_residual = 0.0;
  double max_jitter = 0.0;
  double max_condition = 0.0;
};

class SparseGridInterpolant {
 public:
  SparseGridInterpolant(CombinationPlan plan, ProductKernel kernel,
                        std::vector<NestedHierarchy> hierarchies,
                        std::vector<LinearTensor> coefficients)
      : plan_(std::move(plan)),
        kernel_(std::move(kernel)),
        hierarchies_(std::move(hierarchies)),
        coefficients_(std::move(coefficients)) {
    if (coefficients_.size() != plan_.size())
      throw InputError("interpolant", "one coefficient tensor per plan entry required");
    for (Index e = 0; e < plan_.size(); ++e) {
      const Shape expect = detail::entry_shape(hierarchies_, plan_.entries()[e].level);
      if (!(coefficients_[e].shape == expect) || coefficients_[e].data.size() != expect.total())
        throw InputError("interpolant", "coefficient tensor shape mismatch for entry " +
                                            format_multi_index(plan_.entries()[e].level));
    }
  }

  const CombinationPlan& plan() const noexcept { return plan_; }
  const ProductKernel& kernel() const noexcept { return kernel_; }
  const std::vector<NestedHierarchy>& hierarchies() const noexcept { return hierarchies_; }
  const std::vector<LinearTensor>& coefficients() const noexcept { return coefficients_; }
  const SolveReport& report() const noexcept { return report_; }
  void set_report(SolveReport r) { report_ = r; }

  Index sparse_grid_points() const {
    std::vector<std::vector<Index>> sizes;
    for (Index i = 0; i < hierarchies_.size(); ++i) {
      std::vector<Index> s;
      for (Index l = 0; l <= plan_.max_level(i); ++l) s.push_back(hierarchies_[i].level_size(l));
      sizes.push_back(std::move(s));
    }
    return sparse_grid_size(sizes, plan_.weights(), plan_.level());
  }

 private:
  CombinationPlan plan_;
  ProductKernel kernel_;
  std::vector<NestedHierarchy> hierarchies_;
  std::vector<LinearTensor> coefficients_;
  SolveReport report_;
};

namespace detail {

inline void check_coverage(const DataSource& data, const std::vector<NestedHierarchy>& h,
                           const CombinationPlan& plan) {
  if (data.is_function()) return;
  // The finest tensor grid of each entry contains all of the entry's points.
  for (const auto& e : plan.entries()) {
    const Shape shape = entry_shape(h, e.level);
    MultiIndex key(e.level.size());
    for (Index z = 0; z < shape.total(); ++z) {
      const auto k = to_multi_index(z, shape);
      for (Index i = 0; i < key.size(); ++i) key[i] = h[i].level(e.level[i])[k[i]];
      if (!data.table().find(key))
        throw MissingDataError("interpolant", "no value for point indices " +
                                                  format_multi_index(key) + " (entry " +
                                                  format_multi_index(e.level) + ")");
    }
  }
}

inline double kronecker_residual(const LinearTensor& alpha, const LinearTensor& f,
                                 const FactorCache& cache, std::span<const Index> j) {
  const auto kf = directional_sweep(alpha, [&](Index i, Eigen::MatrixXd m) -> Eigen::MatrixXd {
    return cache.get(i, j[i]).matrix() * m;
  });
  double num = 0.0, den = 0.0;
  for (Index z = 0; z < f.data.size(); ++z) {
    num = std::max(num, std::abs(kf.data[z] - f.data[z]));
    den = std::max(den, std::abs(f.data[z]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace detail

/// Solves every plan entry with the cached univariate factorizations.
inline SparseGridInterpolant compute(const ProductKernel& kernel,
                                     std::vector<NestedHierarchy> hierarchies,
                                     const DataSource& data, const WeightVector& w,
                                     Index level, const ComputeOptions& opts = {}) {
  const Index m = kernel.factors();
  if (hierarchies.size() != m)
    throw InputError("interpolant", std::to_string(hierarchies.size()) +
                                        " hierarchies supplied for " + std::to_string(m) +
                                        " kernel factors");
  auto plan = make_plan(m, level, w);
  for (Index i = 0; i < m; ++i)
    if (plan.max_level(i) > hierarchies[i].depth())
      throw InputError("interpolant", "plan needs level " + std::to_string(plan.max_level(i)) +
                                          " in direction " + std::to_string(i) +
                                          " but the hierarchy has depth " +
                                          std::to_string(hierarchies[i].depth()));
  detail::check_coverage(data, hierarchies, plan);
  const FactorCache cache = build_cache(kernel, hierarchies, plan);

  std::vector<LinearTensor> alphas(plan.size());
  std::vector<double> residuals(plan.size(), 0.0);
  detail::parallel_entries(plan.size(), opts.threads, [&](Index e) {
    const auto& j = plan.entries()[e].level;
    const LinearTensor f = assemble_rhs(data, hierarchies, j);
    alphas[e] = detail::directional_sweep(f, [&](Index i, Eigen::MatrixXd mat) {
      cache.get(i, j[i]).solve_in_place(mat);
      return mat;
    });
    if (opts.residuals) residuals[e] = detail::kronecker_residual(alphas[e], f, cache, j);
  });

  SolveReport report;
  report.plan_entries = plan.size();
  report.factorizations = cache.size();
  report.max_jitter = cache.max_jitter();
  for (const auto& [key, f] : cache.entries())
    report.max_condition = std::max(report.max_condition, f->condition_estimate());
  for (double r : residuals) report.max_residual = std::max(report.max_residual, r);

  SparseGridInterpolant out(std::move(plan), kernel, std::move(hierarchies), std::move(alphas));
  report.sparse_grid_points = out.sparse_grid_points();
  out.set_report(report);
  return out;
}

struct EvaluateOptions {
  int threads = 0;
};

/// Values on the tensor grid eval_grids[0] x ... x eval_grids[m-1], in
/// stride order over the evaluation grid sizes.
inline LinearTensor evaluate(const SparseGridInterpolant& interp,
                             const std::vector<PointSet>& eval_grids,
                             const EvaluateOptions& opts = {}) {
  const Index m = interp.kernel().factors();
  if (eval_grids.size() != m)
    throw InputError("interpolant", std::to_string(eval_grids.size()) +
                                        " evaluation grids supplied for " + std::to_string(m) +
                                        " directions");
  std::vector<Index> q(m);
  std::vector<Eigen::MatrixXd> cross(m);
  for (Index i = 0; i < m; ++i) {
    const auto& h = interp.hierarchies()[i];
    if (eval_grids[i].dim() != h.dim())
      throw InputError("interpolant", "evaluation grid " + std::to_string(i) +
                                          " has dimension " + std::to_string(eval_grids[i].dim()) +
                                          ", direction has " + std::to_string(h.dim()));
    if (eval_grids[i].empty())
      throw InputError("interpolant", "evaluation grid " + std::to_string(i) + " is empty");
    q[i] = eval_grids[i].size();
    // Levels are prefixes of one another, so every level's cross matrix is a
    // leading column block of the one for the deepest level in the plan.
    cross[i] = kernel_matrix(interp.kernel().factor(i), eval_grids[i],
                             h.level_points(interp.plan().max_level(i)));
  }

  LinearTensor u{Shape(q)};
  const auto& entries = interp.plan().entries();
  const Index batch = static_cast<Index>(std::max(1, detail::thread_budget(opts.threads)));
  for (Index start = 0; start < entries.size(); start += batch) {
    const Index stop = std::min(entries.size(), start + batch);
    std::vector<LinearTensor> partial(stop - start);
    detail::parallel_entries(stop - start, opts.threads, [&](Index b) {
      const Index e = start + b;
      const auto& alpha = interp.coefficients()[e];
      partial[b] = detail::directional_sweep(alpha, [&](Index i, Eigen::MatrixXd mat) -> Eigen::MatrixXd {
        return cross[i].leftCols(mat.rows()) * mat;
      });
    });
    // Ordered accumulation keeps the result independent of the schedule.
    for (Index b = 0; b < partial.size(); ++b) {
      const double c = static_cast<double>(entries[start + b].coefficient);
      const auto& p = partial[b].data;
      for (Index z = 0; z < u.data.size(); ++z) u.data[z] += c * p[z];
    }
  }
  return u;
}

/// Values at arbitrary points of the product space (one full-dimensional
/// point per row).
inline std::vector<double> evaluate_at_points(const SparseGridInterpolant& interp,
                                              const PointSet& points,
                                              const EvaluateOptions& opts = {}) {
  const auto& kernel = interp.kernel();
  const Index m = kernel.factors();
  if (points.dim() != kernel.total_dim())
    throw InputError("interpolant", "points have dimension " + std::to_string(points.dim()) +
                                        ", product space has " +
                                        std::to_string(kernel.total_dim()));
  std::vector<PointSet> nodes;
  for (Index i = 0; i < m; ++i)
    nodes.push_back(interp.hierarchies()[i].level_points(interp.plan().max_level(i)));

  std::vector<double> out(points.size(), 0.0);
  const auto np = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static) num_threads(detail::thread_budget(opts.threads))
  for (std::int64_t pi = 0; pi < np; ++pi) {
    auto x = points[static_cast<Index>(pi)];
    std::vector<std::vector<double>> rows(m);
    for (Index i = 0; i < m; ++i) {
      const auto& f = kernel.factor(i);
      auto xi = x.subspan(kernel.offset(i), f.dim());
      rows[i].resize(nodes[i].size());
      for (Index k = 0; k < nodes[i].size(); ++k) rows[i][k] = f(distance(xi, nodes[i][k]));
    }
    double acc = 0.0;
    std::vector<double> work;
    for (Index e = 0; e < interp.plan().size(); ++e) {
      const auto& alpha = interp.coefficients()[e];
      work = alpha.data;
      Index len = work.size();
      // contract the contiguous last mode first
      for (Index i = m; i-- > 0;) {
        const Index n = alpha.shape[i];
        const Index outer = len / n;
        for (Index o = 0; o < outer; ++o) {
          double s = 0.0;
          for (Index k = 0; k < n; ++k) s += work[o * n + k] * rows[i][k];
          work[o] = s;
        }
        len = outer;
      }
      acc += static_cast<double>(interp.plan().entries()[e].coefficient) * work[0];
    }
    out[static_cast<Index>(pi)] = acc;
  }
  return out;
}

}  // namespace sgk
