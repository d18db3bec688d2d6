// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scaled-down convergence and property studies. Each acceptance criterion is
// executed by exactly one study; run_study(name) returns the checks with
// measured values and a pass/fail verdict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sgk/functions.hpp"
#include "sgk/sgk.hpp"

namespace sgk::bench {

struct Check {
  int criterion = 0;
  std::string label;
  std::string measured;
  std::string expected;
  bool pass = false;
  /// Reported but never fails the study.
  bool soft = false;
};

struct StudyReport {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.soft || c.pass; });
  }
};

struct StudyInfo {
  std::string name;
  std::vector<int> criteria;
  std::string summary;
};

inline const std::vector<StudyInfo>& studies() {
  static const std::vector<StudyInfo> list{
      {"tensor-algebra", {1}, "index round trips and matricization bijections"},
      {"kronecker-oracle", {2}, "directional solves against dense Kronecker solves"},
      {"combination-coefficients", {3}, "partition of unity and coefficient support"},
      {"node-exactness", {4}, "sparse-grid interpolation at every plan node"},
      {"fig4-analog", {5, 6}, "univariate and isotropic L2 convergence, f = 1"},
      {"fig7-analog", {7}, "mixed-dimension rates for the three weight strategies"},
      {"table1-analog", {8}, "equidistant and tensor level counts"},
      {"fig1-subsample", {9}, "top-down subsampling of 1000 random points"},
      {"hygiene", {10}, "closed forms, quadrature, scaling invariance, determinism"},
      {"timing-sweep", {}, "compute/evaluate wall time against N (trend only)"},
  };
  return list;
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class T>
T param(const nlohmann::json& cfg, const char* key, T fallback) {
  return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

// Boundary-free or boundary grids per direction; depth chosen by the caller.
inline std::vector<NestedHierarchy> grids(const std::vector<Index>& dims,
                                          const std::vector<Index>& depth, bool boundary) {
  std::vector<NestedHierarchy> h;
  for (Index i = 0; i < dims.size(); ++i) h.push_back(equidistant_hierarchy(dims[i], depth[i], boundary));
  return h;
}

// Matérn factors with beta = 25/16 - d/2 and sigma = 2 sqrt(d).
inline ProductKernel sobolev_kernel(const std::vector<Index>& dims) {
  std::vector<MaternKernel> f;
  for (Index d : dims) f.push_back(MaternKernel::with_default_sigma(25.0 / 16.0 - 0.5 * static_cast<double>(d), d));
  return ProductKernel(std::move(f));
}

inline Index max_depth(const WeightVector& w, Index i, Index level) {
  return sgk::detail::axis_bound(w, i, level);
}

// ---------------------------------------------------------------- criterion 1

inline void tensor_shape_check(const Shape& s, std::vector<char>& seen, Index& failures) {
  const Index total = s.total();
  MultiIndex k(s.modes(), 0), back(s.modes());
  for (Index p = 0; p < total; ++p) {
    to_multi_index(p, s, back);
    if (to_scalar_index(k, s) != p || back != k) ++failures;
    for (Index i = s.modes(); i-- > 0;) {
      if (++k[i] < s[i]) break;
      k[i] = 0;
    }
  }
  const auto stride = strides(s);
  for (Index mode = 0; mode < s.modes(); ++mode) {
    seen.assign(total, 0);
    const Index cols = total / s[mode];
    for (Index o = 0; o < s[mode]; ++o)
      for (Index p = 0; p < cols; ++p) {
        const Index z = matricize_index(mode, o, p, s);
        // Mode 0 is a plain reshape.
        if (z >= total || seen[z] || (z / stride[mode]) % s[mode] != o || (mode == 0 && z != o * cols + p))
          ++failures;
        else
          seen[z] = 1;
      }
  }
}

inline StudyReport tensor_algebra(const nlohmann::json& cfg) {
  StudyReport r{"tensor-algebra", {}, {}, 0.0};
  const Index budget = param<Index>(cfg, "max_product", 10000);
  const Index random_shapes = param<Index>(cfg, "random_shapes", 2000);
  const auto seed = param<std::uint64_t>(cfg, "seed", 20240901);
  Index shapes = 0, failures = 0, elements = 0;
  std::vector<char> seen;
  // Exhaustive over the box n_i <= floor(budget^{1/m}) for every m <= 4.
  for (Index m = 1; m <= 4; ++m) {
    Index edge = static_cast<Index>(std::floor(std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(m)) + 1e-9));
    while (static_cast<double>(edge + 1) <= std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(m)) + 1e-9) ++edge;
    const Shape box(std::vector<Index>(m, edge));
    for (Index z = 0; z < box.total(); ++z) {
      auto ext = to_multi_index(z, box);
      for (auto& e : ext) ++e;
      const Shape s(ext);
      if (s.total() > budget) continue;
      tensor_shape_check(s, seen, failures);
      ++shapes;
      elements += s.total();
    }
  }
  // Seeded shapes with arbitrary extents and product <= budget.
  std::mt19937_64 rng(seed);
  for (Index t = 0; t < random_shapes; ++t) {
    const Index m = 1 + rng() % 4;
    std::vector<Index> ext;
    Index rest = budget;
    for (Index i = 0; i < m; ++i) {
      const Index e = 1 + rng() % rest;
      ext.push_back(e);
      rest /= e;
    }
    std::shuffle(ext.begin(), ext.end(), rng);
    const Shape s(ext);
    tensor_shape_check(s, seen, failures);
    ++shapes;
    elements += s.total();
  }
  r.checks.push_back({1, "round trip and matricization bijection",
                      std::to_string(failures) + " mismatches over " + std::to_string(shapes) +
                          " shapes (" + std::to_string(elements) + " elements)",
                      "0 mismatches", failures == 0});
  return r;
}

// ---------------------------------------------------------------- criterion 2

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double separation_target(Index n, Index d) {
  return 0.4 / std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d));
}

// Rejection-sampled points with separation >= separation_target(n, d).
inline PointSet separated_points(Index n, Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double q = separation_target(n, d);
  PointSet x(d);
  std::vector<double> p(d);
  while (x.size() < n) {
    for (auto& c : p) c = u(rng);
    bool ok = true;
    for (Index i = 0; i < x.size() && ok; ++i) ok = distance(x[i], p) >= q;
    if (ok) x.push_back(p);
  }
  return x;
}

inline StudyReport kronecker_oracle(const nlohmann::json& cfg) {
  StudyReport r{"kronecker-oracle", {}, {}, 0.0};
  const Index trials = param<Index>(cfg, "trials", 50);
  const auto seed = param<std::uint64_t>(cfg, "seed", 7);
  const double tol = param<double>(cfg, "tolerance", 1e-10);
  std::mt19937_64 rng(seed);
  const double betas[] = {0.5, 9.0 / 16.0, 17.0 / 16.0, 1.5};
  double worst = 0.0, worst_cond = 0.0;
  Index worst_trial = 0;
  for (Index t = 0; t < trials; ++t) {
    const Index m = 2 + t % 2;
    const Index max_n = m == 2 ? 12 : 10;
    std::vector<MaternKernel> factors;
    std::vector<NestedHierarchy> h;
    Eigen::MatrixXd big = Eigen::MatrixXd::Ones(1, 1);
    for (Index i = 0; i < m; ++i) {
      const Index d = 1 + rng() % 2;
      const Index n = 2 + rng() % (max_n - 1);
      // Length scale tied to the separation keeps the Kronecker system well
      // conditioned, so the dense oracle itself is accurate to ~1e-12.
      const double sigma = separation_target(n, d) * std::uniform_real_distribution<double>(1.0, 4.0)(rng);
      factors.emplace_back(betas[rng() % 4], sigma, d);
      auto x = separated_points(n, d, rng);
      std::vector<Index> all(n);
      for (Index k = 0; k < n; ++k) all[k] = k;
      h.emplace_back(x, std::vector<std::vector<Index>>{all});
      big = kron(big, kernel_matrix(factors.back(), x));
    }
    const ProductKernel kernel(factors);
    std::vector<Index> ext;
    for (const auto& hi : h) ext.push_back(hi.level_size(0));
    const Shape shape(ext);
    ValueTable table;
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd f(static_cast<Eigen::Index>(shape.total()));
    for (Index z = 0; z < shape.total(); ++z) {
      f[static_cast<Eigen::Index>(z)] = g(rng);
      table.set(to_multi_index(z, shape), f[static_cast<Eigen::Index>(z)]);
    }
    const auto interp = compute(kernel, h, DataSource(table), WeightVector::ones(m), 0);
    const Eigen::VectorXd dense = big.partialPivLu().solve(f);
    worst_cond = std::max(worst_cond, interp.report().max_condition);
    const auto& alpha = interp.coefficients().front().data;
    const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    const double err = (a - dense).norm() / dense.norm();
    if (err > worst) {
      worst = err;
      worst_trial = t;
    }
  }
  r.notes.push_back("largest univariate condition estimate " + fmt(worst_cond, "%.3g"));
  r.checks.push_back({2, "directional solve vs dense Kronecker solve",
                      "max rel. error " + fmt(worst, "%.3e") + " (trial " + std::to_string(worst_trial) + ") over " +
                          std::to_string(trials) + " trials",
                      "<= " + fmt(tol, "%.0e"), worst <= tol});
  return r;
}

// ---------------------------------------------------------------- criterion 3

// Corner-sum coefficient by brute force with exact rational arithmetic.
inline std::int64_t brute_coefficient(const MultiIndex& j, const std::vector<Rational>& w, Index level) {
  std::int64_t lcm = 1;
  for (const auto& r : w) lcm = std::lcm(lcm, r.den);
  std::vector<std::int64_t> wi;
  for (const auto& r : w) wi.push_back(r.num * (lcm / r.den));
  const std::int64_t cap = static_cast<std::int64_t>(level) * lcm;
  std::int64_t c = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << j.size()); ++mask) {
    std::int64_t s = 0;
    int bits = 0;
    for (Index i = 0; i < j.size(); ++i) {
      const bool on = (mask >> i) & 1u;
      bits += on;
      s += (static_cast<std::int64_t>(j[i]) + on) * wi[i];
    }
    if (s <= cap) c += (bits % 2) ? -1 : 1;
  }
  return c;
}

inline StudyReport combination_coefficients(const nlohmann::json&) {
  StudyReport r{"combination-coefficients", {}, {}, 0.0};
  const std::vector<Index> all_dims{1, 2, 3, 1};
  const std::vector<Rational> all_gains{Rational(25, 8), Rational(25, 8), Rational(25, 8), Rational(3, 2)};
  Index plans = 0, bad_sum = 0, bad_support = 0, bad_value = 0;
  for (Index m = 1; m <= 4; ++m) {
    std::vector<Index> dims(all_dims.begin(), all_dims.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<Gain> gains(all_gains.begin(), all_gains.begin() + static_cast<std::ptrdiff_t>(m));
    for (auto kind : {WeightStrategy::accuracy, WeightStrategy::dof, WeightStrategy::cost_benefit}) {
      const auto w = weight_strategy(kind, dims, gains);
      const auto& ex = *w.exact();
      for (Index level = 0; level <= 8; ++level) {
        const auto plan = make_plan(m, level, w);
        ++plans;
        if (plan.coefficient_sum() != 1) ++bad_sum;
        std::map<MultiIndex, std::int64_t> in_plan;
        for (const auto& e : plan.entries()) in_plan[e.level] = e.coefficient;
        std::vector<Index> ext;
        for (Index i = 0; i < m; ++i) ext.push_back(max_depth(w, i, level) + 3);
        const Shape box(ext);
        std::int64_t total = 0;
        for (Index z = 0; z < box.total(); ++z) {
          const auto j = to_multi_index(z, box);
          const auto c = brute_coefficient(j, ex, level);
          const auto lib = coefficient(j, w, level);
          total += in_index_set(j, w, level) ? c : 0;
          if (!in_index_set(j, w, level) && lib != 0) ++bad_support;
          if (in_index_set(j, w, level) && lib != c) ++bad_value;
          auto it = in_plan.find(j);
          if ((it == in_plan.end() ? 0 : it->second) != (in_index_set(j, w, level) ? c : 0)) ++bad_value;
        }
        if (total != 1) ++bad_sum;
      }
    }
  }
  r.checks.push_back({3, "sum of coefficients equals 1", std::to_string(bad_sum) + " failing of " + std::to_string(plans) + " plans", "0", bad_sum == 0});
  r.checks.push_back({3, "coefficient vanishes outside the index set", std::to_string(bad_support) + " violations", "0", bad_support == 0});
  r.checks.push_back({3, "coefficients match brute-force corner sums", std::to_string(bad_value) + " mismatches", "0", bad_value == 0});

  const auto plan = make_plan(2, 2, WeightVector::ones(2));
  std::ostringstream os;
  write_plan(os, plan);
  const std::string expected = "0 1 : -1\n0 2 : 1\n1 0 : -1\n1 1 : 1\n2 0 : 1\n";
  r.checks.push_back({3, "m=2, w=(1,1), J=2 plan", os.str() == expected ? "{(2,0),(1,1),(0,2):+1; (1,0),(0,1):-1}" : os.str(),
                      "{(2,0),(1,1),(0,2):+1; (1,0),(0,1):-1}", os.str() == expected});
  return r;
}

// ---------------------------------------------------------------- criterion 4

inline double node_error(const SparseGridInterpolant& interp, const TestFunction& f) {
  double worst = 0.0, scale = 0.0;
  const auto& h = interp.hierarchies();
  const Index m = h.size();
  for (const auto& e : interp.plan().entries()) {
    std::vector<PointSet> g;
    std::vector<Index> ext;
    for (Index i = 0; i < m; ++i) {
      g.push_back(h[i].level_points(e.level[i]));
      ext.push_back(g.back().size());
    }
    const auto u = evaluate(interp, g);
    const Shape s(ext);
    std::vector<double> x;
    for (Index z = 0; z < s.total(); ++z) {
      const auto k = to_multi_index(z, s);
      x.clear();
      for (Index i = 0; i < m; ++i) {
        auto p = g[i][k[i]];
        x.insert(x.end(), p.begin(), p.end());
      }
      const double fx = f(x);
      worst = std::max(worst, std::abs(u.data[z] - fx));
      scale = std::max(scale, std::abs(fx));
    }
  }
  return worst / scale;
}

inline StudyReport node_exactness(const nlohmann::json& cfg) {
  StudyReport r{"node-exactness", {}, {}, 0.0};
  const double tol = param<double>(cfg, "tolerance", 1e-6);
  const auto f = named_function(param<std::string>(cfg, "function", "prodexp"));
  struct Case {
    std::string label;
    std::vector<Index> dims;
    std::optional<WeightVector> w;
    Index level;
    bool boundary;
    bool random;
  };
  const std::vector<Case> cases{
      {"m=1, J=5", {1}, std::nullopt, 5, false, false},
      {"m=2, w=(1,1), J=5", {1, 1}, std::nullopt, 5, false, false},
      {"m=3, w=(1,1,1), J=5", {1, 1, 1}, std::nullopt, 5, false, false},
      {"dims (1,2), w=(1/2,1), J=4, boundary grids", {1, 2}, WeightVector(std::vector<Rational>{Rational(1, 2), Rational(1)}), 4, true, false},
      {"dims (2,1), subsampled random sets, J=3", {2, 1}, std::nullopt, 3, false, true},
  };
  for (const auto& c : cases) {
    const Index m = c.dims.size();
    const WeightVector w = c.w ? *c.w : WeightVector::ones(m);
    std::vector<NestedHierarchy> h;
    for (Index i = 0; i < m; ++i) {
      const Index depth = max_depth(w, i, c.level);
      if (c.random)
        h.push_back(build_hierarchy(random_cube(c.dims[i] == 1 ? 40 : 150, c.dims[i], 100 + i), depth, {}, false));
      else
        h.push_back(equidistant_hierarchy(c.dims[i], depth, c.boundary));
    }
    const auto interp = compute(sobolev_kernel(c.dims), h, DataSource(f), w, c.level);
    const double err = node_error(interp, f);
    r.checks.push_back({4, c.label, "max rel. node error " + fmt(err, "%.3e") + ", N=" + std::to_string(interp.sparse_grid_points()),
                        "<= " + fmt(tol, "%.0e"), err <= tol});
  }
  return r;
}

// ------------------------------------------------------------- criteria 5, 6

inline ConvergenceRecord l2_study(const std::vector<Index>& levels, Index m, double inset,
                                  const nlohmann::json& cfg, std::vector<std::string>* notes) {
  const double beta = param<double>(cfg, "beta", 17.0 / 16.0);
  const double sigma = param<double>(cfg, "sigma", 2.0);
  const auto f = named_function(param<std::string>(cfg, "function", "const1"));
  const int threads = param<int>(cfg, "threads", 0);
  const Index top = levels.back();
  std::vector<NestedHierarchy> h(m, equidistant_hierarchy(1, top, false));
  ProductKernel kernel(std::vector<MaternKernel>(m, MaternKernel(beta, sigma, 1)));
  ConvergenceRecord rec;
  for (Index level : levels) {
    const auto interp = compute(kernel, h, DataSource(f), WeightVector::ones(m), level, {threads, false});
    L2Options o;
    // At least 2^{J+1} Gauss nodes per axis, the finest grid resolution.
    o.panels_per_dim = std::max<Index>(1, (Index{1} << (level + 1)) / 4);
    o.inset = inset;
    o.threads = threads;
    rec.add(level, interp.sparse_grid_points(), l2_error(interp, f, o));
    if (notes) {
      const auto& row = rec.rows.back();
      notes->push_back("m=" + std::to_string(m) + " J=" + std::to_string(level) + " N=" + std::to_string(row.points) +
                       " L2=" + fmt(row.error, "%.4e") + (row.order ? " order=" + fmt(*row.order, "%.3f") : ""));
    }
  }
  return rec;
}

inline std::vector<Index> range(Index lo, Index hi) {
  std::vector<Index> v;
  for (Index j = lo; j <= hi; ++j) v.push_back(j);
  return v;
}

inline StudyReport fig4_analog(const nlohmann::json& cfg) {
  StudyReport r{"fig4-analog", {}, {}, 0.0};
  const double inset = param<double>(cfg, "inset", 0.1);
  {
    const auto rec = l2_study(range(param<Index>(cfg, "univariate_from", 5), param<Index>(cfg, "univariate_to", 8)), 1, inset, cfg, &r.notes);
    const double slope = fit_order(rec, rec.rows.size()).slope;
    r.checks.push_back({5, "m=1 L2 order, j=5..8", "fitted order " + fmt(slope, "%.3f"), "in [2.8, 3.4]", slope >= 2.8 && slope <= 3.4});
  }
  {
    const auto rec = l2_study(range(param<Index>(cfg, "m2_from", 3), param<Index>(cfg, "m2_to", 7)), 2, inset, cfg, &r.notes);
    const double slope = fit_order(rec, rec.rows.size()).slope;
    r.checks.push_back({6, "m=2, w=(1,1) L2 slope, J=3..7", "fitted slope " + fmt(slope, "%.3f"), ">= 2.5", slope >= 2.5});
  }
  {
    const auto rec = l2_study(range(param<Index>(cfg, "m3_from", 3), param<Index>(cfg, "m3_to", 6)), 3, inset, cfg, &r.notes);
    const double slope = fit_order(rec, rec.rows.size()).slope;
    r.checks.push_back({6, "m=3, w=(1,1,1) L2 slope, J=3..6", "fitted slope " + fmt(slope, "%.3f"), ">= 2.2", slope >= 2.2});
  }
  r.notes.push_back("L2 error over the inset box [" + fmt(inset) + ", " + fmt(1 - inset) + "]^m");
  return r;
}

// ---------------------------------------------------------------- criterion 7

inline double rms_on_random_grid(const SparseGridInterpolant& interp, const TestFunction& f,
                                 const std::vector<PointSet>& g) {
  const auto u = evaluate(interp, g);
  const Index m = g.size();
  std::vector<Index> ext;
  for (const auto& p : g) ext.push_back(p.size());
  const Shape s(ext);
  std::vector<double> ref(s.total());
  std::vector<double> x;
  for (Index z = 0; z < s.total(); ++z) {
    const auto k = to_multi_index(z, s);
    x.clear();
    for (Index i = 0; i < m; ++i) {
      auto p = g[i][k[i]];
      x.insert(x.end(), p.begin(), p.end());
    }
    ref[z] = f(x);
  }
  return rms_error(u.data, ref);
}

inline std::vector<PointSet> inset_random_grids(const std::vector<Index>& dims, Index count,
                                                double inset, std::uint64_t seed) {
  std::vector<PointSet> g;
  for (Index i = 0; i < dims.size(); ++i) {
    auto p = random_cube(count, dims[i], seed + i);
    std::vector<double> c = p.coords();
    for (auto& v : c) v = inset + (1.0 - 2.0 * inset) * v;
    g.emplace_back(dims[i], std::move(c));
  }
  return g;
}

inline std::vector<double> mixed_study(const std::vector<Index>& dims, Index lo, Index hi, Index tail,
                                       const nlohmann::json& cfg, std::vector<std::string>& notes) {
  const auto f = named_function(param<std::string>(cfg, "function", "const1"));
  const double inset = param<double>(cfg, "inset", 0.1);
  const Index samples = param<Index>(cfg, "samples_per_direction", 100);
  const auto seed = param<std::uint64_t>(cfg, "seed", 11);
  const int threads = param<int>(cfg, "threads", 0);
  const Index m = dims.size();
  std::vector<Gain> gains(m, Gain(Rational(25, 8)));
  const auto kinds = {WeightStrategy::accuracy, WeightStrategy::dof, WeightStrategy::cost_benefit};
  std::vector<Index> depth(m, 0);
  for (auto kind : kinds) {
    const auto w = weight_strategy(kind, dims, gains);
    for (Index i = 0; i < m; ++i) depth[i] = std::max(depth[i], max_depth(w, i, hi));
  }
  const auto h = grids(dims, depth, true);
  const auto kernel = sobolev_kernel(dims);
  const auto eval = inset_random_grids(dims, samples, inset, seed);
  std::string tag = "(";
  for (Index i = 0; i < m; ++i) tag += (i ? "," : "") + std::to_string(dims[i]);
  tag += ")";
  std::vector<double> slopes;
  for (auto kind : kinds) {
    const auto w = weight_strategy(kind, dims, gains);
    ConvergenceRecord rec;
    for (Index level = lo; level <= hi; ++level) {
      const auto interp = compute(kernel, h, DataSource(f), w, level, {threads, false});
      rec.add(level, interp.sparse_grid_points(), rms_on_random_grid(interp, f, eval));
      const auto& row = rec.rows.back();
      notes.push_back("dims " + tag + " " + to_string(kind) + " J=" + std::to_string(level) + " N=" +
                      std::to_string(row.points) + " RMS=" + fmt(row.error, "%.4e"));
    }
    slopes.push_back(fit_order(rec, tail).slope);
  }
  return slopes;
}

inline StudyReport fig7_analog(const nlohmann::json& cfg) {
  StudyReport r{"fig7-analog", {}, {}, 0.0};
  const char* names[] = {"accuracy", "dof", "cost-benefit"};
  {
    const Index lo = param<Index>(cfg, "dims12_from", 1), hi = param<Index>(cfg, "dims12_to", 5);
    const auto s = mixed_study({1, 2}, lo, hi, hi - lo, cfg, r.notes);
    for (Index k = 0; k < 3; ++k)
      r.checks.push_back({7, std::string("dims (1,2), ") + names[k] + ", J=" + std::to_string(lo + 1) + ".." + std::to_string(hi),
                          "fitted slope " + fmt(s[k], "%.3f"), "in [1.2, 1.9]", s[k] >= 1.2 && s[k] <= 1.9});
  }
  if (param<bool>(cfg, "dims123", true)) {
    const Index lo = param<Index>(cfg, "dims123_from", 1), hi = param<Index>(cfg, "dims123_to", 3);
    const auto s = mixed_study({1, 2, 3}, lo, hi, hi - lo + 1, cfg, r.notes);
    for (Index k = 0; k < 3; ++k)
      r.checks.push_back({7, std::string("dims (1,2,3), ") + names[k] + ", J=" + std::to_string(lo) + ".." + std::to_string(hi),
                          "fitted slope " + fmt(s[k], "%.3f"), "in [0.7, 1.4]", s[k] >= 0.7 && s[k] <= 1.4, true});
  }
  r.notes.push_back("RMS over a tensor grid of seeded random points per direction, inset 0.1");
  return r;
}

// ---------------------------------------------------------------- criterion 8

inline StudyReport table1_analog(const nlohmann::json& cfg) {
  StudyReport r{"table1-analog", {}, {}, 0.0};
  const Index top = param<Index>(cfg, "levels", 9);
  std::string got, want;
  bool ok = true;
  const auto h = equidistant_hierarchy(1, top, false);
  SubsampleOptions unit;
  unit.frame = unit_cube(1);
  const auto sub = build_hierarchy(equidistant_grid(top, false), top, unit, false);
  for (Index j = 0; j <= top; ++j) {
    const Index expect = (Index{1} << (j + 1)) - 1;
    ok = ok && equidistant_grid(j, false).size() == expect && h.level_size(j) == expect && sub.level_size(j) == expect;
    got += (j ? "," : "") + std::to_string(sub.level_size(j));
    want += (j ? "," : "") + std::to_string(expect);
  }
  r.checks.push_back({8, "interval level counts (grid, nested grid, subsampled in [0,1])", got, want, ok});

  bool tensor_ok = true;
  std::string tgot;
  for (Index d = 1; d <= 3; ++d) {
    const Index deepest = d == 3 ? 3 : 5;
    const auto t = equidistant_hierarchy(d, deepest, true);
    for (Index j = 0; j <= deepest; ++j) {
      const Index side = (Index{1} << (j + 1)) + 1;
      Index expect = 1;
      for (Index k = 0; k < d; ++k) expect *= side;
      tensor_ok = tensor_ok && t.level_size(j) == expect &&
                  tensor_grid(equidistant_grid(j, true), d).size() == expect;
    }
    tgot += (d > 1 ? "; " : "") + std::string("d=") + std::to_string(d) + ": " + std::to_string(t.level_size(deepest));
  }
  r.checks.push_back({8, "tensor counts (2^{j+1}+1)^d, d=1..3", tgot, "exact", tensor_ok});
  return r;
}

// ---------------------------------------------------------------- criterion 9

// Occupancy oracle: number of cuboids at level j holding a point outside `prev`.
inline Index occupancy_oracle(const PointSet& x, Index j, const std::vector<Index>& prev) {
  std::vector<char> chosen(x.size(), 0);
  for (Index i : prev) chosen[i] = 1;
  std::vector<double> lo(x.dim(), 1e300), hi(x.dim(), -1e300);
  for (Index p = 0; p < x.size(); ++p)
    for (Index o = 0; o < x.dim(); ++o) {
      lo[o] = std::min(lo[o], x[p][o]);
      hi[o] = std::max(hi[o], x[p][o]);
    }
  const double cells = std::ldexp(1.0, static_cast<int>(j));
  std::map<std::vector<long long>, bool> open;
  for (Index p = 0; p < x.size(); ++p) {
    std::vector<long long> key;
    for (Index o = 0; o < x.dim(); ++o) {
      const double a = hi[o] - lo[o];
      long long c = a > 0 ? static_cast<long long>(std::floor(cells * (x[p][o] - lo[o]) / a)) : 0;
      key.push_back(std::min<long long>(c, static_cast<long long>(cells) - 1));
    }
    open[key] = open[key] || !chosen[p];
  }
  Index n = 0;
  for (const auto& [k, v] : open) n += v;
  return n;
}

inline StudyReport fig1_subsample(const nlohmann::json& cfg) {
  StudyReport r{"fig1-subsample", {}, {}, 0.0};
  const Index count = param<Index>(cfg, "points", 1000);
  const Index top = param<Index>(cfg, "levels", 3);
  const auto seed = param<std::uint64_t>(cfg, "seed", 1);
  const auto x = random_cube(count, 2, seed);
  const auto h = build_hierarchy(x, top);
  bool nested = true, counts = true, fill = true;
  std::string sizes, oracle, fills;
  std::vector<Index> prev;
  for (Index j = 0; j <= top; ++j) {
    const auto& lvl = h.level(j);
    nested = nested && std::equal(prev.begin(), prev.end(), lvl.begin()) && lvl.size() >= prev.size();
    const Index expect = prev.size() + occupancy_oracle(x, j, prev);
    counts = counts && lvl.size() == expect;
    const auto bb = bounding_box(x);
    double edge = 0.0;
    for (Index o = 0; o < 2; ++o) edge = std::max(edge, bb.hi[o] - bb.lo[o]);
    const double bound = std::sqrt(2.0) * std::ldexp(1.0, -static_cast<int>(j)) * edge;
    const double hj = h.stats()[j].fill_distance;
    fill = fill && hj <= bound;
    sizes += (j ? "," : "") + std::to_string(lvl.size());
    oracle += (j ? "," : "") + std::to_string(expect);
    fills += (j ? "," : "") + fmt(hj, "%.4f") + "<=" + fmt(bound, "%.4f");
    prev = lvl;
  }
  r.checks.push_back({9, "nesting I_j prefix of I_{j+1}", nested ? "holds" : "violated", "holds", nested});
  r.checks.push_back({9, "level counts vs occupancy oracle", sizes, oracle, counts});
  r.checks.push_back({9, "fill distance <= sqrt(2) 2^-j", fills, "all levels", fill});
  return r;
}

// --------------------------------------------------------------- criterion 10

inline std::string run_bytes(int threads) {
  const std::vector<Index> dims{1, 2};
  const WeightVector w(std::vector<Rational>{Rational(1, 2), Rational(1)});
  std::vector<NestedHierarchy> h{equidistant_hierarchy(1, 8, true), equidistant_hierarchy(2, 4, true)};
  const auto f = named_function("prodexp");
  const auto kernel = sobolev_kernel(dims);
  const auto eval = inset_random_grids(dims, 30, 0.1, 5);
  ConvergenceRecord rec;
  std::string raw;
  for (Index level = 1; level <= 4; ++level) {
    const auto interp = compute(kernel, h, DataSource(f), w, level, {threads, false});
    const auto u = evaluate(interp, eval, {threads});
    raw.append(reinterpret_cast<const char*>(u.data.data()), u.data.size() * sizeof(double));
    const auto pts = evaluate_at_points(interp, random_cube(50, 3, 9), {threads});
    raw.append(reinterpret_cast<const char*>(pts.data()), pts.size() * sizeof(double));
    L2Options o;
    o.threads = threads;
    rec.add(level, interp.sparse_grid_points(), l2_error(interp, f, o));
  }
  std::ostringstream os;
  write_csv(os, rec);
  return os.str() + raw;
}

inline StudyReport hygiene(const nlohmann::json& cfg) {
  StudyReport r{"hygiene", {}, {}, 0.0};
  {
    double worst = 0.0;
    for (double sigma : {0.5, 1.0, 2.0})
      for (int k = 1; k <= 400; ++k) {
        const double rr = 10.0 * sigma * k / 400.0;
        const double z = rr / sigma;
        const double ex[] = {std::exp(-z), std::exp(-z) * (1 + z), std::exp(-z) * (1 + z + z * z / 3)};
        const double betas[] = {0.5, 1.5, 2.5};
        for (int b = 0; b < 3; ++b) {
          const double v = MaternKernel(betas[b], sigma, 1)(rr);
          worst = std::max(worst, std::abs(v - ex[b]) / ex[b]);
        }
      }
    r.checks.push_back({10, "half-integer closed forms, beta in {1/2,3/2,5/2}", "max rel. error " + fmt(worst, "%.2e"), "<= 1e-12", worst <= 1e-12});
  }
  {
    double worst = 0.0;
    const auto rule = gauss_legendre_4();
    const auto comp = composite_gauss_legendre_4(3);
    for (int p = 0; p <= 7; ++p) {
      const double exact = 1.0 / (p + 1);
      auto mono = [p](double t) { return std::pow(t, p); };
      worst = std::max({worst, std::abs(rule.integrate(mono) - exact), std::abs(comp.integrate(mono) - exact)});
    }
    r.checks.push_back({10, "quadrature exact through degree 7", "max error " + fmt(worst, "%.2e"), "<= 1e-14", worst <= 1e-14});
  }
  {
    const std::vector<Index> dims{1, 2};
    std::vector<NestedHierarchy> h{equidistant_hierarchy(1, 4, false), equidistant_hierarchy(2, 4, false)};
    const auto f = named_function("gauss");
    const auto base = sobolev_kernel(dims);
    const ProductKernel scaled({MaternKernel(base.factor(0).beta(), base.factor(0).sigma(), 1, 3.7),
                                MaternKernel(base.factor(1).beta(), base.factor(1).sigma(), 2, 0.29)});
    const auto eval = inset_random_grids(dims, 40, 0.0, 3);
    const auto a = evaluate(compute(base, h, DataSource(f), WeightVector::ones(2), 4), eval);
    const auto b = evaluate(compute(scaled, h, DataSource(f), WeightVector::ones(2), 4), eval);
    double diff = 0.0, scale = 0.0;
    for (Index z = 0; z < a.data.size(); ++z) {
      diff = std::max(diff, std::abs(a.data[z] - b.data[z]));
      scale = std::max(scale, std::abs(a.data[z]));
    }
    const double rel = diff / scale;
    r.checks.push_back({10, "kernel scaling (3.7, 0.29) leaves predictions unchanged", "max rel. change " + fmt(rel, "%.2e"), "<= 1e-12", rel <= 1e-12});
  }
  {
    const std::vector<int> counts = param<std::vector<int>>(cfg, "thread_counts", {1, 2, 3, 4});
    const auto ref = run_bytes(counts.front());
    bool same = true;
    std::string detail;
    for (int t : counts) {
      const bool eq = run_bytes(t) == ref;
      same = same && eq;
      detail += (detail.empty() ? "" : ", ") + std::to_string(t) + (eq ? ":same" : ":DIFF");
    }
    r.checks.push_back({10, "byte-identical outputs across thread counts", detail + " (" + std::to_string(ref.size()) + " bytes)", "identical", same});
  }
  return r;
}

// ------------------------------------------------------------------ timings

inline StudyReport timing_sweep(const nlohmann::json& cfg) {
  StudyReport r{"timing-sweep", {}, {}, 0.0};
  const Index lo = param<Index>(cfg, "from", 3), hi = param<Index>(cfg, "to", 7);
  const int threads = param<int>(cfg, "threads", 0);
  std::vector<NestedHierarchy> h(2, equidistant_hierarchy(1, hi, false));
  const ProductKernel kernel(std::vector<MaternKernel>(2, MaternKernel(17.0 / 16.0, 2.0, 1)));
  const auto f = named_function("const1");
  const auto eval = inset_random_grids({1, 1}, 200, 0.1, 4);
  for (Index level = lo; level <= hi; ++level) {
    auto t0 = std::chrono::steady_clock::now();
    const auto interp = compute(kernel, h, DataSource(f), WeightVector::ones(2), level, {threads, false});
    const double tc = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    evaluate(interp, eval, {threads});
    const double te = seconds_since(t0);
    r.notes.push_back("J=" + std::to_string(level) + " N=" + std::to_string(interp.sparse_grid_points()) +
                      " entries=" + std::to_string(interp.plan().size()) + " factorizations=" +
                      std::to_string(interp.report().factorizations) + " compute=" + fmt(tc, "%.4f") +
                      "s evaluate(200x200)=" + fmt(te, "%.4f") + "s");
  }
  return r;
}

}  // namespace detail

/// Runs a named study; `cfg` overrides the built-in parameters (see bench/*.json).
inline StudyReport run_study(std::string_view name, const nlohmann::json& cfg = nlohmann::json::object()) {
  using Fn = StudyReport (*)(const nlohmann::json&);
  static const std::map<std::string, Fn, std::less<>> table{
      {"tensor-algebra", detail::tensor_algebra},
      {"kronecker-oracle", detail::kronecker_oracle},
      {"combination-coefficients", detail::combination_coefficients},
      {"node-exactness", detail::node_exactness},
      {"fig4-analog", detail::fig4_analog},
      {"fig7-analog", detail::fig7_analog},
      {"table1-analog", detail::table1_analog},
      {"fig1-subsample", detail::fig1_subsample},
      {"hygiene", detail::hygiene},
      {"timing-sweep", detail::timing_sweep},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& s : studies()) known += (known.empty() ? "" : ", ") + s.name;
    throw InputError("bench", "unknown study '" + std::string(name) + "' (known: " + known + ")");
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto report = it->second(cfg);
  report.seconds = detail::seconds_since(t0);
  return report;
}

inline void write_markdown(std::ostream& os, const StudyReport& r) {
  os << "### " << r.name << " (" << (r.passed() ? "pass" : "FAIL") << ", " << detail::fmt(r.seconds, "%.1f")
     << " s)\n\n";
  if (!r.checks.empty()) {
    os << "| criterion | check | measured | expected | result |\n|---|---|---|---|---|\n";
    for (const auto& c : r.checks)
      os << "| " << c.criterion << " | " << c.label << " | " << c.measured << " | " << c.expected << " | "
         << (c.pass ? "PASS" : "FAIL") << (c.soft ? " (soft)" : "") << " |\n";
    os << '\n';
  }
  for (const auto& n : r.notes) os << "- " << n << '\n';
  if (!r.notes.empty()) os << '\n';
}

}  // namespace sgk::bench
