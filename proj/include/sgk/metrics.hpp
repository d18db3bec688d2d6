// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"
#include "sgk/interpolant.hpp"

namespace sgk {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (Index i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// Four-point Gauss-Legendre rule on [0,1]; exact through degree 7.
inline QuadratureRule gauss_legendre_4() {
  const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
  const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
  QuadratureRule r;
  r.nodes = {0.5 * (1.0 - b), 0.5 * (1.0 - a), 0.5 * (1.0 + a), 0.5 * (1.0 + b)};
  r.weights = {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
  return r;
}

/// Composite rule: `panels` copies of the 4-point rule on [lo, hi].
inline QuadratureRule composite_gauss_legendre_4(Index panels, double lo = 0.0, double hi = 1.0) {
  if (panels == 0) throw InputError("metrics", "panel count must be at least 1");
  if (!(hi > lo)) throw InputError("metrics", "empty quadrature interval");
  const auto base = gauss_legendre_4();
  QuadratureRule r;
  const double h = (hi - lo) / static_cast<double>(panels);
  for (Index p = 0; p < panels; ++p)
    for (Index k = 0; k < base.nodes.size(); ++k) {
      r.nodes.push_back(lo + h * (static_cast<double>(p) + base.nodes[k]));
      r.weights.push_back(h * base.weights[k]);
    }
  return r;
}

struct L2Options {
  /// Panels per coordinate axis of the composite rule; 0 picks 4 for up to
  /// three directions and 1 above.
  Index panels_per_dim = 0;
  /// Integrate over [inset, 1 - inset]^d in every direction instead of the unit cube.
  double inset = 0.0;
  /// Maximal number of tensor quadrature points.
  Index budget = Index{1} << 26;
  int threads = 0;
};

/// L2 norm of f - interpolant over a product of unit cubes, by tensorized
/// composite Gauss-Legendre quadrature evaluated through `evaluate`.
inline double l2_error(const SparseGridInterpolant& interp, const TestFunction& f,
                       const L2Options& opts = {}) {
  if (!(opts.inset >= 0.0 && opts.inset < 0.5))
    throw InputError("metrics", "inset must lie in [0, 0.5)");
  const Index m = interp.kernel().factors();
  const Index panels = opts.panels_per_dim ? opts.panels_per_dim : (m <= 3 ? 4 : 1);
  const auto rule = composite_gauss_legendre_4(panels, opts.inset, 1.0 - opts.inset);
  const Index q = rule.nodes.size();

  std::vector<PointSet> grids;
  std::vector<std::vector<double>> weights;
  double total = 1.0;
  for (Index i = 0; i < m; ++i) {
    const Index d = interp.kernel().factor(i).dim();
    total *= std::pow(static_cast<double>(q), static_cast<double>(d));
    PointSet line(1, rule.nodes);
    grids.push_back(tensor_grid(line, d));
    const Shape s(std::vector<Index>(d, q));
    std::vector<double> w(s.total());
    for (Index z = 0; z < s.total(); ++z) {
      const auto k = to_multi_index(z, s);
      double v = 1.0;
      for (Index o = 0; o < d; ++o) v *= rule.weights[k[o]];
      w[z] = v;
    }
    weights.push_back(std::move(w));
  }
  if (total > static_cast<double>(opts.budget))
    throw BudgetError("metrics", "quadrature needs " + std::to_string(static_cast<long double>(total)) +
                                     " points, budget is " + std::to_string(opts.budget) +
                                     "; reduce panels or use the RMS error");

  const auto u = evaluate(interp, grids, EvaluateOptions{opts.threads});
  Index total_dim = interp.kernel().total_dim();
  std::vector<double> point(total_dim);
  double sum = 0.0;
  MultiIndex k(m, 0);
  for (Index z = 0; z < u.data.size(); ++z) {
    double w = 1.0;
    Index offset = 0;
    for (Index i = 0; i < m; ++i) {
      w *= weights[i][k[i]];
      auto p = grids[i][k[i]];
      std::copy(p.begin(), p.end(), point.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += p.size();
    }
    const double e = f(point) - u.data[z];
    sum += w * e * e;
    for (Index i = m; i-- > 0;) {
      if (++k[i] < u.shape[i]) break;
      k[i] = 0;
    }
  }
  return std::sqrt(sum);
}

inline double rms_error(std::span<const double> predicted, std::span<const double> reference) {
  if (predicted.empty()) throw InputError("metrics", "RMS error of an empty sample");
  if (predicted.size() != reference.size())
    throw InputError("metrics", "prediction/reference length mismatch: " +
                                    std::to_string(predicted.size()) + " vs " +
                                    std::to_string(reference.size()));
  double s = 0.0;
  for (Index i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - reference[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

struct ConvergenceRow {
  Index level = 0;
  Index points = 0;
  double error = 0.0;
  std::optional<double> order;
};

struct ConvergenceRecord {
  std::vector<ConvergenceRow> rows;

  /// Appends a row and fills its per-step order against the previous row.
  void add(Index level, Index points, double error) {
    ConvergenceRow r{level, points, error, std::nullopt};
    if (!rows.empty()) {
      const auto& p = rows.back();
      if (p.error > 0.0 && error > 0.0 && points > p.points)
        r.order = std::log(p.error / error) /
                  std::log(static_cast<double>(points) / static_cast<double>(p.points));
    }
    rows.push_back(r);
  }
};

inline void write_csv(std::ostream& os, const ConvergenceRecord& rec) {
  os << "J,N,error,order\n";
  char buf[64];
  for (const auto& r : rec.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.error);
    os << r.level << ',' << r.points << ',' << buf << ',';
    if (r.order) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.order);
      os << buf;
    }
    os << '\n';
  }
}

struct OrderFit {
  /// Negated least-squares slope of log(error) against log(N).
  double slope = 0.0;
  /// log(e_k / e_{k+1}) / log(N_{k+1} / N_k) for consecutive rows of the tail.
  std::vector<double> steps;
};

inline OrderFit fit_order(const ConvergenceRecord& rec, Index tail) {
  if (tail < 2 || tail > rec.rows.size())
    throw InputError("metrics", "fit needs between 2 and " + std::to_string(rec.rows.size()) +
                                    " rows, got " + std::to_string(tail));
  const Index first = rec.rows.size() - tail;
  std::vector<double> x, y;
  for (Index i = first; i < rec.rows.size(); ++i) {
    const auto& r = rec.rows[i];
    if (!(r.error > 0.0) || !std::isfinite(r.error))
      throw InputError("metrics", "errors must be positive for an order fit (J=" +
                                      std::to_string(r.level) + ")");
    if (r.points == 0) throw InputError("metrics", "point counts must be positive");
    x.push_back(std::log(static_cast<double>(r.points)));
    y.push_back(std::log(r.error));
  }
  double mx = 0.0, my = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InputError("metrics", "point counts must differ for an order fit");
  OrderFit fit;
  fit.slope = -sxy / sxx;
  for (Index i = 0; i + 1 < x.size(); ++i) fit.steps.push_back(-(y[i + 1] - y[i]) / (x[i + 1] - x[i]));
  return fit;
}

}  // namespace sgk
