// SPDX-License-Identifier: Apache-2.0
#pragma once

// Weighted combination technique: the index set
//
//   J_J^w = { j in N_0^m : J - |w|_1 < j^T w <= J }
//
// and coefficients c_j = sum over j' in {0,1}^m with (j + j')^T w <= J of
// (-1)^{|j'|}.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sgk/errors.hpp"
#include "sgk/tensor.hpp"

namespace sgk {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (d == 0) throw InputError("combitech", "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  /// Parses "p/q", an integer, or a terminating decimal such as "0.25".
  static std::optional<Rational> parse(std::string_view s) {
    auto trim = [](std::string_view v) {
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      return v;
    };
    s = trim(s);
    auto parse_int = [](std::string_view v, std::int64_t& out) {
      if (v.empty()) return false;
      std::int64_t sign = 1;
      if (v.front() == '-' || v.front() == '+') {
        if (v.front() == '-') sign = -1;
        v.remove_prefix(1);
      }
      if (v.empty() || v.size() > 15) return false;
      std::int64_t acc = 0;
      for (char c : v) {
        if (c < '0' || c > '9') return false;
        acc = acc * 10 + (c - '0');
      }
      out = sign * acc;
      return true;
    };
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      std::int64_t p = 0, q = 0;
      if (!parse_int(trim(s.substr(0, slash)), p) || !parse_int(trim(s.substr(slash + 1)), q) ||
          q == 0)
        return std::nullopt;
      return Rational(p, q);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      std::string digits(s.substr(0, dot));
      std::string frac(s.substr(dot + 1));
      if (frac.size() > 9) return std::nullopt;
      std::int64_t whole = 0, part = 0;
      const bool neg = !digits.empty() && digits.front() == '-';
      if (!digits.empty() && digits != "-" && digits != "+" && !parse_int(digits, whole))
        return std::nullopt;
      if (!frac.empty() && !parse_int(frac, part)) return std::nullopt;
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const std::int64_t mag = (whole < 0 ? -whole : whole) * den + part;
      return Rational(neg ? -mag : mag, den);
    }
    std::int64_t p = 0;
    if (!parse_int(s, p)) return std::nullopt;
    return Rational(p, 1);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  if (r.den == 1) return os << r.num;
  return os << r.num << '/' << r.den;
}

/// Positive weights normalized to max w_i = 1. Carries exact rationals when
/// the weights came from rational inputs, so membership tests are exact.
class WeightVector {
 public:
  /// Normalizes by the maximum entry.
  explicit WeightVector(std::vector<double> w) {
    if (w.empty()) throw InputError("combitech", "weight vector must be nonempty");
    double mx = 0.0;
    for (double v : w) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InputError("combitech", "weights must be positive and finite");
      mx = std::max(mx, v);
    }
    for (double& v : w) v /= mx;
    w_ = std::move(w);
  }

  explicit WeightVector(std::vector<Rational> w) {
    if (w.empty()) throw InputError("combitech", "weight vector must be nonempty");
    Rational mx = w.front();
    for (const auto& v : w) {
      if (v.num <= 0) throw InputError("combitech", "weights must be positive");
      if (static_cast<__int128>(v.num) * mx.den > static_cast<__int128>(mx.num) * v.den) mx = v;
    }
    for (auto& v : w) v = Rational(v.num * mx.den, v.den * mx.num);
    exact_ = w;
    for (const auto& v : w) w_.push_back(v.value());
  }

  static WeightVector ones(Index m) { return WeightVector(std::vector<Rational>(m, Rational(1))); }

  Index size() const noexcept { return w_.size(); }
  double operator[](Index i) const { return w_[i]; }
  const std::vector<double>& values() const noexcept { return w_; }
  const std::optional<std::vector<Rational>>& exact() const noexcept { return exact_; }

  double l1() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

 private:
  std::vector<double> w_;
  std::optional<std::vector<Rational>> exact_;
};

namespace detail {

inline constexpr double kWeightEps = 1e-12;

// Sign of j^T w - J: exact with rational weights, otherwise with a relative
// tolerance applied identically to < and <=.
inline int compare_level(std::span<const Index> j, const WeightVector& w, Index level) {
  if (const auto& ex = w.exact()) {
    __int128 lcm = 1;
    for (const auto& r : *ex) lcm = std::lcm(static_cast<std::int64_t>(lcm), r.den);
    __int128 lhs = 0;
    for (Index i = 0; i < j.size(); ++i)
      lhs += static_cast<__int128>(j[i]) * (*ex)[i].num * (lcm / (*ex)[i].den);
    const __int128 rhs = static_cast<__int128>(level) * lcm;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
  double lhs = 0.0;
  for (Index i = 0; i < j.size(); ++i) lhs += static_cast<double>(j[i]) * w[i];
  const double rhs = static_cast<double>(level);
  const double tol = kWeightEps * std::max({std::abs(lhs), rhs, 1.0});
  if (lhs < rhs - tol) return -1;
  if (lhs > rhs + tol) return 1;
  return 0;
}

// Sign of j^T w - (J - |w|_1).
inline int compare_lower(std::span<const Index> j, const WeightVector& w, Index level) {
  if (const auto& ex = w.exact()) {
    __int128 lcm = 1;
    for (const auto& r : *ex) lcm = std::lcm(static_cast<std::int64_t>(lcm), r.den);
    __int128 lhs = 0, l1 = 0;
    for (Index i = 0; i < j.size(); ++i) {
      const __int128 wi = static_cast<__int128>((*ex)[i].num) * (lcm / (*ex)[i].den);
      lhs += static_cast<__int128>(j[i]) * wi;
      l1 += wi;
    }
    const __int128 rhs = static_cast<__int128>(level) * lcm - l1;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
  double lhs = 0.0;
  for (Index i = 0; i < j.size(); ++i) lhs += static_cast<double>(j[i]) * w[i];
  const double rhs = static_cast<double>(level) - w.l1();
  const double tol = kWeightEps * std::max({std::abs(lhs), std::abs(rhs), 1.0});
  if (lhs < rhs - tol) return -1;
  if (lhs > rhs + tol) return 1;
  return 0;
}

// Largest j_i with j_i * w_i <= J (others zero).
inline Index axis_bound(const WeightVector& w, Index i, Index level) {
  Index hi = static_cast<Index>(std::ceil(static_cast<double>(level) / w[i])) + 1;
  MultiIndex j(w.size(), 0);
  while (hi > 0) {
    j[i] = hi;
    if (compare_level(j, w, level) <= 0) break;
    --hi;
  }
  return hi;
}

}  // namespace detail

inline bool in_index_set(std::span<const Index> j, const WeightVector& w, Index level) {
  return detail::compare_level(j, w, level) <= 0 && detail::compare_lower(j, w, level) > 0;
}

/// Enumerates the index set in lexicographic order by scanning the box
/// 0 <= j_i <= J / w_i.
inline std::vector<MultiIndex> index_set(Index m, Index level, const WeightVector& w) {
  if (w.size() != m)
    throw InputError("combitech", "weight vector has " + std::to_string(w.size()) +
                                      " entries for " + std::to_string(m) + " directions");
  std::vector<Index> ext(m);
  for (Index i = 0; i < m; ++i) ext[i] = detail::axis_bound(w, i, level) + 1;
  const Shape box(ext);
  std::vector<MultiIndex> out;
  for (Index z = 0; z < box.total(); ++z) {
    auto j = to_multi_index(z, box);
    if (in_index_set(j, w, level)) out.push_back(std::move(j));
  }
  return out;
}

inline std::int64_t coefficient(std::span<const Index> j, const WeightVector& w, Index level) {
  const Index m = j.size();
  if (w.size() != m) throw InputError("combitech", "weight/multi-index size mismatch");
  if (m >= 63) throw InputError("combitech", "too many directions");
  std::int64_t c = 0;
  MultiIndex corner(j.begin(), j.end());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    int bits = 0;
    for (Index i = 0; i < m; ++i) {
      const bool on = (mask >> i) & 1u;
      corner[i] = j[i] + (on ? 1 : 0);
      bits += on;
    }
    if (detail::compare_level(corner, w, level) <= 0) c += (bits % 2 == 0) ? 1 : -1;
  }
  return c;
}

struct PlanEntry {
  MultiIndex level;
  std::int64_t coefficient;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

class CombinationPlan {
 public:
  CombinationPlan(Index m, Index level, WeightVector w, std::vector<PlanEntry> entries)
      : m_(m), level_(level), w_(std::move(w)), entries_(std::move(entries)) {}

  Index directions() const noexcept { return m_; }
  Index level() const noexcept { return level_; }
  const WeightVector& weights() const noexcept { return w_; }
  const std::vector<PlanEntry>& entries() const noexcept { return entries_; }
  Index size() const noexcept { return entries_.size(); }

  /// Largest level used in direction i.
  Index max_level(Index i) const {
    Index mx = 0;
    for (const auto& e : entries_) mx = std::max(mx, e.level.at(i));
    return mx;
  }

  /// Distinct levels of direction i, ascending.
  std::vector<Index> levels_in_direction(Index i) const {
    std::vector<Index> lv;
    for (const auto& e : entries_) lv.push_back(e.level.at(i));
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    return lv;
  }

  std::int64_t coefficient_sum() const {
    std::int64_t s = 0;
    for (const auto& e : entries_) s += e.coefficient;
    return s;
  }

 private:
  Index m_;
  Index level_;
  WeightVector w_;
  std::vector<PlanEntry> entries_;
};

inline CombinationPlan make_plan(Index m, Index level, const WeightVector& w) {
  std::vector<PlanEntry> entries;
  for (auto& j : index_set(m, level, w)) {
    const auto c = coefficient(j, w, level);
    if (c != 0) entries.push_back({std::move(j), c});
  }
  return CombinationPlan(m, level, w, std::move(entries));
}

/// Writes one line per entry: `j1 ... jm : c`.
inline void write_plan(std::ostream& os, const CombinationPlan& plan) {
  for (const auto& e : plan.entries()) {
    for (Index i = 0; i < e.level.size(); ++i) os << (i ? " " : "") << e.level[i];
    os << " : " << e.coefficient << '\n';
  }
}

enum class WeightStrategy { accuracy, dof, cost_benefit };

inline WeightStrategy parse_strategy(std::string_view s) {
  if (s == "accuracy") return WeightStrategy::accuracy;
  if (s == "dof") return WeightStrategy::dof;
  if (s == "cost-benefit" || s == "cost_benefit") return WeightStrategy::cost_benefit;
  throw InputError("combitech", "unknown weight strategy '" + std::string(s) +
                                    "' (expected accuracy, dof, cost-benefit)");
}

inline std::string to_string(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::accuracy: return "accuracy";
    case WeightStrategy::dof: return "dof";
    case WeightStrategy::cost_benefit: return "cost-benefit";
  }
  return "?";
}

/// Smoothness gains t'_i - t_i, kept exact when possible.
struct Gain {
  double value;
  std::optional<Rational> exact;

  Gain(double v) : value(v) {}
  Gain(Rational r) : value(r.value()), exact(r) {}
};

inline WeightVector weight_strategy(WeightStrategy kind, std::span<const Index> dims,
                                    std::span<const Gain> gains) {
  if (dims.empty() || dims.size() != gains.size())
    throw InputError("combitech", "dims and gains must be nonempty and of equal length");
  for (Index i = 0; i < dims.size(); ++i) {
    if (dims[i] == 0) throw InputError("combitech", "dimensions must be positive");
    if (!(gains[i].value > 0.0) || !std::isfinite(gains[i].value))
      throw InputError("combitech", "smoothness gains must be positive");
  }
  const bool exact = std::all_of(gains.begin(), gains.end(), [](const Gain& g) { return g.exact.has_value(); });
  if (exact) {
    std::vector<Rational> w;
    for (Index i = 0; i < dims.size(); ++i) {
      const Rational d(static_cast<std::int64_t>(dims[i]));
      const Rational g = *gains[i].exact;
      switch (kind) {
        case WeightStrategy::accuracy: w.push_back(g); break;
        case WeightStrategy::dof: w.push_back(d); break;
        case WeightStrategy::cost_benefit:
          w.push_back(Rational(d.num * g.den + g.num, g.den));
          break;
      }
    }
    return WeightVector(std::move(w));
  }
  std::vector<double> w;
  for (Index i = 0; i < dims.size(); ++i) {
    const double d = static_cast<double>(dims[i]);
    switch (kind) {
      case WeightStrategy::accuracy: w.push_back(gains[i].value); break;
      case WeightStrategy::dof: w.push_back(d); break;
      case WeightStrategy::cost_benefit: w.push_back(d + gains[i].value); break;
    }
  }
  return WeightVector(std::move(w));
}

struct RateModel {
  std::vector<Index> dims;
  std::vector<double> gains;
  std::vector<double> w;
  double beta = 0.0;
  /// Multiplicity of the minimum of gains_i / w_i.
  Index P = 0;
  /// Multiplicity of the maximum of d_i / w_i.
  Index R = 0;
  double beta_star = 0.0;
  bool in_optimal_band = false;
  /// Exponent of the log factor, (P - 1) + beta (R - 1).
  double log_exponent = 0.0;
};

inline RateModel predicted_rate(std::span<const Index> dims, std::span<const Gain> gains,
                                const WeightVector& w) {
  const Index m = dims.size();
  if (m == 0 || gains.size() != m || w.size() != m)
    throw InputError("combitech", "dims, gains and weights must have equal length");
  constexpr double tol = 1e-12;
  auto close = [](double a, double b) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
  };
  RateModel r;
  r.dims.assign(dims.begin(), dims.end());
  for (const auto& g : gains) r.gains.push_back(g.value);
  r.w = w.values();

  double mn = std::numeric_limits<double>::infinity();
  double mx = 0.0;
  double star = std::numeric_limits<double>::infinity();
  Index ell = 0;
  for (Index i = 0; i < m; ++i) {
    mn = std::min(mn, r.gains[i] / w[i]);
    mx = std::max(mx, static_cast<double>(dims[i]) / w[i]);
    const double ratio = r.gains[i] / static_cast<double>(dims[i]);
    if (ratio < star) {
      star = ratio;
      ell = i;
    }
  }
  for (Index i = 0; i < m; ++i) {
    if (close(r.gains[i] / w[i], mn)) ++r.P;
    if (close(static_cast<double>(dims[i]) / w[i], mx)) ++r.R;
  }
  r.beta = mn / mx;
  r.beta_star = star;
  r.log_exponent = static_cast<double>(r.P - 1) + r.beta * static_cast<double>(r.R - 1);

  r.in_optimal_band = true;
  for (Index i = 0; i < m; ++i) {
    const double lower = r.gains[ell] / r.gains[i];
    const double ratio = w[ell] / w[i];
    const double upper = static_cast<double>(dims[ell]) / static_cast<double>(dims[i]);
    if (ratio < lower - tol * lower || ratio > upper + tol * upper) r.in_optimal_band = false;
  }
  return r;
}

/// Total number of distinct sparse-grid points for nested per-direction
/// levels: the sum over the downward-closed set {j^T w <= J} of products of
/// per-level increments. `level_sizes[i][l]` is |X_l^{(i)}|.
inline Index sparse_grid_size(const std::vector<std::vector<Index>>& level_sizes,
                              const WeightVector& w, Index level) {
  const Index m = level_sizes.size();
  if (w.size() != m) throw InputError("combitech", "weight/direction count mismatch");
  std::vector<Index> ext(m);
  for (Index i = 0; i < m; ++i) ext[i] = detail::axis_bound(w, i, level) + 1;
  const Shape box(ext);
  Index total = 0;
  for (Index z = 0; z < box.total(); ++z) {
    const auto j = to_multi_index(z, box);
    if (detail::compare_level(j, w, level) > 0) continue;
    Index prod = 1;
    for (Index i = 0; i < m; ++i) {
      if (j[i] >= level_sizes[i].size())
        throw InputError("combitech", "direction " + std::to_string(i) + " needs level " +
                                          std::to_string(j[i]) + " but only " +
                                          std::to_string(level_sizes[i].size()) +
                                          " are available");
      const Index cur = level_sizes[i][j[i]];
      const Index prev = j[i] == 0 ? 0 : level_sizes[i][j[i] - 1];
      prod *= cur - prev;
    }
    total += prod;
  }
  return total;
}

}  // namespace sgk
