// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgk/errors.hpp"
#include "sgk/tensor.hpp"

namespace sgk {

/// Ordered list of points in R^dim, stored row-major. Indices are identities.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(Index dim) : dim_(dim) {
    if (dim == 0) throw InputError("geometry", "point dimension must be at least 1");
  }
  PointSet(Index dim, std::vector<double> coords)
      : dim_(dim), coords_(std::move(coords)) {
    if (dim == 0) throw InputError("geometry", "point dimension must be at least 1");
    if (coords_.size() % dim != 0)
      throw InputError("geometry", "coordinate count " + std::to_string(coords_.size()) +
                                       " is not a multiple of dimension " +
                                       std::to_string(dim));
    for (double c : coords_)
      if (!std::isfinite(c)) throw InputError("geometry", "non-finite coordinate");
  }

  Index dim() const noexcept { return dim_; }
  Index size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](Index i) const {
    return {coords_.data() + i * dim_, dim_};
  }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_)
      throw InputError("geometry", "point of dimension " + std::to_string(p.size()) +
                                       " added to set of dimension " +
                                       std::to_string(dim_));
    for (double c : p)
      if (!std::isfinite(c)) throw InputError("geometry", "non-finite coordinate");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }

  PointSet subset(std::span<const Index> idx) const {
    PointSet out(dim_);
    out.coords_.reserve(idx.size() * dim_);
    for (Index i : idx) {
      if (i >= size())
        throw InputError("geometry", "index " + std::to_string(i) + " out of range");
      auto p = (*this)[i];
      out.coords_.insert(out.coords_.end(), p.begin(), p.end());
    }
    return out;
  }

  const std::vector<double>& coords() const noexcept { return coords_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  Index dim_ = 0;
  std::vector<double> coords_;
};

inline double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct BoundingBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

inline BoundingBox unit_cube(Index dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

inline BoundingBox bounding_box(const PointSet& x) {
  if (x.empty()) throw InputError("geometry", "bounding box of an empty point set");
  BoundingBox b{std::vector<double>(x[0].begin(), x[0].end()),
                std::vector<double>(x[0].begin(), x[0].end())};
  for (Index i = 1; i < x.size(); ++i)
    for (Index o = 0; o < x.dim(); ++o) {
      b.lo[o] = std::min(b.lo[o], x[i][o]);
      b.hi[o] = std::max(b.hi[o], x[i][o]);
    }
  return b;
}

struct SubsampleOptions {
  /// Ties on the midpoint distance keep the first-seen index unless seeded.
  std::optional<std::uint64_t> tie_seed;
  /// Box split into cuboids; the bounding box of X when unset. A fixed frame
  /// such as the unit cube aligns the cuboids with dyadic grids.
  std::optional<BoundingBox> frame;
};

/// One refinement step of the top-down coarsening: splits the bounding box of
/// X into 2^{level*d} cuboids and, for every cuboid that still holds a point
/// outside `selected`, adds the one closest to the cuboid midpoint.
/// Returns `selected` followed by the new indices in ascending order.
inline std::vector<Index> uniform_subsample(std::span<const Index> selected,
                                            const PointSet& x, Index level,
                                            const SubsampleOptions& opts = {}) {
  if (x.empty()) throw InputError("geometry", "cannot subsample an empty point set");
  const Index n = x.size();
  const Index d = x.dim();
  if (level * d > 63)
    throw InputError("geometry", "subsample level " + std::to_string(level) +
                                     " too deep for dimension " + std::to_string(d));
  std::vector<char> taken(n, 0);
  for (Index i : selected) {
    if (i >= n)
      throw InputError("geometry", "selected index " + std::to_string(i) +
                                       " out of range for " + std::to_string(n) +
                                       " points");
    taken[i] = 1;
  }

  const auto box = opts.frame ? *opts.frame : bounding_box(x);
  if (box.lo.size() != d || box.hi.size() != d)
    throw InputError("geometry", "subsample frame has the wrong dimension");
  if (opts.frame)
    for (Index p = 0; p < n; ++p)
      for (Index o = 0; o < d; ++o)
        if (x[p][o] < box.lo[o] || x[p][o] > box.hi[o])
          throw InputError("geometry", "point " + std::to_string(p) + " lies outside the subsample frame");
  std::vector<double> extent(d);
  for (Index o = 0; o < d; ++o) extent[o] = box.hi[o] - box.lo[o];
  const double cells = std::ldexp(1.0, static_cast<int>(level));
  const auto max_cell = static_cast<std::uint64_t>(cells) - 1;

  struct Champion {
    Index index;
    double dist;
    std::uint64_t ties;
  };
  std::unordered_map<std::uint64_t, Champion> champions;
  std::mt19937_64 rng(opts.tie_seed.value_or(0));

  std::vector<std::uint64_t> cell(d);
  std::vector<double> mid(d);
  for (Index p = 0; p < n; ++p) {
    if (taken[p]) continue;
    auto xp = x[p];
    // Degenerate axes (zero extent) are dropped from the key.
    std::uint64_t key = 0;
    for (Index o = 0; o < d; ++o) {
      if (extent[o] > 0.0) {
        const double c = cells * (xp[o] - box.lo[o]) / extent[o];
        cell[o] = std::min(static_cast<std::uint64_t>(std::max(0.0, std::floor(c))),
                           max_cell);
        mid[o] = box.lo[o] + (static_cast<double>(cell[o]) + 0.5) / cells * extent[o];
      } else {
        cell[o] = 0;
        mid[o] = box.lo[o];
      }
      key = key * (max_cell + 1) + cell[o];
    }
    const double dist = distance(xp, mid);
    auto [it, inserted] = champions.try_emplace(key, Champion{p, dist, 1});
    if (inserted) continue;
    Champion& c = it->second;
    if (dist < c.dist) {
      c = Champion{p, dist, 1};
    } else if (dist == c.dist && opts.tie_seed) {
      ++c.ties;
      if (rng() % c.ties == 0) c.index = p;
    }
  }

  std::vector<Index> added;
  added.reserve(champions.size());
  for (const auto& [key, c] : champions) added.push_back(c.index);
  std::sort(added.begin(), added.end());

  std::vector<Index> out(selected.begin(), selected.end());
  out.insert(out.end(), added.begin(), added.end());
  return out;
}

inline double fill_distance(const PointSet& x, const PointSet& probes) {
  if (x.empty() || probes.empty())
    throw InputError("geometry", "fill distance needs nonempty point sets");
  if (x.dim() != probes.dim())
    throw InputError("geometry", "fill distance dimension mismatch: " +
                                     std::to_string(x.dim()) + " vs " +
                                     std::to_string(probes.dim()));
  const auto np = static_cast<std::int64_t>(probes.size());
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::int64_t i = 0; i < np; ++i) {
    auto p = probes[static_cast<Index>(i)];
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < x.size(); ++j) best = std::min(best, distance(p, x[j]));
    worst = std::max(worst, best);
  }
  return worst;
}

/// Minimum pairwise distance (no factor 1/2).
inline double separation_radius(const PointSet& x) {
  if (x.size() < 2)
    throw InputError("geometry", "separation radius needs at least two points, got " +
                                     std::to_string(x.size()));
  const auto n = static_cast<std::int64_t>(x.size());
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : best) schedule(dynamic, 32)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j)
      best = std::min(best, distance(x[static_cast<Index>(i)], x[static_cast<Index>(j)]));
  return best;
}

struct PointSetStats {
  Index count = 0;
  double fill_distance = 0.0;
  /// NaN when the level has fewer than two points.
  double separation_radius = std::numeric_limits<double>::quiet_NaN();
  double cqu_estimate = std::numeric_limits<double>::quiet_NaN();

  bool degenerate() const noexcept { return separation_radius == 0.0; }
};

/// Nested levels I_0 ⊆ I_1 ⊆ ... into a base point set. Each level is a
/// prefix of the next, so the point order of level j is stable under
/// refinement.
class NestedHierarchy {
 public:
  NestedHierarchy(PointSet base, std::vector<std::vector<Index>> levels)
      : base_(std::move(base)), levels_(std::move(levels)) {
    if (levels_.empty()) throw InputError("geometry", "hierarchy needs at least one level");
    for (Index j = 0; j < levels_.size(); ++j) {
      for (Index i : levels_[j])
        if (i >= base_.size())
          throw InputError("geometry", "level " + std::to_string(j) +
                                           " references index " + std::to_string(i) +
                                           " outside the base set");
      if (j > 0) {
        const auto& prev = levels_[j - 1];
        if (prev.size() > levels_[j].size() ||
            !std::equal(prev.begin(), prev.end(), levels_[j].begin()))
          throw InputError("geometry", "level " + std::to_string(j - 1) +
                                           " is not a prefix of level " +
                                           std::to_string(j));
      }
    }
  }

  const PointSet& base() const noexcept { return base_; }
  Index depth() const noexcept { return levels_.size() - 1; }
  Index dim() const noexcept { return base_.dim(); }
  const std::vector<Index>& level(Index j) const { return levels_.at(j); }
  Index level_size(Index j) const { return levels_.at(j).size(); }
  PointSet level_points(Index j) const { return base_.subset(levels_.at(j)); }

  const std::vector<PointSetStats>& stats() const noexcept { return stats_; }

  /// Fills per-level statistics, probing the fill distance with the base set.
  void compute_stats() {
    stats_.clear();
    for (Index j = 0; j <= depth(); ++j) {
      PointSetStats s;
      const auto pts = level_points(j);
      s.count = pts.size();
      s.fill_distance = fill_distance(pts, base_);
      if (pts.size() >= 2) {
        s.separation_radius = separation_radius(pts);
        s.cqu_estimate = s.fill_distance / s.separation_radius;
      }
      stats_.push_back(s);
    }
  }

 private:
  PointSet base_;
  std::vector<std::vector<Index>> levels_;
  std::vector<PointSetStats> stats_;
};

inline NestedHierarchy build_hierarchy(const PointSet& x, Index max_level,
                                       const SubsampleOptions& opts = {},
                                       bool with_stats = true) {
  if (x.empty()) throw InputError("geometry", "cannot build a hierarchy on an empty set");
  std::vector<std::vector<Index>> levels;
  std::vector<Index> current;
  for (Index j = 0; j <= max_level; ++j) {
    current = uniform_subsample(current, x, j, opts);
    levels.push_back(current);
  }
  NestedHierarchy h(x, std::move(levels));
  if (with_stats) h.compute_stats();
  return h;
}

/// Equidistant points on [0,1]: k / 2^{j+1} for k = 1..2^{j+1}-1, or
/// k = 0..2^{j+1} with the boundary.
inline PointSet equidistant_grid(Index level, bool include_boundary) {
  if (level > 40) throw InputError("geometry", "equidistant level too deep");
  const Index cells = Index{1} << (level + 1);
  PointSet g(1);
  const Index first = include_boundary ? 0 : 1;
  const Index last = include_boundary ? cells : cells - 1;
  for (Index k = first; k <= last; ++k) {
    const double v = std::ldexp(static_cast<double>(k), -static_cast<int>(level + 1));
    g.push_back(std::span<const double>(&v, 1));
  }
  return g;
}

/// Cartesian power g^d, ordered like the strides of shape [|g|, ..., |g|].
inline PointSet tensor_grid(const PointSet& g, Index d) {
  if (d == 0) throw InputError("geometry", "tensor grid dimension must be at least 1");
  if (g.dim() != 1) throw InputError("geometry", "tensor grid factor must be one-dimensional");
  const Shape shape(std::vector<Index>(d, g.size()));
  PointSet out(d);
  std::vector<double> p(d);
  for (Index z = 0; z < shape.total(); ++z) {
    const auto k = to_multi_index(z, shape);
    for (Index o = 0; o < d; ++o) p[o] = g[k[o]][0];
    out.push_back(p);
  }
  return out;
}

/// Hierarchy whose levels are tensor powers of nested equidistant grids.
/// The base set is the finest level; each level lists its points as the
/// previous level followed by the new points in base order.
inline NestedHierarchy equidistant_hierarchy(Index dim, Index max_level,
                                             bool include_boundary) {
  const auto base = tensor_grid(equidistant_grid(max_level, include_boundary), dim);
  const Index fine = (Index{1} << (max_level + 1));
  const Index offset = include_boundary ? 0 : 1;
  const Index per_axis = include_boundary ? fine + 1 : fine - 1;
  std::vector<std::vector<Index>> levels;
  std::vector<Index> current;
  std::vector<char> taken(base.size(), 0);
  for (Index j = 0; j <= max_level; ++j) {
    const Index step = Index{1} << (max_level - j);
    std::vector<Index> added;
    for (Index z = 0; z < base.size(); ++z) {
      if (taken[z]) continue;
      Index rem = z;
      bool on_level = true;
      for (Index o = dim; o-- > 0;) {
        const Index k = rem % per_axis + offset;
        rem /= per_axis;
        if (k % step != 0) on_level = false;
      }
      if (on_level) {
        added.push_back(z);
        taken[z] = 1;
      }
    }
    current.insert(current.end(), added.begin(), added.end());
    levels.push_back(current);
  }
  return NestedHierarchy(base, std::move(levels));
}

inline PointSet random_cube(Index count, Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet out(dim);
  std::vector<double> p(dim);
  for (Index i = 0; i < count; ++i) {
    for (auto& c : p) c = u(rng);
    out.push_back(p);
  }
  return out;
}

/// Uniform points on the unit sphere in R^3 via normalized Gaussian triples.
inline PointSet random_sphere(Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PointSet out(3);
  std::array<double, 3> p{};
  for (Index i = 0; i < count;) {
    for (auto& c : p) c = g(rng);
    const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (r < 1e-12) continue;
    for (auto& c : p) c /= r;
    out.push_back(p);
    ++i;
  }
  return out;
}

}  // namespace sgk
