#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sgk/geometry.hpp"

using namespace sgk;

namespace {

// Cuboids of the level-j grid over the bounding box that still hold a point
// outside `prev`.
Index open_cuboids(const PointSet& x, Index j, const std::vector<Index>& prev) {
  const auto bb = bounding_box(x);
  std::set<Index> chosen(prev.begin(), prev.end());
  std::map<std::vector<long>, bool> cells;
  const long n = 1L << j;
  for (Index p = 0; p < x.size(); ++p) {
    std::vector<long> key;
    for (Index o = 0; o < x.dim(); ++o) {
      const double a = bb.hi[o] - bb.lo[o];
      key.push_back(a > 0 ? std::min(n - 1, static_cast<long>(std::floor(n * (x[p][o] - bb.lo[o]) / a))) : 0);
    }
    cells[key] = cells[key] || !chosen.count(p);
  }
  Index c = 0;
  for (const auto& [k, open] : cells) c += open;
  return c;
}

double brute_fill(const PointSet& x, const PointSet& probes) {
  double h = 0;
  for (Index i = 0; i < probes.size(); ++i) {
    double best = INFINITY;
    for (Index k = 0; k < x.size(); ++k) best = std::min(best, distance(probes[i], x[k]));
    h = std::max(h, best);
  }
  return h;
}

double brute_sep(const PointSet& x) {
  double q = INFINITY;
  for (Index i = 0; i < x.size(); ++i)
    for (Index k = i + 1; k < x.size(); ++k) q = std::min(q, distance(x[i], x[k]));
  return q;
}

}  // namespace

TEST(UniformSubsample, SinglePoint) {
  const PointSet x(2, {0.3, 0.7});
  for (Index j = 0; j < 5; ++j) EXPECT_EQ(uniform_subsample({}, x, j), (std::vector<Index>{0}));
}

TEST(UniformSubsample, OnePointPerCell) {
  const PointSet x(2, {0.25, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75, 0.75});
  EXPECT_EQ(uniform_subsample({}, x, 1), (std::vector<Index>{0, 1, 2, 3}));
}

TEST(UniformSubsample, PicksPointClosestToMidpoint) {
  const PointSet x(1, {0.0, 0.45, 0.6, 1.0});
  EXPECT_EQ(uniform_subsample({}, x, 0), (std::vector<Index>{1}));
  // Selected points are kept in front and not re-added.
  const std::vector<Index> prev{1};
  EXPECT_EQ(uniform_subsample(prev, x, 0), (std::vector<Index>{1, 2}));
}

TEST(UniformSubsample, Validation) {
  EXPECT_THROW(uniform_subsample({}, PointSet(2), 0), InputError);
  const std::vector<Index> bad{5};
  EXPECT_THROW(uniform_subsample(bad, PointSet(1, {0.1, 0.2}), 0), InputError);
}

TEST(UniformSubsample, DegenerateAxis) {
  // All points share y = 0.5; the y axis is dropped from the cuboid key.
  const PointSet x(2, {0.1, 0.5, 0.4, 0.5, 0.6, 0.5, 0.9, 0.5});
  EXPECT_EQ(uniform_subsample({}, x, 1).size(), 2u);
  EXPECT_EQ(uniform_subsample({}, x, 2).size(), 4u);
}

TEST(UniformSubsample, SeededTieBreakIsReproducible) {
  // Two points equidistant from the midpoint 0.5.
  const PointSet x(1, {0.0, 0.4, 0.6, 1.0});
  EXPECT_EQ(uniform_subsample({}, x, 0), (std::vector<Index>{1}));
  SubsampleOptions o;
  o.tie_seed = 17;
  const auto a = uniform_subsample({}, x, 0, o);
  EXPECT_EQ(a, uniform_subsample({}, x, 0, o));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_TRUE(a[0] == 1 || a[0] == 2);
}

TEST(BuildHierarchy, SingleLevel) {
  const auto h = build_hierarchy(random_cube(50, 2, 1), 0);
  EXPECT_EQ(h.depth(), 0u);
  EXPECT_EQ(h.level_size(0), 1u);
}

TEST(BuildHierarchy, OccupancyOracleOnRandomSquare) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto x = random_cube(1000, 2, seed);
    const auto h = build_hierarchy(x, 3);
    std::vector<Index> prev;
    for (Index j = 0; j <= 3; ++j) {
      EXPECT_EQ(h.level_size(j), prev.size() + open_cuboids(x, j, prev)) << "seed " << seed << " level " << j;
      EXPECT_TRUE(std::equal(prev.begin(), prev.end(), h.level(j).begin()));
      prev = h.level(j);
    }
  }
}

TEST(BuildHierarchy, EquidistantInputInUnitFrame) {
  SubsampleOptions o;
  o.frame = unit_cube(1);
  for (Index J = 0; J <= 8; ++J) {
    const auto h = build_hierarchy(equidistant_grid(J, false), J, o, false);
    for (Index j = 0; j <= J; ++j) EXPECT_EQ(h.level_size(j), (Index{1} << (j + 1)) - 1);
  }
}

TEST(BuildHierarchy, BoundingBoxFrameMissesTwoPointsAtTop) {
  // The bounding box of the boundary-free grid is shifted by half a spacing,
  // so two of the finest cuboids hold two unselected points each.
  const auto h = build_hierarchy(equidistant_grid(5, false), 5, {}, false);
  EXPECT_EQ(h.level_size(4), 31u);
  EXPECT_EQ(h.level_size(5), 61u);
}

TEST(BuildHierarchy, FrameValidation) {
  SubsampleOptions o;
  o.frame = unit_cube(1);
  EXPECT_THROW(build_hierarchy(PointSet(1, {0.5, 1.5}), 1, o), InputError);
  o.frame = unit_cube(2);
  EXPECT_THROW(build_hierarchy(PointSet(1, {0.5}), 1, o), InputError);
}

TEST(BuildHierarchy, DeterministicAndStats) {
  SubsampleOptions o;
  o.tie_seed = 5;
  const auto x = random_cube(400, 3, 9);
  const auto a = build_hierarchy(x, 3, o), b = build_hierarchy(x, 3, o);
  for (Index j = 0; j <= 3; ++j) EXPECT_EQ(a.level(j), b.level(j));
  ASSERT_EQ(a.stats().size(), 4u);
  EXPECT_TRUE(std::isnan(a.stats()[0].separation_radius));
  for (Index j = 1; j <= 3; ++j) {
    EXPECT_EQ(a.stats()[j].count, a.level_size(j));
    EXPECT_GE(a.stats()[j - 1].fill_distance, a.stats()[j].fill_distance);
    EXPECT_NEAR(a.stats()[j].cqu_estimate, a.stats()[j].fill_distance / a.stats()[j].separation_radius, 1e-12);
  }
}

TEST(BuildHierarchy, FillBoundWhenEveryCellIsOccupied) {
  const auto x = random_cube(3000, 2, 4);
  const auto h = build_hierarchy(x, 4);
  const auto bb = bounding_box(x);
  const double edge = std::max(bb.hi[0] - bb.lo[0], bb.hi[1] - bb.lo[1]);
  for (Index j = 0; j <= 4; ++j) EXPECT_LE(h.stats()[j].fill_distance, std::sqrt(2.0) * std::ldexp(1.0, -int(j)) * edge);
}

TEST(NestedHierarchy, RejectsNonPrefixLevels) {
  const PointSet x(1, {0.1, 0.2, 0.3});
  EXPECT_THROW(NestedHierarchy(x, {{0}, {1, 0}}), InputError);
  EXPECT_THROW(NestedHierarchy(x, {{0, 1}, {0}}), InputError);
  EXPECT_THROW(NestedHierarchy(x, {{3}}), InputError);
  EXPECT_THROW(NestedHierarchy(x, {}), InputError);
}

TEST(FillDistance, Examples) {
  const auto x = random_cube(30, 2, 8);
  EXPECT_EQ(fill_distance(x, x.subset(std::vector<Index>{0, 5, 7})), 0.0);
  const auto line = tensor_grid(equidistant_grid(9, true), 1);
  EXPECT_NEAR(fill_distance(PointSet(1, {0.0, 1.0}), line), 0.5, 1.0 / 1024);
  EXPECT_THROW(fill_distance(x, line), InputError);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = random_cube(40, 3, s), b = random_cube(200, 3, s + 100);
    EXPECT_EQ(fill_distance(a, b), brute_fill(a, b));
  }
}

TEST(SeparationRadius, Examples) {
  EXPECT_NEAR(separation_radius(equidistant_grid(3, false)), 1.0 / 16, 1e-15);
  EXPECT_EQ(separation_radius(PointSet(2, {0.1, 0.2, 0.5, 0.5, 0.1, 0.2})), 0.0);
  EXPECT_THROW(separation_radius(PointSet(2, {0.1, 0.2})), InputError);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = random_cube(150, 2, s);
    EXPECT_EQ(separation_radius(a), brute_sep(a));
  }
}

TEST(Stats, DuplicatePointIsDegenerate) {
  const PointSet x(1, {0.2, 0.2, 0.8});
  NestedHierarchy h(x, {{0, 1, 2}});
  h.compute_stats();
  EXPECT_TRUE(h.stats()[0].degenerate());
}

TEST(EquidistantGrid, Examples) {
  EXPECT_EQ(equidistant_grid(0, false).coords(), (std::vector<double>{0.5}));
  EXPECT_EQ(equidistant_grid(2, false).coords(), (std::vector<double>{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}));
  EXPECT_EQ(equidistant_grid(1, true).coords(), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  for (Index j = 0; j < 10; ++j) {
    EXPECT_EQ(equidistant_grid(j, false).size(), (Index{1} << (j + 1)) - 1);
    EXPECT_EQ(equidistant_grid(j, true).size(), (Index{1} << (j + 1)) + 1);
  }
}

TEST(TensorGrid, Examples) {
  const PointSet g(1, {0.0, 0.5, 1.0});
  EXPECT_EQ(tensor_grid(g, 2).size(), 9u);
  EXPECT_EQ(tensor_grid(g, 1), g);
  const auto c = tensor_grid(PointSet(1, {0.0, 1.0}), 3);
  ASSERT_EQ(c.size(), 8u);
  const Shape s({2, 2, 2});
  for (Index z = 0; z < 8; ++z) {
    const auto k = to_multi_index(z, s);
    for (Index o = 0; o < 3; ++o) EXPECT_EQ(c[z][o], double(k[o]));
  }
  EXPECT_THROW(tensor_grid(PointSet(2, {0, 0}), 2), InputError);
}

TEST(EquidistantHierarchy, NestedTensorLevels) {
  const auto h = equidistant_hierarchy(2, 3, true);
  for (Index j = 0; j <= 3; ++j) {
    const Index side = (Index{1} << (j + 1)) + 1;
    EXPECT_EQ(h.level_size(j), side * side);
    // Level points are exactly the level-j tensor grid, as a set.
    std::set<std::vector<double>> a, b;
    const auto pts = h.level_points(j);
    const auto ref = tensor_grid(equidistant_grid(j, true), 2);
    for (Index i = 0; i < pts.size(); ++i) a.insert({pts[i][0], pts[i][1]});
    for (Index i = 0; i < ref.size(); ++i) b.insert({ref[i][0], ref[i][1]});
    EXPECT_EQ(a, b);
  }
}

TEST(Samplers, SeededAndOnSphere) {
  EXPECT_EQ(random_cube(10, 3, 4), random_cube(10, 3, 4));
  const auto s = random_sphere(100, 2);
  for (Index i = 0; i < s.size(); ++i) EXPECT_NEAR(std::hypot(s[i][0], s[i][1], s[i][2]), 1.0, 1e-14);
}

TEST(PointSet, Validation) {
  EXPECT_THROW(PointSet(0), InputError);
  EXPECT_THROW(PointSet(2, {0.1, 0.2, 0.3}), InputError);
  EXPECT_THROW(PointSet(1, {NAN}), InputError);
}
