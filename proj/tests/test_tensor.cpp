#include <gtest/gtest.h>

#include <random>

#include "sgk/tensor.hpp"

using namespace sgk;

TEST(Strides, Examples) {
  EXPECT_EQ(strides(Shape({2, 3, 4})), (std::vector<Index>{12, 4, 1}));
  EXPECT_EQ(strides(Shape({5})), (std::vector<Index>{1}));
  EXPECT_EQ(strides(Shape({3, 3})), (std::vector<Index>{3, 1}));
}

TEST(ScalarIndex, Examples) {
  const Shape n({2, 3, 4});
  EXPECT_EQ(to_scalar_index(MultiIndex{0, 0, 0}, n), 0u);
  EXPECT_EQ(to_scalar_index(MultiIndex{1, 2, 3}, n), 23u);
  EXPECT_EQ(to_scalar_index(MultiIndex{1, 2, 3}, n), n.total() - 1);
  EXPECT_THROW(to_scalar_index(MultiIndex{2, 0, 0}, n), InputError);
  EXPECT_THROW(to_scalar_index(MultiIndex{0, 0}, n), InputError);
}

TEST(MultiIndexFromScalar, Examples) {
  const Shape n({2, 3, 4});
  EXPECT_EQ(to_multi_index(0, n), (MultiIndex{0, 0, 0}));
  EXPECT_EQ(to_multi_index(5, n), (MultiIndex{0, 1, 1}));
  EXPECT_EQ(to_multi_index(23, n), (MultiIndex{1, 2, 3}));
  EXPECT_THROW(to_multi_index(24, n), InputError);
}

TEST(MatricizeIndex, Examples) {
  const Shape n({2, 3, 4});
  EXPECT_EQ(matricize_index(0, 0, 0, n), 0u);
  // Mode 1 (second mode), row 2, column 5 lands on [1,2,1].
  EXPECT_EQ(matricize_index(1, 2, 5, n), 21u);
  EXPECT_EQ(to_multi_index(21, n), (MultiIndex{1, 2, 1}));
  EXPECT_THROW(matricize_index(3, 0, 0, n), InputError);
  EXPECT_THROW(matricize_index(1, 3, 0, n), InputError);
  EXPECT_THROW(matricize_index(1, 0, 8, n), InputError);
}

// Enumeration oracle: the column index of z in mode k is the rank of z's
// multi-index with component k removed, in lexicographic order.
TEST(MatricizeIndex, MatchesEnumerationOracle) {
  const Shape n({2, 3, 4});
  for (Index k = 0; k < 3; ++k) {
    std::vector<Index> rest;
    for (Index i = 0; i < 3; ++i)
      if (i != k) rest.push_back(n[i]);
    const Shape reduced(rest);
    for (Index z = 0; z < n.total(); ++z) {
      auto mi = to_multi_index(z, n);
      const Index o = mi[k];
      mi.erase(mi.begin() + static_cast<std::ptrdiff_t>(k));
      EXPECT_EQ(matricize_index(k, o, to_scalar_index(mi, reduced), n), z);
    }
  }
}

TEST(MatricizeIndex, UnitModesAndContiguity) {
  for (const auto& ext : std::vector<std::vector<Index>>{{1, 5, 1}, {1}, {1, 1, 1, 1}, {4, 1, 3}}) {
    const Shape n(ext);
    for (Index k = 0; k < n.modes(); ++k) {
      std::vector<char> seen(n.total(), 0);
      const Index cols = n.total() / n[k];
      for (Index o = 0; o < n[k]; ++o)
        for (Index p = 0; p < cols; ++p) {
          const Index z = matricize_index(k, o, p, n);
          ASSERT_LT(z, n.total());
          EXPECT_FALSE(seen[z]);
          seen[z] = 1;
          if (k == 0) EXPECT_EQ(z, o * cols + p);
        }
    }
  }
}

TEST(Matricize, TwoByTwo) {
  const LinearTensor t(Shape({2, 2}), std::vector<double>{1, 2, 3, 4});
  const auto m0 = matricize(t, 0);
  const auto m1 = matricize(t, 1);
  EXPECT_EQ(m0(0, 0), 1);
  EXPECT_EQ(m0(0, 1), 2);
  EXPECT_EQ(m0(1, 0), 3);
  EXPECT_EQ(m0(1, 1), 4);
  EXPECT_EQ(m1(0, 0), 1);
  EXPECT_EQ(m1(0, 1), 3);
  EXPECT_EQ(m1(1, 0), 2);
  EXPECT_EQ(m1(1, 1), 4);
}

TEST(Matricize, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& ext : std::vector<std::vector<Index>>{{2, 2}, {2, 3, 4}, {1, 5, 1}, {3, 1, 2, 2}}) {
    const Shape n(ext);
    LinearTensor t(n);
    for (auto& v : t.data) v = u(rng);
    for (Index k = 0; k < n.modes(); ++k) {
      const auto m = matricize(t, k);
      EXPECT_EQ(static_cast<Index>(m.rows()), n[k]);
      EXPECT_EQ(static_cast<Index>(m.cols()), n.total() / n[k]);
      const auto back = dematricize(m, k, n);
      EXPECT_EQ(back.data, t.data);
    }
  }
}

TEST(Dematricize, ShapeMismatch) {
  EXPECT_THROW(dematricize(Eigen::MatrixXd::Zero(2, 3), 0, Shape({2, 2})), InputError);
}

TEST(Shape, Validation) {
  EXPECT_THROW(Shape({2, 0}), InputError);
  EXPECT_THROW(Shape(std::vector<Index>(4, Index{1} << 20)), InputError);
}

// Exhaustive round trip on every shape with at most 3 modes and extents <= 6.
TEST(ScalarIndex, ExhaustiveSmallShapes) {
  for (Index m = 1; m <= 3; ++m) {
    const Shape box(std::vector<Index>(m, 6));
    for (Index z = 0; z < box.total(); ++z) {
      auto ext = to_multi_index(z, box);
      for (auto& e : ext) ++e;
      const Shape n(ext);
      for (Index p = 0; p < n.total(); ++p) ASSERT_EQ(to_scalar_index(to_multi_index(p, n), n), p);
    }
  }
}
