#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgk/solver.hpp"

using namespace sgk;

TEST(Factorize, OneByOne) {
  const auto f = factorize(Eigen::MatrixXd::Ones(1, 1));
  EXPECT_EQ(f.size(), 1u);
  EXPECT_EQ(f.jitter_used(), 0.0);
  Eigen::MatrixXd m(1, 3);
  m << 1, -2, 5;
  const Eigen::MatrixXd before = m;
  f.solve_in_place(m);
  EXPECT_EQ(m, before);
}

TEST(Factorize, HandCholesky) {
  const double e = std::exp(-1.0);
  Eigen::MatrixXd k(2, 2);
  k << 1, e, e, 1;
  const auto f = factorize(k);
  const auto l = f.lower();
  EXPECT_NEAR(l(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 0), e, 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(1 - e * e), 1e-15);
  EXPECT_EQ(l(0, 1), 0.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 1);
  solve_in_place(f, m);
  EXPECT_NEAR(m(0), 1 / (1 + e), 1e-15);
  EXPECT_NEAR(m(1), 1 / (1 + e), 1e-15);
  EXPECT_NEAR(f.condition_estimate(), 1 / (1 - e * e), 1e-14);
}

TEST(Factorize, Validation) {
  EXPECT_THROW(factorize(Eigen::MatrixXd::Ones(2, 3)), InputError);
  EXPECT_THROW(factorize(Eigen::MatrixXd(0, 0)), InputError);
  const auto f = factorize(Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd m(2, 1);
  EXPECT_THROW(f.solve_in_place(m), InputError);
}

TEST(Factorize, IndefiniteMatrixExhaustsLadder) {
  Eigen::MatrixXd k(2, 2);
  k << 1, 2, 2, 1;
  try {
    factorize(k);
    FAIL() << "expected IllConditionedError";
  } catch (const IllConditionedError& e) {
    EXPECT_EQ(e.last_jitter(), kJitterLadder.back());
    EXPECT_EQ(e.module(), "solver");
  }
}

TEST(Factorize, NearCoincidentPointsEngageJitter) {
  // 200 points in 100 pairs separated by 1e-8.
  std::vector<double> c;
  for (int i = 0; i < 100; ++i) {
    c.push_back(i / 100.0);
    c.push_back(i / 100.0 + 1e-8);
  }
  const MaternKernel kern(17.0 / 16, 2.0, 1);
  const auto k = kernel_matrix(kern, PointSet(1, c));
  const auto f = factorize(k);
  EXPECT_GT(f.jitter_used(), 0.0);
  // A right-hand side sampled from a smooth function is reproduced.
  Eigen::MatrixXd rhs(200, 1);
  for (int i = 0; i < 200; ++i) rhs(i) = std::cos(c[i]);
  Eigen::MatrixXd x = rhs;
  f.solve_in_place(x);
  EXPECT_LE((k * x - rhs).norm() / rhs.norm(), 1e-6);
}

TEST(Solve, MatchesInverseOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + rng() % 11;
    std::vector<double> c;
    for (Index i = 0; i < n; ++i) c.push_back((i + 0.5 * u(rng)) / double(n));
    const auto k = kernel_matrix(MaternKernel(0.5 + u(rng), 0.1, 1), PointSet(1, c));
    const Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, 4);
    Eigen::MatrixXd x = m;
    factorize(k).solve_in_place(x);
    const Eigen::MatrixXd oracle = k.inverse() * m;
    EXPECT_LE((x - oracle).norm() / oracle.norm(), 1e-10);
    EXPECT_LE((k * x - m).norm() / m.norm(), 1e-8);
  }
}

TEST(Solve, JitterFreeMatchesPlainLLT) {
  const auto k = kernel_matrix(MaternKernel(17.0 / 16, 2.0, 1), equidistant_grid(4, false));
  const auto f = factorize(k);
  EXPECT_EQ(f.jitter_used(), 0.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(k.rows(), 2);
  Eigen::MatrixXd b = a;
  f.solve_in_place(a);
  Eigen::LLT<Eigen::MatrixXd>(k).solveInPlace(b);
  EXPECT_EQ(a, b);
}

TEST(Solve, ResidualBoundAtDefaultKernels) {
  for (Index j : {6u, 10u}) {
    const auto k = kernel_matrix(MaternKernel(17.0 / 16, 2.0, 1), equidistant_grid(j, false));
    const auto f = factorize(k);
    for (Index col : {Index{0}, k.rows() / Index{2}, Index(k.rows()) - 1}) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k.rows(), 1);
      e(col) = 1;
      Eigen::MatrixXd x = e;
      f.solve_in_place(x);
      EXPECT_LE((k * x - e).cwiseAbs().maxCoeff(), 1e-6) << "level " << j;
    }
  }
}

TEST(FactorCache, CountsDistinctLevels) {
  const ProductKernel kernel({MaternKernel(17.0 / 16, 2.0, 1), MaternKernel(17.0 / 16, 2.0, 1)});
  std::vector<NestedHierarchy> h(2, equidistant_hierarchy(1, 2, false));
  const auto cache = build_cache(kernel, h, make_plan(2, 2, WeightVector::ones(2)));
  EXPECT_EQ(cache.size(), 6u);
  for (Index i = 0; i < 2; ++i)
    for (Index l = 0; l <= 2; ++l) {
      EXPECT_TRUE(cache.contains(i, l));
      EXPECT_EQ(cache.get(i, l).size(), h[i].level_size(l));
    }
  EXPECT_THROW(cache.get(0, 3), InputError);
  EXPECT_EQ(cache.max_jitter(), 0.0);

  const ProductKernel one({MaternKernel(17.0 / 16, 2.0, 1)});
  EXPECT_EQ(build_cache(one, {h[0]}, make_plan(1, 2, WeightVector::ones(1))).size(), 1u);
}

TEST(FactorCache, DeterministicRebuild) {
  const ProductKernel kernel({MaternKernel(0.5, 1.0, 1), MaternKernel(9.0 / 16, 2.0, 2)});
  std::vector<NestedHierarchy> h{equidistant_hierarchy(1, 3, false), equidistant_hierarchy(2, 3, false)};
  const auto plan = make_plan(2, 3, WeightVector::ones(2));
  const auto a = build_cache(kernel, h, plan), b = build_cache(kernel, h, plan);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [key, f] : a.entries()) EXPECT_EQ(f->lower(), b.get(key.first, key.second).lower());
}

TEST(FactorCache, Validation) {
  const ProductKernel kernel({MaternKernel(0.5, 1.0, 1), MaternKernel(0.5, 1.0, 1)});
  std::vector<NestedHierarchy> shallow(2, equidistant_hierarchy(1, 1, false));
  EXPECT_THROW(build_cache(kernel, shallow, make_plan(2, 2, WeightVector::ones(2))), InputError);
  std::vector<NestedHierarchy> wrong{equidistant_hierarchy(2, 2, false), equidistant_hierarchy(1, 2, false)};
  EXPECT_THROW(build_cache(kernel, wrong, make_plan(2, 2, WeightVector::ones(2))), InputError);
  FactorCache c;
  c.insert(0, 0, factorize(Eigen::MatrixXd::Ones(1, 1)));
  EXPECT_THROW(c.insert(0, 0, factorize(Eigen::MatrixXd::Ones(1, 1))), InputError);
}
