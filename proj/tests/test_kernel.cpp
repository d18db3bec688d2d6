#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "sgk/kernel.hpp"

using namespace sgk;

namespace {

struct Frozen {
  double beta, z, value;
};

// K_beta(z) to 20 significant digits from an arbitrary-precision evaluation.
const Frozen kBesselGrid[] = {
    {1.0 / 16.0, 1e-6, 15.808301614733326076},
    {1.0 / 16.0, 1e-3, 7.2730916336950899503},
    {1.0 / 16.0, 0.05, 3.142413894119383287},
    {1.0 / 16.0, 0.5, 0.92662950104649015486},
    {1.0 / 16.0, 1.0, 0.42162600553675966294},
    {1.0 / 16.0, 1.9, 0.12895501107588234883},
    {1.0 / 16.0, 2.1, 0.1008620469486705442},
    {1.0 / 16.0, 5.0, 0.0036924202266307991003},
    {1.0 / 16.0, 12.0, 2.2011698980833712778e-6},
    {1.0 / 16.0, 40.0, 8.3932659282731663635e-19},
    {1.0 / 16.0, 200.0, 1.2256939196220919358e-88},
    {9.0 / 16.0, 1e-6, 2770.070564356425091},
    {9.0 / 16.0, 1e-3, 56.859108706940312995},
    {9.0 / 16.0, 0.05, 6.0826355587382314025},
    {9.0 / 16.0, 0.5, 1.1183332686978498074},
    {9.0 / 16.0, 1.0, 0.47224828685051914846},
    {9.0 / 16.0, 1.9, 0.13795380782822317798},
    {9.0 / 16.0, 2.1, 0.10730951327982387512},
    {9.0 / 16.0, 5.0, 0.003799643146719294084},
    {9.0 / 16.0, 12.0, 2.2289011640931705812e-6},
    {9.0 / 16.0, 40.0, 8.4257150250845289511e-19},
    {9.0 / 16.0, 200.0, 1.2266494835877197057e-88},
    {17.0 / 16.0, 1e-6, 2396079.855476621068},
    {17.0 / 16.0, 1e-3, 1555.966457199949066},
    {17.0 / 16.0, 0.05, 24.281199331664768538},
    {17.0 / 16.0, 0.5, 1.7793382244689488521},
    {17.0 / 16.0, 1.0, 0.62958939243578332578},
    {17.0 / 16.0, 1.9, 0.16408588454378192739},
    {17.0 / 16.0, 2.1, 0.12587560895806130481},
    {17.0 / 16.0, 5.0, 0.0040924613270768678382},
    {17.0 / 16.0, 12.0, 2.3026081236645370517e-6},
    {17.0 / 16.0, 40.0, 8.5106662899518660284e-19},
    {17.0 / 16.0, 200.0, 1.2291374320324114999e-88},
    {0.3, 1e-6, 116.16463060626913163},
    {0.3, 1e-3, 14.406547529041027961},
    {0.3, 0.05, 3.811966336769110841},
    {0.3, 0.5, 0.97647412438178792102},
    {0.3, 1.0, 0.43507602420880202435},
    {0.3, 1.9, 0.13137942527906502387},
    {0.3, 2.1, 0.10260207043456642528},
    {0.3, 5.0, 0.0037216693288734254993},
    {0.3, 12.0, 2.2087760727335875381e-6},
    {0.3, 40.0, 8.4021932613531396747e-19},
    {0.3, 200.0, 1.2259571033028512251e-88},
    {1.7, 1e-6, 23394417852.127348084},
    {1.7, 1e-3, 185828.39998462770095},
    {1.7, 0.05, 240.14812072096630593},
    {1.7, 0.5, 4.4441563201861339669},
    {1.7, 1.0, 1.1387178091799357611},
    {1.7, 1.9, 0.23689187682713977522},
    {1.7, 2.1, 0.17663645748973691386},
    {1.7, 5.0, 0.0048026033101904890506},
    {1.7, 12.0, 2.4706289117108121206e-6},
    {1.7, 40.0, 8.6977260596094729535e-19},
    {1.7, 200.0, 1.2345473676474577581e-88},
    {2.5, 1e-6, 3759942411945874.0966},
    {2.5, 1e-3, 118899799.11154879389},
    {2.5, 0.05, 6723.1886696423617135},
    {2.5, 0.5, 20.425904466498484536},
    {2.5, 1.0, 3.2274795311352619091},
    {2.5, 1.9, 0.46373991005550486473},
    {2.5, 2.1, 0.32925376096331830368},
    {2.5, 5.0, 0.0064957750043857580024},
    {2.5, 12.0, 2.8250369353706523016e-6},
    {2.5, 40.0, 9.0660051518106025172e-19},
    {2.5, 200.0, 1.244935042972471769e-88},
    {3.25, 1e-6, 3.8346974536450693957e+20},
    {3.25, 1e-3, 68191627678.617108027},
    {3.25, 0.05, 205096.3667692370003},
    {3.25, 0.5, 112.23788941727771435},
    {3.25, 1.0, 10.8948575370412244},
    {3.25, 1.9, 1.0494614753700247696},
    {3.25, 2.1, 0.70496037089032421213},
    {3.25, 5.0, 0.0095142872746859743828},
    {3.25, 12.0, 3.3533290219316315758e-6},
    {3.25, 40.0, 9.5614356638082554261e-19},
    {3.25, 200.0, 1.2583954083251503767e-88},
    {7.9, 1e-6, 1.2367721652074590502e+53},
    {7.9, 1e-3, 2.4676848040321267093e+29},
    {7.9, 0.05, 9340870050151602.5214},
    {7.9, 0.5, 116545592.38277761381},
    {7.9, 1.0, 474900.07903227921182},
    {7.9, 1.9, 2716.0657913834832501},
    {7.9, 2.1, 1197.4740014006995105},
    {7.9, 5.0, 0.63360635481507183217},
    {7.9, 12.0, 0.000025058595970179603448},
    {7.9, 40.0, 1.8095720579315889506e-18},
    {7.9, 200.0, 1.4320607107203043184e-88}
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(BesselK, FrozenGrid) {
  for (const auto& f : kBesselGrid) EXPECT_LE(rel(bessel_k(f.beta, f.z), f.value), 1e-12) << f.beta << " " << f.z;
}

TEST(BesselK, HalfIntegerClosedForms) {
  EXPECT_LE(rel(bessel_k(0.5, 1.0), std::sqrt(std::numbers::pi / 2) * std::exp(-1.0)), 1e-14);
  EXPECT_NEAR(bessel_k(0.5, 1.0), 0.46106850444789455844, 1e-15);
  EXPECT_LE(rel(bessel_k(1.5, 2.0), std::sqrt(std::numbers::pi / 4) * std::exp(-2.0) * 1.5), 1e-14);
  EXPECT_NEAR(bessel_k(1.5, 2.0), 0.17990665795209217105, 1e-15);
  for (double z = 0.01; z < 40; z *= 1.3) {
    const double base = std::sqrt(std::numbers::pi / (2 * z)) * std::exp(-z);
    EXPECT_LE(rel(bessel_k(0.5, z), base), 1e-12);
    EXPECT_LE(rel(bessel_k(1.5, z), base * (1 + 1 / z)), 1e-12);
    EXPECT_LE(rel(bessel_k(2.5, z), base * (1 + 3 / z + 3 / (z * z))), 1e-12);
  }
}

TEST(BesselK, FrozenSixteenth) { EXPECT_LE(rel(bessel_k(1.0 / 16, 0.5), 0.92662950104649015486), 1e-13); }

TEST(BesselK, DomainErrors) {
  EXPECT_THROW(bessel_k(0.5, 0.0), DomainError);
  EXPECT_THROW(bessel_k(0.5, -1.0), DomainError);
}

TEST(Matern, Examples) {
  for (double sigma : {0.3, 1.0, 2.5})
    for (double r : {0.0, 0.1, 1.0, 7.0}) EXPECT_LE(std::abs(MaternKernel(0.5, sigma, 1)(r) - std::exp(-r / sigma)), 1e-15);
  for (double beta : {1.0 / 16, 9.0 / 16, 17.0 / 16, 3.0}) EXPECT_EQ(MaternKernel(beta, 1.0, 2)(0.0), 1.0);
  EXPECT_LE(rel(MaternKernel(17.0 / 16, 2.0, 1)(1.0), 0.84316554293777608460), 1e-13);
}

TEST(Matern, Validation) {
  EXPECT_THROW(MaternKernel(0.0, 1.0, 1), InputError);
  EXPECT_THROW(MaternKernel(1.0, -1.0, 1), InputError);
  EXPECT_THROW(MaternKernel(1.0, 1.0, 0), InputError);
  const MaternKernel k(1.0, 1.0, 1);
  EXPECT_THROW(k(std::nan("")), InputError);
  EXPECT_THROW(k(INFINITY), InputError);
  EXPECT_THROW(k(-0.5), InputError);
}

TEST(Matern, SmoothnessAndDefaults) {
  EXPECT_DOUBLE_EQ(MaternKernel(17.0 / 16, 1.0, 1).smoothness(), 25.0 / 16);
  EXPECT_DOUBLE_EQ(MaternKernel(1.0 / 16, 1.0, 3).smoothness(), 25.0 / 16);
  EXPECT_DOUBLE_EQ(MaternKernel::with_default_sigma(9.0 / 16, 2).sigma(), 2 * std::sqrt(2.0));
}

TEST(Matern, MonotoneDecayAndPositivity) {
  for (double beta : {1.0 / 16, 9.0 / 16, 17.0 / 16, 2.5}) {
    const MaternKernel k(beta, 2.0, 1);
    double prev = k(0.0);
    for (int i = 1; i <= 2000; ++i) {
      const double v = k(20.0 * i / 2000);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(Matern, HalfIntegerOracleOnRange) {
  const double sigma = 1.7;
  for (int i = 1; i <= 500; ++i) {
    const double r = 10 * sigma * i / 500, z = r / sigma;
    EXPECT_LE(rel(MaternKernel(1.5, sigma, 1)(r), std::exp(-z) * (1 + z)), 1e-12);
    EXPECT_LE(rel(MaternKernel(2.5, sigma, 1)(r), std::exp(-z) * (1 + z + z * z / 3)), 1e-12);
  }
}

TEST(ProductKernel, Examples) {
  const ProductKernel k({MaternKernel(0.5, 1.0, 1), MaternKernel(0.5, 1.0, 2)});
  EXPECT_EQ(k.total_dim(), 3u);
  EXPECT_EQ(k.dims(), (std::vector<Index>{1, 2}));
  const std::vector<double> x{0.1, 0.2, 0.3}, y{0.6, 0.5, 0.9};
  const double r1 = 0.5, r2 = std::hypot(0.3, 0.6);
  EXPECT_LE(rel(k(x, y), std::exp(-r1 - r2)), 1e-14);
  EXPECT_EQ(k(x, y), k(y, x));
  EXPECT_EQ(k(x, x), 1.0);
  EXPECT_EQ(product_eval(k, x, y), k(x, y));
  const std::vector<double> bad{0.1, 0.2};
  EXPECT_THROW(k(x, bad), InputError);
  EXPECT_THROW(ProductKernel(std::vector<MaternKernel>{}), InputError);
}

TEST(KernelMatrix, Examples) {
  const MaternKernel k(0.5, 1.0, 1);
  const auto one = kernel_matrix(k, PointSet(1, {0.3}));
  ASSERT_EQ(one.rows(), 1);
  EXPECT_EQ(one(0, 0), 1.0);
  const auto two = kernel_matrix(k, PointSet(1, {0.0, 1.0}));
  EXPECT_EQ(two(0, 0), 1.0);
  EXPECT_EQ(two(1, 1), 1.0);
  EXPECT_LE(std::abs(two(0, 1) - std::exp(-1.0)), 1e-16);
  EXPECT_EQ(two(0, 1), two(1, 0));
}

TEST(KernelMatrix, CrossAndValidation) {
  const MaternKernel k(17.0 / 16, 2.0, 2);
  const PointSet x(2, {0, 0, 1, 0, 0.5, 0.5}), y(2, {0.2, 0.1, 0.9, 0.9});
  const auto c = kernel_matrix(k, x, y);
  ASSERT_EQ(c.rows(), 3);
  ASSERT_EQ(c.cols(), 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) EXPECT_EQ(c(i, j), k(distance(x[i], y[j])));
  EXPECT_THROW(kernel_matrix(MaternKernel(1, 1, 1), x), InputError);
}

TEST(KernelMatrix, SymmetricUnitDiagonalPositiveDefinite) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0, 1);
  for (double beta : {1.0 / 16, 9.0 / 16, 17.0 / 16}) {
    for (Index d = 1; d <= 3; ++d) {
      const Index n = d == 1 ? 10 : 50;
      std::vector<double> c(n * d);
      for (auto& v : c) v = u(rng);
      const auto k = kernel_matrix(MaternKernel(beta, 2.0 * std::sqrt(double(d)), d), PointSet(d, c));
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        EXPECT_EQ(k(i, i), 1.0);
        for (Eigen::Index j = 0; j < k.cols(); ++j) ASSERT_EQ(k(i, j), k(j, i));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "beta=" << beta << " d=" << d;
      Eigen::LLT<Eigen::MatrixXd> llt(k);
      EXPECT_EQ(llt.info(), Eigen::Success);
    }
  }
}
