// Interpolates f(x, y) = exp(-x - y) on a two-direction sparse grid and
// prints the error at a few points.

#include <cmath>
#include <cstdio>

#include "sgk/sgk.hpp"

int main() {
  using namespace sgk;
  const ProductKernel kernel({MaternKernel(17.0 / 16, 2.0, 1), MaternKernel(17.0 / 16, 2.0, 1)});
  const Index level = 6;
  std::vector<NestedHierarchy> h{equidistant_hierarchy(1, level, false), equidistant_hierarchy(1, level, false)};
  TestFunction f = [](std::span<const double> x) { return std::exp(-x[0] - x[1]); };

  const auto interp = compute(kernel, h, DataSource(f), WeightVector::ones(2), level);
  std::printf("plan entries %zu, sparse-grid points %zu\n", interp.plan().size(), interp.sparse_grid_points());

  const auto probes = random_cube(5, 2, 42);
  const auto u = evaluate_at_points(interp, probes);
  for (Index p = 0; p < probes.size(); ++p)
    std::printf("(%.3f, %.3f)  s=%.10f  f=%.10f\n", probes[p][0], probes[p][1], u[p], f(probes[p]));

  L2Options o;
  o.inset = 0.1;
  std::printf("L2 error on [0.1,0.9]^2: %.3e\n", l2_error(interp, f, o));
}
