// Scattered points in a 2D direction times an interval: subsample the cloud
// into nested levels, interpolate with cost-benefit weights, save and reload.

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sgk/sgk.hpp"

int main() {
  using namespace sgk;
  const auto cloud = random_cube(2000, 2, 7);
  const Index dims[] = {2, 1};
  const Gain gains[] = {Gain(Rational(25, 8)), Gain(Rational(25, 8))};
  const auto w = weight_strategy(WeightStrategy::cost_benefit, dims, gains);
  const Index level = 4;

  std::vector<NestedHierarchy> h{build_hierarchy(cloud, detail::axis_bound(w, 0, level)),
                                 equidistant_hierarchy(1, detail::axis_bound(w, 1, level), true)};
  for (const auto& s : h[0].stats())
    std::printf("count %5zu  h %.4f  q %.4f\n", s.count, s.fill_distance, s.separation_radius);

  const ProductKernel kernel({MaternKernel::with_default_sigma(25.0 / 16 - 1.0, 2),
                              MaternKernel::with_default_sigma(25.0 / 16 - 0.5, 1)});
  TestFunction f = [](std::span<const double> x) { return std::cos(x[0] + 2 * x[1]) * std::exp(-x[2]); };
  const auto interp = compute(kernel, h, DataSource(f), w, level);
  std::printf("N = %zu, entries = %zu, max jitter = %g\n", interp.sparse_grid_points(), interp.plan().size(),
              interp.report().max_jitter);

  const auto dir = std::filesystem::temp_directory_path() / "sgk_sample_model";
  save_interpolant(interp, dir);
  const auto loaded = load_interpolant(dir, h);
  const auto probes = random_cube(1000, 3, 8);
  const auto u = evaluate_at_points(loaded, probes);
  std::vector<double> ref;
  for (Index p = 0; p < probes.size(); ++p) ref.push_back(f(probes[p]));
  std::printf("RMS error at 1000 random points: %.3e\n", rms_error(u, ref));
  std::filesystem::remove_all(dir);
}
