// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> points;
  std::vector<sgk::Index> dims;
  std::string generator;
  bool boundary = false;
  sgk::Index count = 0;
  std::vector<std::string> kernels;
  std::string weights;
  std::string gains;
  sgk::Index level = 0;
  sgk::Index from = 0;
  std::string function;
  std::string values;
  sgk::Index eval_grid = 0;
  sgk::Index eval_random = 0;
  std::string eval_points;
  double inset = 0.0;
  std::uint64_t seed = 0;
  sgk::Index panels = 0;
  int threads = 0;
  std::string frame;
  std::string out;
  std::string model;
  bool dump_plan = false;
  bool dump_defaults = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration (flags override it)");
  app->add_option("--points", f.points, "point file per direction (repeatable)");
  app->add_option("--dims", f.dims, "direction dimensions for generated grids")->delimiter(',');
  app->add_option("--generator", f.generator, "equidistant or random");
  app->add_flag("--boundary", f.boundary, "include the boundary in equidistant grids");
  app->add_option("--count", f.count, "points per random direction");
  app->add_option("--kernel", f.kernels, "beta=...,sigma=... (once for all directions or once per direction)");
  app->add_option("--weights", f.weights, "accuracy|dof|cost-benefit|w1,w2,...");
  app->add_option("--gains", f.gains, "smoothness gains per direction, comma-separated");
  app->add_option("-J,--levels", f.level, "level J (the largest one for convergence)");
  app->add_option("--from", f.from, "smallest level for convergence");
  app->add_option("--function", f.function, "const1|prodexp|gauss|cosprod|sumsq");
  app->add_option("--values", f.values, "value table file instead of a test function");
  app->add_option("--eval-grid", f.eval_grid, "equispaced points per axis and direction");
  app->add_option("--eval-random", f.eval_random, "random points per direction");
  app->add_option("--eval-points", f.eval_points, "scattered evaluation points (full dimension)");
  app->add_option("--inset", f.inset, "margin to the unit-cube boundary for evaluation");
  app->add_option("--seed", f.seed, "seed for random evaluation points and generators");
  app->add_option("--panels", f.panels, "quadrature panels per axis (0 = auto)");
  app->add_option("--threads", f.threads, "thread count (else SGK_THREADS, else hardware)");
  app->add_option("--frame", f.frame, "subsampling reference box: bbox or unit");
  app->add_option("--out", f.out, "output directory or file");
  app->add_flag("--dump-plan", f.dump_plan, "print the combination plan");
  app->add_flag("--dump-defaults", f.dump_defaults, "print the resolved configuration as JSON and exit");
}

sgk::cli::RunConfig resolve(const CLI::App* app, const Flags& f) {
  using sgk::cli::RunConfig;
  RunConfig c = f.config.empty() ? RunConfig{} : sgk::cli::load_config(f.config);
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--points")) {
    c.directions.clear();
    for (const auto& p : f.points) {
      sgk::cli::DirectionSpec d;
      d.points = p;
      d.dim = sgk::read_points(std::filesystem::path(p)).dim();
      c.directions.push_back(d);
    }
  } else if (given("--dims")) {
    c.directions.clear();
    for (auto d : f.dims) {
      sgk::cli::DirectionSpec s;
      s.dim = d;
      c.directions.push_back(s);
    }
  }
  for (auto& d : c.directions) {
    if (given("--generator")) d.generator = f.generator;
    if (given("--boundary")) d.boundary = f.boundary;
    if (given("--count")) d.count = f.count;
    if (given("--seed")) d.seed = f.seed;
  }
  if (given("--kernel")) {
    if (f.kernels.size() != 1 && f.kernels.size() != c.directions.size())
      throw sgk::InputError("cli", "give --kernel once or once per direction (" + std::to_string(c.directions.size()) + ")");
    for (sgk::Index i = 0; i < c.directions.size(); ++i)
      sgk::cli::apply_kernel_spec(f.kernels[f.kernels.size() == 1 ? 0 : i], c.directions[i]);
  }
  if (given("--weights")) c.weights = f.weights;
  if (given("--gains")) {
    c.gains.clear();
    std::stringstream ss(f.gains);
    for (std::string g; std::getline(ss, g, ',');) c.gains.push_back(g);
  }
  if (given("--levels")) c.level = f.level;
  if (given("--from")) c.level_min = f.from;
  if (given("--function")) c.function = f.function;
  if (given("--values")) c.values = f.values;
  if (given("--eval-grid")) c.eval_grid = f.eval_grid;
  if (given("--eval-random")) c.eval_random = f.eval_random;
  if (given("--eval-points")) c.eval_points = f.eval_points;
  if (given("--inset")) c.inset = f.inset;
  if (given("--seed")) c.seed = f.seed;
  if (given("--panels")) c.panels = f.panels;
  if (given("--threads")) c.threads = f.threads;
  if (given("--frame")) c.frame = f.frame;
  if (given("--out")) c.out = f.out;
  if (given("--dump-plan")) c.dump_plan = f.dump_plan;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-grid kernel interpolation on product domains"};
  app.require_subcommand(1);
  Flags f;
  const char* names[] = {"subsample", "interpolate", "eval", "convergence", "weights", "info"};
  const char* help[] = {"build a nested point hierarchy and print level statistics",
                        "compute an interpolant and optionally save it",
                        "evaluate a saved interpolant",
                        "error table over a range of levels",
                        "weight vector and predicted rate",
                        "version, threads and known names"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 6; ++i) {
    auto* s = app.add_subcommand(names[i], help[i]);
    add_common(s, f);
    subs.push_back(s);
  }
  subs[2]->add_option("--model", f.model, "interpolant directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    const auto cfg = resolve(sub, f);
    if (f.dump_defaults) {
      std::cout << sgk::cli::to_json(cfg).dump(2) << '\n';
      return 0;
    }
    const std::string name = sub->get_name();
    if (name == "subsample") return sgk::cli::cmd_subsample(cfg, std::cout);
    if (name == "interpolate") return sgk::cli::cmd_interpolate(cfg, std::cout, std::cerr);
    if (name == "eval") return sgk::cli::cmd_eval(f.model, cfg, std::cout, std::cerr);
    if (name == "convergence") {
      sgk::cli::cmd_convergence(cfg, std::cout, std::cerr);
      return 0;
    }
    if (name == "weights") return sgk::cli::cmd_weights(cfg, std::cout, std::cerr);
    return sgk::cli::cmd_info(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
