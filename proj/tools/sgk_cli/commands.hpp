// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command implementations behind the `sgk` executable. Every command takes a
// resolved RunConfig and writes to the given streams, so tests can drive them
// without a process boundary.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sgk/functions.hpp"
#include "sgk/sgk.hpp"

namespace sgk::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kThreadsEnv = "SGK_THREADS";

struct DirectionSpec {
  /// Point file; empty selects the generator.
  std::string points;
  /// equidistant (tensor powers of nested grids) or random (uniform cube, subsampled).
  std::string generator = "equidistant";
  Index dim = 1;
  bool boundary = false;
  Index count = 1000;
  std::uint64_t seed = 1;
  std::optional<double> beta;
  std::optional<double> sigma;
};

struct RunConfig {
  std::vector<DirectionSpec> directions{DirectionSpec{}, DirectionSpec{}};
  /// accuracy | dof | cost-benefit | comma-separated explicit weights.
  std::string weights = "accuracy";
  /// Smoothness gains per direction; empty means 2(beta + d/2) of each kernel.
  std::vector<std::string> gains;
  Index level = 4;
  Index level_min = 1;
  std::string function = "const1";
  std::string values;
  Index eval_grid = 0;
  Index eval_random = 0;
  std::string eval_points;
  double inset = 0.1;
  std::uint64_t seed = 1;
  Index panels = 0;
  int threads = 0;
  /// bbox or unit: reference box of the subsampling cuboids.
  std::string frame = "bbox";
  std::string out;
  bool dump_plan = false;
};

inline nlohmann::json to_json(const DirectionSpec& d) {
  nlohmann::json j{{"points", d.points}, {"generator", d.generator}, {"dim", d.dim},
                   {"boundary", d.boundary}, {"count", d.count}, {"seed", d.seed}};
  j["beta"] = d.beta ? nlohmann::json(*d.beta) : nlohmann::json(nullptr);
  j["sigma"] = d.sigma ? nlohmann::json(*d.sigma) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : c.directions) dirs.push_back(to_json(d));
  return {{"directions", dirs}, {"weights", c.weights}, {"gains", c.gains},
          {"level", c.level}, {"level_min", c.level_min}, {"function", c.function},
          {"values", c.values}, {"eval_grid", c.eval_grid}, {"eval_random", c.eval_random},
          {"eval_points", c.eval_points}, {"inset", c.inset}, {"seed", c.seed},
          {"panels", c.panels}, {"threads", c.threads}, {"frame", c.frame},
          {"out", c.out}, {"dump_plan", c.dump_plan}};
}

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cli", std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& j, const nlohmann::json& known, const std::string& where) {
  for (const auto& [key, v] : j.items())
    if (!known.contains(key)) throw InputError("cli", where + ": unknown config key '" + key + "'");
}

}  // namespace detail

inline DirectionSpec direction_from_json(const nlohmann::json& j, Index i) {
  const std::string where = "direction " + std::to_string(i);
  if (!j.is_object()) throw InputError("cli", where + ": expected an object");
  DirectionSpec d;
  detail::reject_unknown(j, to_json(d), where);
  detail::read_key(j, "points", d.points);
  detail::read_key(j, "generator", d.generator);
  detail::read_key(j, "dim", d.dim);
  detail::read_key(j, "boundary", d.boundary);
  detail::read_key(j, "count", d.count);
  detail::read_key(j, "seed", d.seed);
  if (j.contains("beta") && !j["beta"].is_null()) d.beta = j["beta"].get<double>();
  if (j.contains("sigma") && !j["sigma"].is_null()) d.sigma = j["sigma"].get<double>();
  return d;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("cli", "config must be a JSON object");
  RunConfig c;
  detail::reject_unknown(j, to_json(c), "config");
  if (j.contains("directions")) {
    c.directions.clear();
    Index i = 0;
    for (const auto& d : j.at("directions")) c.directions.push_back(direction_from_json(d, i++));
  }
  detail::read_key(j, "weights", c.weights);
  detail::read_key(j, "gains", c.gains);
  detail::read_key(j, "level", c.level);
  detail::read_key(j, "level_min", c.level_min);
  detail::read_key(j, "function", c.function);
  detail::read_key(j, "values", c.values);
  detail::read_key(j, "eval_grid", c.eval_grid);
  detail::read_key(j, "eval_random", c.eval_random);
  detail::read_key(j, "eval_points", c.eval_points);
  detail::read_key(j, "inset", c.inset);
  detail::read_key(j, "seed", c.seed);
  detail::read_key(j, "panels", c.panels);
  detail::read_key(j, "threads", c.threads);
  detail::read_key(j, "frame", c.frame);
  detail::read_key(j, "out", c.out);
  detail::read_key(j, "dump_plan", c.dump_plan);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cli", "cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cli", path.string() + ": " + e.what());
  }
}

/// Flag, then the SGK_THREADS environment variable, then the hardware count.
inline int resolve_threads(int flag, const char* env = std::getenv(kThreadsEnv)) {
  if (flag < 0) throw InputError("cli", "thread count must be nonnegative");
  if (flag > 0) return flag;
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0)
      throw InputError("cli", std::string(kThreadsEnv) + "='" + env + "' is not a positive integer");
    return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Parses "beta=1.0625,sigma=2" (either key optional) into a direction.
inline void apply_kernel_spec(const std::string& spec, DirectionSpec& d) {
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const auto item = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("cli", "kernel spec '" + spec + "': expected key=value, got '" + item + "'");
    const auto key = item.substr(0, eq);
    const auto val = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (val.empty() || *end != '\0') throw InputError("cli", "kernel spec '" + spec + "': bad number '" + val + "'");
    if (key == "beta")
      d.beta = v;
    else if (key == "sigma")
      d.sigma = v;
    else
      throw InputError("cli", "kernel spec '" + spec + "': unknown key '" + key + "' (expected beta, sigma)");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
}

inline double default_beta(Index dim) { return 25.0 / 16.0 - 0.5 * static_cast<double>(dim); }

inline ProductKernel make_kernel(const RunConfig& c) {
  if (c.directions.empty()) throw InputError("cli", "at least one direction is required");
  std::vector<MaternKernel> f;
  for (Index i = 0; i < c.directions.size(); ++i) {
    const auto& d = c.directions[i];
    const double beta = d.beta.value_or(default_beta(d.dim));
    if (!(beta > 0.0))
      throw InputError("cli", "direction " + std::to_string(i) + ": default beta 25/16 - d/2 is not positive for d=" +
                                  std::to_string(d.dim) + "; pass --kernel beta=...");
    f.emplace_back(beta, d.sigma.value_or(2.0 * std::sqrt(static_cast<double>(d.dim))), d.dim);
  }
  return ProductKernel(std::move(f));
}

inline std::vector<Gain> make_gains(const RunConfig& c, const ProductKernel& k) {
  std::vector<Gain> g;
  if (c.gains.empty()) {
    for (Index i = 0; i < k.factors(); ++i) {
      const double s2 = 2.0 * k.factor(i).smoothness();
      // Keep dyadic values exact so the weights stay rational.
      const double scaled = s2 * 1024.0;
      if (scaled == std::floor(scaled) && std::abs(scaled) < 1e15)
        g.emplace_back(Rational(static_cast<std::int64_t>(scaled), 1024));
      else
        g.emplace_back(s2);
    }
    return g;
  }
  if (c.gains.size() != k.factors())
    throw InputError("cli", "expected " + std::to_string(k.factors()) + " gains, got " + std::to_string(c.gains.size()));
  for (const auto& s : c.gains) {
    const auto r = Rational::parse(s);
    if (!r) throw InputError("cli", "gain '" + s + "' is not a number or fraction");
    g.emplace_back(*r);
  }
  return g;
}

/// Strategy name or explicit list; explicit weights are scaled to max 1 with a warning.
inline WeightVector make_weights(const RunConfig& c, const ProductKernel& k, std::ostream& warn) {
  const Index m = k.factors();
  const auto& s = c.weights;
  if (s.find(',') == std::string::npos && s.find_first_not_of("0123456789./ ") != std::string::npos) {
    std::vector<Index> dims;
    for (Index i = 0; i < m; ++i) dims.push_back(k.factor(i).dim());
    return weight_strategy(parse_strategy(s), dims, make_gains(c, k));
  }
  std::vector<Rational> w;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    const auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto r = Rational::parse(item);
    if (!r || r->num <= 0) throw InputError("cli", "weight '" + item + "' is not a positive number");
    w.push_back(*r);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (w.size() != m)
    throw InputError("cli", "expected " + std::to_string(m) + " weights, got " + std::to_string(w.size()));
  Rational mx = w[0];
  for (const auto& r : w)
    if (r.value() > mx.value()) mx = r;
  if (!(mx.num == 1 && mx.den == 1)) {
    warn << "warning: weights " << s << " rescaled to max 1\n";
    for (auto& r : w) r = Rational(static_cast<std::int64_t>(r.num * mx.den), static_cast<std::int64_t>(r.den * mx.num));
  }
  return WeightVector(std::move(w));
}

inline PointSet direction_points(const DirectionSpec& d, Index i) {
  if (!d.points.empty()) {
    auto x = read_points(std::filesystem::path(d.points));
    if (x.dim() != d.dim)
      throw InputError("cli", "direction " + std::to_string(i) + ": " + d.points + " has dimension " +
                                  std::to_string(x.dim()) + ", expected " + std::to_string(d.dim));
    return x;
  }
  if (d.generator == "random") return random_cube(d.count, d.dim, d.seed);
  throw InputError("cli", "direction " + std::to_string(i) + ": generator '" + d.generator +
                              "' has no point cloud (expected random or a points file)");
}

inline SubsampleOptions subsample_options(const RunConfig& c, Index dim) {
  SubsampleOptions o;
  if (c.frame == "unit")
    o.frame = unit_cube(dim);
  else if (c.frame != "bbox")
    throw InputError("cli", "frame '" + c.frame + "' (expected bbox or unit)");
  return o;
}

inline std::vector<NestedHierarchy> make_hierarchies(const RunConfig& c, const WeightVector& w, Index level) {
  std::vector<NestedHierarchy> h;
  for (Index i = 0; i < c.directions.size(); ++i) {
    const auto& d = c.directions[i];
    const Index depth = sgk::detail::axis_bound(w, i, level);
    if (d.points.empty() && d.generator == "equidistant")
      h.push_back(equidistant_hierarchy(d.dim, depth, d.boundary));
    else if (d.points.empty() && d.generator != "random")
      throw InputError("cli", "direction " + std::to_string(i) + ": unknown generator '" + d.generator +
                                  "' (expected equidistant or random)");
    else
      h.push_back(build_hierarchy(direction_points(d, i), depth, subsample_options(c, d.dim), false));
  }
  return h;
}

inline DataSource make_data(const RunConfig& c) {
  if (!c.values.empty()) return DataSource(read_value_table(c.values, c.directions.size()));
  return DataSource(named_function(c.function));
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------------ commands

inline int cmd_subsample(const RunConfig& c, std::ostream& out) {
  if (c.directions.size() != 1) throw InputError("cli", "subsample takes exactly one direction (--points FILE)");
  const auto& d = c.directions[0];
  const auto x = direction_points(d, 0);
  const auto h = build_hierarchy(x, c.level, subsample_options(c, x.dim()), true);
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    for (Index j = 0; j <= h.depth(); ++j) {
      const auto path = std::filesystem::path(c.out) / ("level_" + std::to_string(j) + ".txt");
      std::ofstream os(path);
      for (Index i : h.level(j)) os << i << '\n';
      if (!os) throw IoError("cli", "cannot write " + path.string());
    }
  }
  std::ofstream file;
  if (!c.out.empty()) file.open(std::filesystem::path(c.out) / "stats.csv");
  auto emit = [&](std::ostream& os) {
    os << "level,count,q,h\n";
    for (Index j = 0; j <= h.depth(); ++j) {
      const auto& s = h.stats()[j];
      os << j << ',' << s.count << ',' << fmt17(s.separation_radius) << ',' << fmt17(s.fill_distance) << '\n';
    }
  };
  emit(out);
  if (file.is_open()) {
    emit(file);
    if (!file) throw IoError("cli", "cannot write stats.csv in " + c.out);
  }
  return 0;
}

inline SparseGridInterpolant run_compute(const RunConfig& c, std::ostream& warn, Index level) {
  const auto kernel = make_kernel(c);
  const auto w = make_weights(c, kernel, warn);
  auto h = make_hierarchies(c, w, c.level);
  return compute(kernel, std::move(h), make_data(c), w, level, {resolve_threads(c.threads), true});
}

inline void write_report(std::ostream& out, const SolveReport& r) {
  out << "plan entries: " << r.plan_entries << '\n'
      << "sparse-grid points: " << r.sparse_grid_points << '\n'
      << "factorizations: " << r.factorizations << '\n'
      << "max residual: " << fmt17(r.max_residual) << '\n'
      << "max jitter: " << fmt17(r.max_jitter) << '\n';
}

inline int cmd_interpolate(const RunConfig& c, std::ostream& out, std::ostream& warn) {
  const auto interp = run_compute(c, warn, c.level);
  if (c.dump_plan) write_plan(out, interp.plan());
  write_report(out, interp.report());
  if (!c.out.empty()) {
    save_interpolant(interp, c.out, {{"config", to_json(c)}});
    out << "saved: " << c.out << '\n';
  }
  return 0;
}

/// Per-direction evaluation sets from --eval-grid or --eval-random.
inline std::vector<PointSet> eval_grids(const RunConfig& c) {
  if (!(c.inset >= 0.0 && c.inset < 0.5)) throw InputError("cli", "inset must lie in [0, 0.5)");
  std::vector<PointSet> g;
  for (Index i = 0; i < c.directions.size(); ++i) {
    const Index d = c.directions[i].dim;
    PointSet p;
    if (c.eval_grid > 0) {
      std::vector<double> line;
      for (Index k = 0; k < c.eval_grid; ++k)
        line.push_back(c.eval_grid == 1 ? 0.5 : c.inset + (1.0 - 2.0 * c.inset) * static_cast<double>(k) / static_cast<double>(c.eval_grid - 1));
      p = tensor_grid(PointSet(1, line), d);
    } else if (c.eval_random > 0) {
      auto r = random_cube(c.eval_random, d, c.seed + i);
      std::vector<double> coords = r.coords();
      for (auto& v : coords) v = c.inset + (1.0 - 2.0 * c.inset) * v;
      p = PointSet(d, std::move(coords));
    } else {
      throw InputError("cli", "no evaluation points: pass --eval-grid N, --eval-random N or --eval-points FILE");
    }
    g.push_back(std::move(p));
  }
  return g;
}

inline void write_values_csv(std::ostream& os, const PointSet& x, const std::vector<double>& u) {
  for (Index o = 0; o < x.dim(); ++o) os << 'x' << o + 1 << ',';
  os << "value\n";
  for (Index p = 0; p < x.size(); ++p) {
    for (Index o = 0; o < x.dim(); ++o) os << fmt17(x[p][o]) << ',';
    os << fmt17(u[p]) << '\n';
  }
}

/// Rebuilds the hierarchies from the configuration stored with the model,
/// then evaluates. Evaluation options come from `c`.
inline int cmd_eval(const std::filesystem::path& model, const RunConfig& c, std::ostream& out, std::ostream& warn) {
  const auto manifest = read_manifest(model);
  if (!manifest.contains("extra") || !manifest["extra"].contains("config"))
    throw IoError("cli", model.string() + ": manifest has no stored run configuration");
  const auto stored = config_from_json(manifest["extra"]["config"]);
  const auto kernel = make_kernel(stored);
  const auto w = make_weights(stored, kernel, warn);
  const auto interp = load_interpolant(model, make_hierarchies(stored, w, stored.level));
  RunConfig e = c;
  e.directions = stored.directions;
  const int threads = resolve_threads(c.threads);

  PointSet x;
  std::vector<double> u;
  if (!c.eval_points.empty()) {
    x = read_points(std::filesystem::path(c.eval_points));
    u = evaluate_at_points(interp, x, {threads});
  } else {
    const auto g = eval_grids(e);
    const auto t = evaluate(interp, g, {threads});
    Index total_dim = 0;
    for (const auto& p : g) total_dim += p.dim();
    x = PointSet(total_dim);
    std::vector<double> pt;
    for (Index z = 0; z < t.shape.total(); ++z) {
      const auto k = to_multi_index(z, t.shape);
      pt.clear();
      for (Index i = 0; i < g.size(); ++i) {
        auto p = g[i][k[i]];
        pt.insert(pt.end(), p.begin(), p.end());
      }
      x.push_back(pt);
    }
    u = t.data;
  }
  if (c.out.empty()) {
    write_values_csv(out, x, u);
  } else {
    std::ofstream os(c.out);
    write_values_csv(os, x, u);
    if (!os) throw IoError("cli", "cannot write " + c.out);
    out << "wrote " << u.size() << " values to " << c.out << '\n';
  }
  return 0;
}

inline double rms_on_grids(const SparseGridInterpolant& interp, const TestFunction& f,
                           const std::vector<PointSet>& g, int threads) {
  const auto u = evaluate(interp, g, {threads});
  std::vector<double> ref(u.data.size()), x;
  for (Index z = 0; z < u.data.size(); ++z) {
    const auto k = to_multi_index(z, u.shape);
    x.clear();
    for (Index i = 0; i < g.size(); ++i) {
      auto p = g[i][k[i]];
      x.insert(x.end(), p.begin(), p.end());
    }
    ref[z] = f(x);
  }
  return rms_error(u.data, ref);
}

/// L2 error by quadrature, or RMS on a random tensor grid when --eval-random is set.
inline ConvergenceRecord cmd_convergence(const RunConfig& c, std::ostream& out, std::ostream& warn) {
  if (c.level_min > c.level) throw InputError("cli", "level range is empty: " + std::to_string(c.level_min) + ".." + std::to_string(c.level));
  if (!c.values.empty()) throw InputError("cli", "convergence needs a test function, not a values file");
  const auto kernel = make_kernel(c);
  const auto w = make_weights(c, kernel, warn);
  const auto h = make_hierarchies(c, w, c.level);
  const auto f = named_function(c.function);
  const int threads = resolve_threads(c.threads);
  std::vector<PointSet> grids;
  if (c.eval_random > 0 || c.eval_grid > 0) grids = eval_grids(c);
  ConvergenceRecord rec;
  for (Index level = c.level_min; level <= c.level; ++level) {
    const auto interp = compute(kernel, h, DataSource(f), w, level, {threads, false});
    double err;
    if (grids.empty()) {
      L2Options o;
      o.panels_per_dim = c.panels;
      o.inset = c.inset;
      o.threads = threads;
      err = l2_error(interp, f, o);
    } else {
      err = rms_on_grids(interp, f, grids, threads);
    }
    rec.add(level, interp.sparse_grid_points(), err);
  }
  if (c.out.empty()) {
    write_csv(out, rec);
  } else {
    std::ofstream os(c.out);
    write_csv(os, rec);
    if (!os) throw IoError("cli", "cannot write " + c.out);
  }
  if (rec.rows.size() >= 2) {
    const auto fit = fit_order(rec, rec.rows.size());
    warn << "fitted order over J=" << c.level_min << ".." << c.level << ": " << fit.slope << '\n';
  }
  return rec;
}

inline int cmd_weights(const RunConfig& c, std::ostream& out, std::ostream& warn) {
  const auto kernel = make_kernel(c);
  const auto w = make_weights(c, kernel, warn);
  std::vector<Index> dims;
  for (Index i = 0; i < kernel.factors(); ++i) dims.push_back(kernel.factor(i).dim());
  const auto gains = make_gains(c, kernel);
  const auto r = predicted_rate(dims, gains, w);
  out << "weights:";
  if (w.exact())
    for (const auto& v : *w.exact()) out << ' ' << v;
  else
    for (double v : w.values()) out << ' ' << v;
  out << "\nbeta: " << r.beta << "\nP: " << r.P << "\nR: " << r.R << "\nbeta*: " << r.beta_star
      << "\nlog exponent: " << r.log_exponent << "\noptimal band: " << (r.in_optimal_band ? "yes" : "no") << '\n';
  return 0;
}

inline int cmd_info(const RunConfig& c, std::ostream& out) {
  out << "sgk " << kVersion << '\n' << "threads: " << resolve_threads(c.threads) << '\n' << "functions:";
  for (const auto& n : function_names()) out << ' ' << n;
  out << "\nweight strategies: accuracy dof cost-benefit\n";
  return 0;
}

}  // namespace sgk::cli
