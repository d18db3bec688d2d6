// SPDX-License-Identifier: Apache-2.0
#pragma once

// Text and binary formats:
//  - point clouds: one point per line, coordinates separated by whitespace or
//    commas, '#' starts a comment line;
//  - value tables: `i_1 ... i_m value` per line (per-direction point indices);
//  - interpolant directories: manifest.json, plan.txt, shapes.txt and one
//    little-endian float64 file per plan entry (alpha_NNNN.bin).

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgk/combitech.hpp"
#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"
#include "sgk/interpolant.hpp"
#include "sgk/kernel.hpp"

namespace sgk {

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("io", where + ": cannot parse number '" + s + "'");
  }
}

}  // namespace detail

inline PointSet read_points(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  Index lineno = 0;
  PointSet out;
  std::vector<double> p;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (out.dim() == 0) out = PointSet(fields.size());
    if (fields.size() != out.dim())
      throw IoError("io", where + ": expected " + std::to_string(out.dim()) +
                              " coordinates, found " + std::to_string(fields.size()));
    p.clear();
    for (const auto& f : fields) p.push_back(detail::parse_double(f, where));
    out.push_back(p);
  }
  if (out.dim() == 0) throw IoError("io", name + ": no points found");
  return out;
}

inline PointSet read_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("io", "cannot open point file " + path.string());
  return read_points(in, path.string());
}

inline void write_points(std::ostream& os, const PointSet& x) {
  char buf[32];
  for (Index i = 0; i < x.size(); ++i) {
    for (Index o = 0; o < x.dim(); ++o) {
      std::snprintf(buf, sizeof buf, "%.17g", x[i][o]);
      os << (o ? " " : "") << buf;
    }
    os << '\n';
  }
}

inline ValueTable read_value_table(const std::filesystem::path& path, Index m) {
  std::ifstream in(path);
  if (!in) throw IoError("io", "cannot open values file " + path.string());
  ValueTable t;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = detail::split_fields(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != m + 1)
      throw IoError("io", where + ": expected " + std::to_string(m) +
                              " point indices and a value, found " +
                              std::to_string(fields.size()) + " fields");
    MultiIndex key(m);
    for (Index i = 0; i < m; ++i) {
      const double v = detail::parse_double(fields[i], where);
      if (v < 0 || v != std::floor(v))
        throw IoError("io", where + ": point index '" + fields[i] + "' is not a nonnegative integer");
      key[i] = static_cast<Index>(v);
    }
    t.set(std::move(key), detail::parse_double(fields[m], where));
  }
  return t;
}

/// FNV-1a 64 over the base coordinates (IEEE bits) and level index lists.
inline std::string fingerprint(const NestedHierarchy& h) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffu;
      hash *= 1099511628211ull;
    }
  };
  mix(h.dim());
  mix(h.base().size());
  for (double c : h.base().coords()) mix(std::bit_cast<std::uint64_t>(c));
  mix(h.depth());
  for (Index j = 0; j <= h.depth(); ++j) {
    mix(h.level_size(j));
    for (Index i : h.level(j)) mix(i);
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

namespace detail {

inline void write_f64_le(std::ostream& os, const std::vector<double>& data) {
  for (double v : data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    os.write(bytes, 8);
  }
}

inline std::vector<double> read_f64_le(std::istream& in, Index count, const std::string& name) {
  std::vector<double> out(count);
  char bytes[8];
  for (Index i = 0; i < count; ++i) {
    if (!in.read(bytes, 8)) throw IoError("io", name + ": truncated coefficient file");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw IoError("io", name + ": trailing bytes in coefficient file");
  return out;
}

inline std::string entry_file(Index e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "alpha_%04zu.bin", e);
  return buf;
}

}  // namespace detail

inline nlohmann::json kernel_to_json(const ProductKernel& k) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < k.factors(); ++i) {
    const auto& f = k.factor(i);
    arr.push_back({{"beta", f.beta()}, {"sigma", f.sigma()}, {"dim", f.dim()},
                   {"amplitude", f.amplitude()}});
  }
  return arr;
}

inline ProductKernel kernel_from_json(const nlohmann::json& j) {
  std::vector<MaternKernel> factors;
  for (const auto& f : j)
    factors.emplace_back(f.at("beta").get<double>(), f.at("sigma").get<double>(),
                         f.at("dim").get<Index>(), f.value("amplitude", 1.0));
  return ProductKernel(std::move(factors));
}

inline void save_interpolant(const SparseGridInterpolant& interp,
                             const std::filesystem::path& dir,
                             const nlohmann::json& extra = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  const auto& plan = interp.plan();
  {
    std::ofstream os(dir / "plan.txt");
    write_plan(os, plan);
    if (!os) throw IoError("io", "cannot write " + (dir / "plan.txt").string());
  }
  {
    std::ofstream os(dir / "shapes.txt");
    for (Index e = 0; e < plan.size(); ++e) {
      const auto& shape = interp.coefficients()[e].shape;
      for (Index i = 0; i < shape.modes(); ++i) os << (i ? " " : "") << shape[i];
      os << '\n';
    }
    if (!os) throw IoError("io", "cannot write " + (dir / "shapes.txt").string());
  }
  for (Index e = 0; e < plan.size(); ++e) {
    std::ofstream os(dir / detail::entry_file(e), std::ios::binary);
    detail::write_f64_le(os, interp.coefficients()[e].data);
    if (!os) throw IoError("io", "cannot write " + (dir / detail::entry_file(e)).string());
  }
  nlohmann::json manifest;
  manifest["format"] = "sgk-interpolant";
  manifest["version"] = 1;
  manifest["kernel"] = kernel_to_json(interp.kernel());
  manifest["level"] = plan.level();
  manifest["weights"] = plan.weights().values();
  if (const auto& ex = plan.weights().exact()) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : *ex) r.push_back({v.num, v.den});
    manifest["weights_exact"] = r;
  }
  nlohmann::json fps = nlohmann::json::array();
  for (const auto& h : interp.hierarchies()) fps.push_back(fingerprint(h));
  manifest["hierarchy_fingerprints"] = fps;
  manifest["entries"] = plan.size();
  manifest["extra"] = extra;
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << '\n';
  if (!os) throw IoError("io", "cannot write manifest in " + dir.string());
}

inline nlohmann::json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("io", "no manifest.json in " + dir.string());
  try {
    auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != "sgk-interpolant")
      throw IoError("io", dir.string() + " is not an interpolant directory");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("io", "malformed manifest in " + dir.string() + ": " + e.what());
  }
}

/// Loads a persisted interpolant. The supplied hierarchies must hash to the
/// fingerprints stored in the manifest.
inline SparseGridInterpolant load_interpolant(const std::filesystem::path& dir,
                                              std::vector<NestedHierarchy> hierarchies) {
  const auto manifest = read_manifest(dir);
  const auto& fps = manifest.at("hierarchy_fingerprints");
  if (fps.size() != hierarchies.size())
    throw StaleInterpolantError("io", "interpolant has " + std::to_string(fps.size()) +
                                          " directions, " + std::to_string(hierarchies.size()) +
                                          " hierarchies supplied");
  for (Index i = 0; i < hierarchies.size(); ++i) {
    const auto got = fingerprint(hierarchies[i]);
    if (got != fps[i].get<std::string>())
      throw StaleInterpolantError("io", "direction " + std::to_string(i) +
                                            ": hierarchy fingerprint " + got +
                                            " does not match the interpolant's " +
                                            fps[i].get<std::string>());
  }
  const auto kernel = kernel_from_json(manifest.at("kernel"));
  const Index level = manifest.at("level").get<Index>();
  const Index m = kernel.factors();
  std::optional<WeightVector> w;
  if (manifest.contains("weights_exact")) {
    std::vector<Rational> r;
    for (const auto& v : manifest["weights_exact"])
      r.emplace_back(v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>());
    w.emplace(std::move(r));
  } else {
    w.emplace(manifest.at("weights").get<std::vector<double>>());
  }
  const auto plan = make_plan(m, level, *w);
  if (plan.size() != manifest.at("entries").get<Index>())
    throw IoError("io", dir.string() + ": plan size does not match the manifest");

  std::vector<LinearTensor> coeffs;
  for (Index e = 0; e < plan.size(); ++e) {
    const Shape shape = detail::entry_shape(hierarchies, plan.entries()[e].level);
    const auto path = dir / detail::entry_file(e);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io", "cannot open " + path.string());
    coeffs.emplace_back(shape, detail::read_f64_le(in, shape.total(), path.string()));
  }
  return SparseGridInterpolant(plan, kernel, std::move(hierarchies), std::move(coeffs));
}

}  // namespace sgk
