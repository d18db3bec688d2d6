// SPDX-License-Identifier: Apache-2.0
#pragma once

// Named test functions over the full product space, shared by the CLI and the
// bench studies.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgk/errors.hpp"
#include "sgk/interpolant.hpp"

namespace sgk {

inline std::vector<std::string> function_names() {
  return {"const1", "prodexp", "gauss", "cosprod", "sumsq"};
}

inline TestFunction named_function(std::string_view name) {
  if (name == "const1") return [](std::span<const double>) { return 1.0; };
  if (name == "prodexp")
    return [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += v;
      return std::exp(-s);
    };
  if (name == "gauss")
    return [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += (v - 0.5) * (v - 0.5);
      return std::exp(-s);
    };
  if (name == "cosprod")
    return [](std::span<const double> x) {
      double p = 1.0;
      for (double v : x) p *= std::cos(v);
      return p;
    };
  if (name == "sumsq")
    return [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s;
    };
  std::string known;
  for (const auto& n : function_names()) known += (known.empty() ? "" : ", ") + n;
  throw InputError("functions", "unknown test function '" + std::string(name) + "' (known: " +
                                    known + ")");
}

}  // namespace sgk
