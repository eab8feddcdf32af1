// stats.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "locent/error.hpp"
#include "locent/rng.hpp"

namespace locent {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

namespace detail {

struct Moments {
  double mean_x = 0.0, mean_y = 0.0;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
};

// Two-pass centered sums.
inline Moments moments(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(errc::degenerate_input, "xs and ys differ in length");
  if (xs.size() < 3) throw Error(errc::degenerate_input, "need at least 3 points");
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m.mean_x += xs[i];
    m.mean_y += ys[i];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - m.mean_x;
    const double dy = ys[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  if (!(m.sxx > 0.0) || !(m.syy > 0.0)) throw Error(errc::degenerate_input, "zero variance");
  return m;
}

}  // namespace detail

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  const auto m = detail::moments(xs, ys);
  return m.sxy / std::sqrt(m.sxx * m.syy);
}

// Least squares y = slope x + intercept; R^2 = 1 - SSR / SST.
inline LinearFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
  const auto m = detail::moments(xs, ys);
  LinearFit fit;
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.mean_y - fit.slope * m.mean_x;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ssr += e * e;
  }
  fit.r_squared = 1.0 - ssr / m.syy;
  return fit;
}

// One-sided permutation p-value for a positive correlation:
// (1 + #{shuffles with r >= observed}) / (1 + shuffles).
inline double permutation_p_value(std::span<const double> xs, std::span<const double> ys,
                                  std::size_t shuffles = 1000, std::uint64_t seed = 0) {
  const double observed = pearson(xs, ys);
  std::vector<double> permuted(ys.begin(), ys.end());
  SplitMix64 rng(seed);
  std::size_t at_least = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    for (std::size_t i = permuted.size(); i > 1; --i) {
      std::swap(permuted[i - 1], permuted[static_cast<std::size_t>(rng.below(i))]);
    }
    if (pearson(xs, permuted) >= observed) ++at_least;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(shuffles + 1);
}

}  // namespace locent
