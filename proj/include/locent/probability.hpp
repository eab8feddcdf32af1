// probability.hpp
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
//
// \file
// Closed-form string, prefix and infix quantities and the next-symbol
// distributions they induce.

#pragma once

#include <span>
#include <vector>

#include "locent/error.hpp"
#include "locent/matrices.hpp"

namespace locent {

// Distribution over the alphabet extended with EOS; EOS is the last slot.
struct NextSymbolDistribution {
  std::vector<double> probs;

  double eos() const { return probs.back(); }
  std::size_t alphabet_size() const { return probs.size() - 1; }
};

namespace detail {

inline RowVector advance(const TransitionMatrices& mats, RowVector v, std::span<const Symbol> y) {
  for (Symbol s : y) v = mats.step(v, s);
  return v;
}

// Turns a forward row vector u into (u E, u rho) / normalizer.
inline NextSymbolDistribution continuation(const TransitionMatrices& mats, const RowVector& u,
                                           double normalizer) {
  const RowVector emitted = u * mats.emission;
  NextSymbolDistribution d;
  d.probs.resize(mats.alphabet_size() + 1);
  for (std::size_t k = 0; k < mats.alphabet_size(); ++k) {
    d.probs[k] = emitted[static_cast<Eigen::Index>(k)] / normalizer;
  }
  d.probs.back() = u.dot(mats.final.transpose()) / normalizer;
  return d;
}

}  // namespace detail

// lambda^T M(y) rho.
inline double string_prob(const TransitionMatrices& mats, std::span<const Symbol> y) {
  mats.check_symbols(y);
  return detail::advance(mats, mats.initial, y).dot(mats.final.transpose());
}

// lambda^T M(y) K rho: probability that a sampled string begins with y.
inline double prefix_prob(const TransitionMatrices& mats, std::span<const Symbol> y) {
  mats.check_symbols(y);
  return detail::advance(mats, mats.initial, y).dot(mats.star_final.transpose());
}

// lambda^T K M(c) K rho: expected number of occurrences of c as a
// substring. Not a probability; infix_weight of the empty string is
// mean_length + 1.
inline double infix_weight(const TransitionMatrices& mats, std::span<const Symbol> c) {
  mats.check_symbols(c);
  return detail::advance(mats, mats.prefix_row, c).dot(mats.star_final.transpose());
}

inline NextSymbolDistribution next_symbol_given_prefix(const TransitionMatrices& mats,
                                                       std::span<const Symbol> y) {
  mats.check_symbols(y);
  const RowVector u = detail::advance(mats, mats.initial, y);
  const double mass = u.dot(mats.star_final.transpose());
  if (!(mass > 0.0)) throw Error(errc::zero_mass_prefix, "prefix has zero probability");
  return detail::continuation(mats, u, mass);
}

inline NextSymbolDistribution next_symbol_given_infix(const TransitionMatrices& mats,
                                                      std::span<const Symbol> c) {
  mats.check_symbols(c);
  const RowVector u = detail::advance(mats, mats.prefix_row, c);
  const double weight = u.dot(mats.star_final.transpose());
  if (!(weight > 0.0)) throw Error(errc::zero_mass_infix, "infix has zero weight");
  return detail::continuation(mats, u, weight);
}

}  // namespace locent
