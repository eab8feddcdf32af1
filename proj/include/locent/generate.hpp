// generate.hpp
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
// Random deterministic PFSA generation. Draws follow the reference
// listing line by line: the topology stream picks the initial state, the
// per-state symbol sets, then one target per (state, symbol) in row-major
// order; the weight stream draws one Exp(0.1) weight per (state, symbol)
// in the same order.
//
// Also hosts a few hand-shaped automata used by tests and experiments.

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "locent/error.hpp"
#include "locent/pfsa.hpp"
#include "locent/rng.hpp"

namespace locent {

inline constexpr double kDefaultMeanLength = 20.0;
inline constexpr double kArcWeightRate = 0.1;
inline constexpr double kArcWeightFloor = 0.001;

struct GenConfig {
  std::size_t num_states = 8;
  std::size_t alphabet_size = 32;
  double target_mean_length = kDefaultMeanLength;
  std::uint64_t topology_seed = 0;
  std::uint64_t weight_seed = 0;
  std::size_t min_symbols_per_state = 2;

  void check() const {
    if (num_states < 1) throw Error(errc::invalid_argument, "num_states must be at least 1");
    if (alphabet_size < 2) throw Error(errc::invalid_argument, "alphabet_size must be at least 2");
    if (!(target_mean_length > 0.0)) {
      throw Error(errc::invalid_argument, "target mean length must be positive");
    }
  }
};

using SymbolSets = std::vector<std::set<Symbol>>;

namespace detail {

template <class T>
std::vector<T> iota_vector(std::size_t n) {
  std::vector<T> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<T>(i);
  return v;
}

}  // namespace detail

// Per-state allowed outgoing symbols, drawing from `rng`.
inline SymbolSets generate_outgoing_symbols(const GenConfig& config, SplitMix64& rng) {
  config.check();
  const auto states = detail::iota_vector<std::size_t>(config.num_states);
  const auto symbols = detail::iota_vector<Symbol>(config.alphabet_size);
  SymbolSets sets(config.num_states);

  const std::size_t at_least = std::min(config.min_symbols_per_state, config.alphabet_size);
  for (std::size_t q = 0; q < config.num_states; ++q) {
    for (Symbol y : choice(rng, symbols, at_least)) sets[q].insert(y);
  }
  // Every symbol is emitted by at least one state.
  for (Symbol y : symbols) sets[choice_one(rng, states)].insert(y);

  const long half = static_cast<long>(config.alphabet_size / 2);
  const long upper = std::max<long>(1, half - static_cast<long>(config.min_symbols_per_state));
  std::uint64_t extra = 0;
  for (std::size_t q = 0; q < config.num_states; ++q) extra += rng.below(static_cast<std::uint64_t>(upper));
  for (std::uint64_t j = 0; j < extra; ++j) {
    const Symbol y = choice_one(rng, symbols);
    const std::size_t q = choice_one(rng, states);
    sets[q].insert(y);
  }
  return sets;
}

inline SymbolSets generate_outgoing_symbols(const GenConfig& config) {
  SplitMix64 rng(config.topology_seed);
  return generate_outgoing_symbols(config, rng);
}

// Random deterministic PFSA. Every (state, symbol) pair gets an arc with
// raw weight w * [symbol allowed] + 0.001, w ~ Exp(0.1); the halting weight
// is t / mu for raw row total t, so after normalization every state halts
// with probability exactly 1 / (mu + 1).
inline Pfsa random_dpfsa(const GenConfig& config) {
  config.check();
  SplitMix64 topo(config.topology_seed);
  SplitMix64 weights(config.weight_seed);
  const std::size_t n = config.num_states;
  const std::size_t k = config.alphabet_size;
  const auto states = detail::iota_vector<std::size_t>(n);

  const std::size_t start = choice_one(topo, states);
  std::vector<double> initial(n, 0.0);
  initial[start] = 1.0;

  const SymbolSets allowed = generate_outgoing_symbols(config, topo);

  std::vector<std::size_t> unused = states;  // kept ascending
  std::vector<Arc> arcs;
  arcs.reserve(n * k);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t y = 0; y < k; ++y) {
      std::size_t target;
      if (!unused.empty()) {
        const std::size_t idx = static_cast<std::size_t>(topo.below(unused.size()));
        target = unused[idx];
        unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(idx));
      } else {
        target = choice_one(topo, states);
      }
      const double w = weights.exponential(kArcWeightRate);
      const double indicator = allowed[q].count(static_cast<Symbol>(y)) ? 1.0 : 0.0;
      arcs.push_back({q, static_cast<Symbol>(y), w * indicator + kArcWeightFloor, target});
    }
  }

  std::vector<double> final(n, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    double t = 0.0;
    for (std::size_t y = 0; y < k; ++y) t += arcs[q * k + y].weight;
    final[q] = t / config.target_mean_length;
    const double s = t + final[q];
    for (std::size_t y = 0; y < k; ++y) arcs[q * k + y].weight /= s;
    final[q] /= s;
  }
  return Pfsa(k, n, std::move(arcs), std::move(initial), std::move(final));
}

// A ring of `alphabet_size` states where state i emits symbol i and moves
// to i+1 with probability `follow`; the remaining arc mass is spread evenly
// over the other symbols (each leading to the state that symbol names).
// Every state halts with probability 1 / (mean_length + 1); the start
// state is uniform. Next-symbol uncertainty is fully resolved by the
// previous symbol, which makes the language strongly local.
inline Pfsa cycle_pfsa(std::size_t alphabet_size, double follow, double mean_length) {
  if (alphabet_size < 2) throw Error(errc::invalid_argument, "cycle needs at least 2 symbols");
  if (!(follow > 0.0 && follow <= 1.0)) throw Error(errc::invalid_argument, "follow must be in (0,1]");
  const std::size_t n = alphabet_size;
  const double halt = 1.0 / (mean_length + 1.0);
  const double noise = (1.0 - follow) / static_cast<double>(n - 1);
  std::vector<Arc> arcs;
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t y = 0; y < n; ++y) {
      const double p = (y == (q + 1) % n) ? follow : noise;
      if (p > 0.0) arcs.push_back({q, static_cast<Symbol>(y), (1.0 - halt) * p, y});
    }
  }
  return Pfsa(n, n, std::move(arcs), std::vector<double>(n, 1.0 / static_cast<double>(n)),
              std::vector<double>(n, halt));
}

// Automaton whose language is the single string `y`, with probability 1.
inline Pfsa single_string_pfsa(const String& y, std::size_t alphabet_size) {
  const std::size_t n = y.size() + 1;
  std::vector<Arc> arcs;
  for (std::size_t t = 0; t < y.size(); ++t) arcs.push_back({t, y[t], 1.0, t + 1});
  std::vector<double> initial(n, 0.0), final(n, 0.0);
  initial[0] = 1.0;
  final[n - 1] = 1.0;
  return Pfsa(alphabet_size, n, std::move(arcs), std::move(initial), std::move(final));
}

}  // namespace locent
