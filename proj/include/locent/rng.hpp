// rng.hpp
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
// SplitMix64 streams plus the few draw primitives the generators need.
// Every draw consumes a fixed number of 64-bit outputs except below(),
// which rejects at most a vanishing fraction of outputs.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace locent {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

  // Inverse-CDF exponential draw with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Folds a key tuple into one seed; used to derive independent substreams
// (per string index, per permutation key) from a user seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) {
    SplitMix64 g(h ^ p);
    h = g() + 0x9e3779b97f4a7c15ULL * (p + 1);
    h = SplitMix64(h)();
  }
  return h;
}

// Selects k distinct elements uniformly from `pool` by a partial
// Fisher-Yates pass. The pool must already be in ascending order so that
// the draw sequence is independent of container iteration order.
template <class T>
std::vector<T> choice(SplitMix64& rng, std::vector<T> pool, std::size_t k) {
  if (k > pool.size()) k = pool.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

template <class T>
T choice_one(SplitMix64& rng, const std::vector<T>& pool) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

// Uniform random permutation of {0, ..., n-1}.
inline std::vector<std::size_t> random_permutation(SplitMix64& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace locent
