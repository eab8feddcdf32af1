// perturb.hpp
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
// Length-preserving bijections on token sequences: reverse, even/odd
// interleavings, a per-length deterministic shuffle and a windowed
// (k-local) deterministic shuffle, each with its inverse.
//
// Position permutations are stored 0-based: output[t] = input[perm[t]].

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "locent/error.hpp"
#include "locent/rng.hpp"
#include "locent/sampler.hpp"

namespace locent {

enum class Family { reverse, deterministic_shuffle, even_odd, odd_even, k_local };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::reverse: return "reverse";
    case Family::deterministic_shuffle: return "detshuffle";
    case Family::even_odd: return "evenodd";
    case Family::odd_even: return "oddeven";
    case Family::k_local: return "klocal";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::reverse, Family::deterministic_shuffle, Family::even_odd, Family::odd_even,
                   Family::k_local}) {
    if (family_name(f) == s) return f;
  }
  throw Error(errc::invalid_argument, "unknown perturbation family '" + std::string(s) + "'");
}

using Permutation = std::vector<std::size_t>;

// Lazily sampled permutations. A key is sampled once per cache and then
// reused; the stream for each key is derived from (family, seed, key), so
// two caches with the same seed hold identical tables.
class PermutationCache {
 public:
  PermutationCache(Family kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}

  Family kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  // sigma_T for deterministic_shuffle.
  const Permutation& for_length(std::size_t length) { return lookup({0, 0, length}); }

  // pi for window `index` (1-based) of a k-local shuffle; `length` is k
  // for full windows and the remainder for a trailing partial window.
  const Permutation& for_window(std::size_t k, std::size_t index, std::size_t length) {
    return lookup({k, index, length});
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return table_.size();
  }

 private:
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;

  const Permutation& lookup(const Key& key) {
    {
      std::shared_lock lock(mu_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const auto [k, index, length] = key;
    SplitMix64 rng(mix_seed({static_cast<std::uint64_t>(kind_) + 1, seed_, k, index, length}));
    Permutation perm = random_permutation(rng, length);
    std::unique_lock lock(mu_);
    return table_.emplace(key, std::move(perm)).first->second;
  }

  Family kind_;
  std::uint64_t seed_;
  mutable std::shared_mutex mu_;
  std::map<Key, Permutation> table_;
};

namespace detail {

template <class T>
std::vector<T> gather(std::span<const T> y, const Permutation& perm) {
  std::vector<T> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) out[t] = y[perm[t]];
  return out;
}

template <class T>
std::vector<T> scatter(std::span<const T> y, const Permutation& perm) {
  std::vector<T> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) out[perm[t]] = y[t];
  return out;
}

// Positions of y_2 y_4 ... then y_1 y_3 ... (1-based), or the other order.
inline Permutation parity_permutation(std::size_t length, bool even_first) {
  Permutation perm;
  perm.reserve(length);
  const std::size_t first = even_first ? 1 : 0;
  for (std::size_t t = first; t < length; t += 2) perm.push_back(t);
  for (std::size_t t = 1 - first; t < length; t += 2) perm.push_back(t);
  return perm;
}

inline void check_window(std::size_t k) {
  if (k < 2) throw Error(errc::invalid_window_size, "window size must be at least 2");
}

}  // namespace detail

template <class T>
std::vector<T> reverse(std::span<const T> y) {
  return std::vector<T>(y.rbegin(), y.rend());
}

template <class T>
std::vector<T> even_odd_shuffle(std::span<const T> y) {
  return detail::gather(y, detail::parity_permutation(y.size(), true));
}

template <class T>
std::vector<T> odd_even_shuffle(std::span<const T> y) {
  return detail::gather(y, detail::parity_permutation(y.size(), false));
}

template <class T>
std::vector<T> deterministic_shuffle(std::span<const T> y, PermutationCache& cache) {
  return detail::gather(y, cache.for_length(y.size()));
}

template <class T>
std::vector<T> k_local_shuffle(std::span<const T> y, std::size_t k, PermutationCache& cache) {
  detail::check_window(k);
  std::vector<T> out(y.size());
  for (std::size_t start = 0, index = 1; start < y.size(); start += k, ++index) {
    const std::size_t len = std::min(k, y.size() - start);
    const Permutation& perm = cache.for_window(k, index, len);
    for (std::size_t t = 0; t < len; ++t) out[start + t] = y[start + perm[t]];
  }
  return out;
}

template <class T>
std::vector<T> k_local_unshuffle(std::span<const T> y, std::size_t k, PermutationCache& cache) {
  detail::check_window(k);
  std::vector<T> out(y.size());
  for (std::size_t start = 0, index = 1; start < y.size(); start += k, ++index) {
    const std::size_t len = std::min(k, y.size() - start);
    const Permutation& perm = cache.for_window(k, index, len);
    for (std::size_t t = 0; t < len; ++t) out[start + perm[t]] = y[start + t];
  }
  return out;
}

struct PerturbSpec {
  Family family = Family::reverse;
  std::uint64_t seed = 0;
  // Window size, used by k_local only.
  std::size_t k = 0;
};

inline nlohmann::json to_json(const PerturbSpec& spec) {
  nlohmann::json j{{"family", family_name(spec.family)}, {"seed", spec.seed}};
  if (spec.family == Family::k_local) j["k"] = spec.k;
  return j;
}

// A configured perturbation with its own permutation cache. apply() and
// invert() are safe to call concurrently.
class Perturbation {
 public:
  explicit Perturbation(PerturbSpec spec) : spec_(spec), cache_(spec.family, spec.seed) {
    if (spec_.family == Family::k_local) detail::check_window(spec_.k);
  }

  const PerturbSpec& spec() const { return spec_; }
  PermutationCache& cache() { return cache_; }

  template <class T>
  std::vector<T> apply(std::span<const T> y) {
    switch (spec_.family) {
      case Family::reverse: return reverse(y);
      case Family::even_odd: return even_odd_shuffle(y);
      case Family::odd_even: return odd_even_shuffle(y);
      case Family::deterministic_shuffle: return deterministic_shuffle(y, cache_);
      case Family::k_local: return k_local_shuffle(y, spec_.k, cache_);
    }
    return {};
  }

  template <class T>
  std::vector<T> invert(std::span<const T> y) {
    switch (spec_.family) {
      case Family::reverse: return reverse(y);
      case Family::even_odd: return detail::scatter(y, detail::parity_permutation(y.size(), true));
      case Family::odd_even: return detail::scatter(y, detail::parity_permutation(y.size(), false));
      case Family::deterministic_shuffle: return detail::scatter(y, cache_.for_length(y.size()));
      case Family::k_local: return k_local_unshuffle(y, spec_.k, cache_);
    }
    return {};
  }

  template <class T>
  std::vector<std::vector<T>> apply_all(const std::vector<std::vector<T>>& lines) {
    std::vector<std::vector<T>> out;
    out.reserve(lines.size());
    for (const auto& line : lines) out.push_back(apply(std::span<const T>(line)));
    return out;
  }

 private:
  PerturbSpec spec_;
  PermutationCache cache_;
};

// Applies the perturbation string by string, preserving order; the spec
// is recorded in the metadata.
inline Corpus perturb_corpus(const Corpus& corpus, const PerturbSpec& spec) {
  Perturbation p(spec);
  Corpus out;
  out.strings = p.apply_all(corpus.strings);
  out.metadata = corpus.metadata;
  out.metadata.perturbation = to_json(spec);
  return out;
}

}  // namespace locent
