// ngram.hpp
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
// Fixed-context n-gram counting, the plug-in m-local entropy estimator,
// smoothed conditional models and held-out next-symbol cross-entropy.
//
// "m" is always the context order: a model of order m conditions on the
// preceding m - 1 symbols. Targets range over the alphabet plus EOS.

#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "locent/entropy.hpp"
#include "locent/error.hpp"
#include "locent/parallel.hpp"
#include "locent/pfsa.hpp"

namespace locent {

// How many BOS fillers precede each string when counting.
enum class Padding {
  none,     // only genuine length-(m-1) contexts
  toolkit,  // m-2 fillers, the usual n-gram toolkit convention
  full,     // m-1 fillers, so every symbol is predicted
};

inline std::size_t padding_length(Padding p, std::size_t order) {
  switch (p) {
    case Padding::none: return 0;
    case Padding::toolkit: return order >= 2 ? order - 2 : 0;
    case Padding::full: return order - 1;
  }
  return 0;
}

inline std::string_view padding_name(Padding p) {
  switch (p) {
    case Padding::none: return "none";
    case Padding::toolkit: return "toolkit";
    case Padding::full: return "full";
  }
  return "?";
}

inline Padding parse_padding(std::string_view s) {
  if (s == "none") return Padding::none;
  if (s == "toolkit") return Padding::toolkit;
  if (s == "full") return Padding::full;
  throw Error(errc::invalid_argument, "unknown padding mode '" + std::string(s) + "'");
}

inline constexpr std::uint64_t kMaxDistinctContexts = std::uint64_t{1} << 31;

// Packs a context of symbols from {0..K-1, EOS=K, BOS=K+1} into one 64-bit
// key, `bits` per symbol, most recent symbol in the low bits.
class ContextCodec {
 public:
  ContextCodec(std::size_t alphabet_size, std::size_t context_length)
      : alphabet_size_(alphabet_size),
        context_length_(context_length),
        bits_(static_cast<std::size_t>(std::bit_width(alphabet_size + 1))) {
    if (bits_ * context_length_ > 64) {
      throw Error(errc::context_too_long, "context of " + std::to_string(context_length_) +
                                              " symbols over an alphabet of " +
                                              std::to_string(alphabet_size_) + " does not fit a 64-bit key");
    }
    mask_ = bits_ * context_length_ == 64 ? ~std::uint64_t{0}
                                          : (std::uint64_t{1} << (bits_ * context_length_)) - 1;
  }

  Symbol eos() const { return static_cast<Symbol>(alphabet_size_); }
  Symbol bos() const { return static_cast<Symbol>(alphabet_size_ + 1); }
  std::size_t context_length() const { return context_length_; }

  std::uint64_t push(std::uint64_t key, Symbol s) const {
    if (context_length_ == 0) return 0;
    return ((key << bits_) | s) & mask_;
  }

  std::uint64_t encode(std::span<const Symbol> context) const {
    std::uint64_t key = 0;
    for (Symbol s : context) key = push(key, s);
    return key;
  }

  std::vector<Symbol> decode(std::uint64_t key) const {
    std::vector<Symbol> out(context_length_);
    const std::uint64_t sym_mask = (std::uint64_t{1} << bits_) - 1;
    for (std::size_t i = context_length_; i-- > 0;) {
      out[i] = static_cast<Symbol>(key & sym_mask);
      key >>= bits_;
    }
    return out;
  }

  // Key of the all-BOS context.
  std::uint64_t all_bos() const {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < context_length_; ++i) key = push(key, bos());
    return key;
  }

 private:
  std::size_t alphabet_size_;
  std::size_t context_length_;
  std::size_t bits_;
  std::uint64_t mask_ = 0;
};

struct ContextRow {
  std::uint64_t total = 0;
  // (target, count), ascending by target once finalized.
  std::vector<std::pair<Symbol, std::uint64_t>> next;

  std::uint64_t count(Symbol y) const {
    for (const auto& [s, c] : next) {
      if (s == y) return c;
    }
    return 0;
  }
};

class NgramCounts {
 public:
  NgramCounts(std::size_t order, std::size_t alphabet_size, Padding padding = Padding::none)
      : order_(order), alphabet_size_(alphabet_size), padding_(padding), codec_(alphabet_size, order - 1) {
    if (order < 1) throw Error(errc::invalid_argument, "n-gram order must be at least 1");
  }

  std::size_t order() const { return order_; }
  std::size_t context_length() const { return order_ - 1; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  Padding padding() const { return padding_; }
  const ContextCodec& codec() const { return codec_; }
  std::uint64_t n_total() const { return n_total_; }
  std::size_t num_contexts() const { return table_.size(); }
  const std::unordered_map<std::uint64_t, ContextRow>& table() const { return table_; }

  const ContextRow* find(std::uint64_t context_key) const {
    const auto it = table_.find(context_key);
    return it == table_.end() ? nullptr : &it->second;
  }

  void add(std::uint64_t context_key, Symbol target, std::uint64_t n = 1) {
    ContextRow& row = table_[context_key];
    bool found = false;
    for (auto& [s, c] : row.next) {
      if (s == target) {
        c += n;
        found = true;
        break;
      }
    }
    if (!found) row.next.emplace_back(target, n);
    row.total += n;
    n_total_ += n;
    if (table_.size() > kMaxDistinctContexts) {
      throw Error(errc::budget_exceeded, "more than 2^31 distinct contexts");
    }
  }

  // Counts every (context, target) window of `y`.
  void add_string(std::span<const Symbol> y) {
    const std::size_t pad = padding_length(padding_, order_);
    const std::size_t ctx_len = context_length();
    std::uint64_t key = 0;
    std::size_t filled = 0;
    for (std::size_t i = 0; i < pad; ++i) {
      key = codec_.push(key, codec_.bos());
      ++filled;
    }
    for (std::size_t t = 0; t <= y.size(); ++t) {
      if (filled >= ctx_len) {
        add(key, t < y.size() ? y[t] : codec_.eos());
      }
      if (t < y.size()) {
        if (y[t] >= alphabet_size_) {
          throw Error(errc::symbol_out_of_range, "symbol " + std::to_string(y[t]) + " not below alphabet size " +
                                                     std::to_string(alphabet_size_));
        }
        key = codec_.push(key, y[t]);
        ++filled;
      }
    }
  }

  void merge(const NgramCounts& other) {
    for (const auto& [key, row] : other.table_) {
      for (const auto& [s, c] : row.next) add(key, s, c);
    }
  }

  // Sorts each row by target so every traversal is order-stable.
  void finalize() {
    for (auto& [key, row] : table_) std::sort(row.next.begin(), row.next.end());
  }

  std::vector<std::uint64_t> sorted_keys() const {
    std::vector<std::uint64_t> keys;
    keys.reserve(table_.size());
    for (const auto& kv : table_) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    return keys;
  }

 private:
  std::size_t order_;
  std::size_t alphabet_size_;
  Padding padding_;
  ContextCodec codec_;
  std::unordered_map<std::uint64_t, ContextRow> table_;
  std::uint64_t n_total_ = 0;
};

// Counts all windows of a corpus. Shards are counted independently and
// merged; the finalized table does not depend on `threads`.
inline NgramCounts count_corpus(std::span<const String> strings, std::size_t order, std::size_t alphabet_size,
                                Padding padding = Padding::none, std::size_t threads = 1) {
  threads = std::max<std::size_t>(1, std::min(resolve_threads(threads), strings.size()));
  NgramCounts counts(order, alphabet_size, padding);
  if (threads <= 1) {
    for (const String& y : strings) counts.add_string(y);
  } else {
    std::vector<NgramCounts> shards(threads, NgramCounts(order, alphabet_size, padding));
    const std::size_t chunk = (strings.size() + threads - 1) / threads;
    parallel_for(threads, threads, [&](std::size_t s) {
      const std::size_t lo = s * chunk;
      const std::size_t hi = std::min(strings.size(), lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) shards[s].add_string(strings[i]);
    });
    for (const auto& shard : shards) counts.merge(shard);
  }
  counts.finalize();
  return counts;
}

inline double plugin_entropy_nats(const NgramCounts& counts) {
  if (counts.n_total() == 0) throw Error(errc::empty_corpus_windows, "corpus has no countable windows");
  double sum = 0.0;
  for (std::uint64_t key : counts.sorted_keys()) {
    const ContextRow& row = *counts.find(key);
    const double total = static_cast<double>(row.total);
    for (const auto& [s, c] : row.next) {
      const double n = static_cast<double>(c);
      sum -= n * std::log(n / total);
    }
  }
  return sum / static_cast<double>(counts.n_total());
}

// Average in-sample m-gram surprisal under the empirical conditional
// distribution of the same corpus.
inline EntropyReport plugin_m_local_entropy(std::span<const String> strings, std::size_t m,
                                            std::size_t alphabet_size, LogBase base = LogBase::nats,
                                            Padding padding = Padding::none, std::size_t threads = 1) {
  const NgramCounts counts = count_corpus(strings, m, alphabet_size, padding, threads);
  EntropyReport r;
  r.m = m;
  r.log_base = base;
  r.value = from_nats(plugin_entropy_nats(counts), base);
  r.contexts_evaluated = counts.num_contexts();
  if (padding == Padding::none) {
    const double all = std::pow(static_cast<double>(alphabet_size), static_cast<double>(m - 1));
    r.contexts_skipped_zero_mass = static_cast<std::uint64_t>(all) - r.contexts_evaluated;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Smoothed conditional models.

enum class SmoothingKind { mle, add_k, absolute_discounting };

struct SmoothingPolicy {
  SmoothingKind kind = SmoothingKind::absolute_discounting;
  double param = 0.75;

  std::string to_string() const {
    char buf[64];
    switch (kind) {
      case SmoothingKind::mle: return "mle";
      case SmoothingKind::add_k: std::snprintf(buf, sizeof buf, "addk:%.17g", param); return buf;
      case SmoothingKind::absolute_discounting:
        std::snprintf(buf, sizeof buf, "absdisc:%.17g", param);
        return buf;
    }
    return "?";
  }
};

// Parses "mle", "addk:K" or "absdisc:D".
inline SmoothingPolicy parse_smoothing(std::string_view s) {
  SmoothingPolicy p;
  const auto colon = s.find(':');
  const std::string_view name = s.substr(0, colon);
  double value = 0.0;
  bool has_value = false;
  if (colon != std::string_view::npos) {
    const std::string arg(s.substr(colon + 1));
    try {
      std::size_t used = 0;
      value = std::stod(arg, &used);
      has_value = used == arg.size();
    } catch (...) {
    }
    if (!has_value) throw Error(errc::invalid_argument, "bad smoothing parameter in '" + std::string(s) + "'");
  }
  if (name == "mle") {
    p.kind = SmoothingKind::mle;
    p.param = 0.0;
  } else if (name == "addk") {
    p.kind = SmoothingKind::add_k;
    p.param = has_value ? value : 1.0;
    if (!(p.param > 0.0)) throw Error(errc::invalid_argument, "add-k needs k > 0");
  } else if (name == "absdisc") {
    p.kind = SmoothingKind::absolute_discounting;
    p.param = has_value ? value : 0.75;
    if (!(p.param > 0.0 && p.param <= 1.0)) throw Error(errc::invalid_argument, "discount must be in (0, 1]");
  } else {
    throw Error(errc::invalid_argument, "unknown smoothing '" + std::string(s) + "'");
  }
  return p;
}

inline constexpr int kModelFormatVersion = 1;

// p(y | c) over the alphabet plus EOS. Add-k and absolute discounting
// interpolate with the uniform distribution over K + 1 outcomes and fall
// back to it entirely for unseen contexts.
class SmoothedModel {
 public:
  SmoothedModel(NgramCounts counts, SmoothingPolicy policy) : counts_(std::move(counts)), policy_(policy) {}

  const NgramCounts& counts() const { return counts_; }
  const SmoothingPolicy& policy() const { return policy_; }
  std::size_t order() const { return counts_.order(); }
  std::size_t alphabet_size() const { return counts_.alphabet_size(); }

  double prob(std::uint64_t context_key, Symbol target) const {
    const double outcomes = static_cast<double>(alphabet_size() + 1);
    const ContextRow* row = counts_.find(context_key);
    if (row == nullptr || row->total == 0) {
      return policy_.kind == SmoothingKind::mle ? 0.0 : 1.0 / outcomes;
    }
    const double n = static_cast<double>(row->count(target));
    const double total = static_cast<double>(row->total);
    switch (policy_.kind) {
      case SmoothingKind::mle: return n / total;
      case SmoothingKind::add_k: return (n + policy_.param) / (total + policy_.param * outcomes);
      case SmoothingKind::absolute_discounting: {
        const double d = policy_.param;
        const double types = static_cast<double>(row->next.size());
        return std::max(n - d, 0.0) / total + (d * types / total) / outcomes;
      }
    }
    return 0.0;
  }

  double prob(std::span<const Symbol> context, Symbol target) const {
    return prob(counts_.codec().encode(context), target);
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint64_t key : counts_.sorted_keys()) {
      const std::vector<Symbol> ctx = counts_.codec().decode(key);
      for (const auto& [s, c] : counts_.find(key)->next) rows.push_back({ctx, s, c});
    }
    return {{"version", kModelFormatVersion},
            {"format", "locent-ngram"},
            {"order", counts_.order()},
            {"alphabet_size", counts_.alphabet_size()},
            {"padding", padding_name(counts_.padding())},
            {"smoothing", policy_.to_string()},
            {"counts", std::move(rows)}};
  }

  static SmoothedModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("version").get<int>() != kModelFormatVersion || j.at("format") != "locent-ngram") {
        throw Error(errc::parse_error, "not a version-1 locent n-gram model");
      }
      NgramCounts counts(j.at("order").get<std::size_t>(), j.at("alphabet_size").get<std::size_t>(),
                         parse_padding(j.at("padding").get<std::string>()));
      for (const auto& r : j.at("counts")) {
        const auto ctx = r.at(0).get<std::vector<Symbol>>();
        if (ctx.size() != counts.context_length()) throw Error(errc::parse_error, "context length mismatch");
        counts.add(counts.codec().encode(ctx), r.at(1).get<Symbol>(), r.at(2).get<std::uint64_t>());
      }
      counts.finalize();
      return SmoothedModel(std::move(counts), parse_smoothing(j.at("smoothing").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(errc::parse_error, e.what());
    }
  }

 private:
  NgramCounts counts_;
  SmoothingPolicy policy_;
};

inline SmoothedModel train_model(std::span<const String> strings, std::size_t order, std::size_t alphabet_size,
                                 SmoothingPolicy policy, Padding padding = Padding::full,
                                 std::size_t threads = 1) {
  return SmoothedModel(count_corpus(strings, order, alphabet_size, padding, threads), policy);
}

inline void save_model(const SmoothedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write " + path);
  out << model.to_json().dump() << '\n';
}

inline SmoothedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::parse_error, path + ": " + e.what());
  }
  return SmoothedModel::from_json(j);
}

// Per-symbol cross-entropy of held-out strings, EOS included:
// -(1/S) sum log p(y_t | previous m-1 symbols), S = sum (|y| + 1).
// Contexts reaching before the string start are filled with BOS, so every
// symbol is scored.
inline double heldout_cross_entropy(const SmoothedModel& model, std::span<const String> strings,
                                    LogBase base = LogBase::nats) {
  if (model.policy().kind == SmoothingKind::mle) {
    throw Error(errc::invalid_argument, "held-out scoring needs a smoothed model, not plug-in MLE");
  }
  const ContextCodec& codec = model.counts().codec();
  double log_sum = 0.0;
  std::uint64_t scored = 0;
  for (const String& y : strings) {
    std::uint64_t key = codec.all_bos();
    for (std::size_t t = 0; t <= y.size(); ++t) {
      const Symbol target = t < y.size() ? y[t] : codec.eos();
      if (t < y.size() && target >= model.alphabet_size()) {
        throw Error(errc::symbol_out_of_range, "symbol " + std::to_string(target) + " outside model alphabet");
      }
      const double p = model.prob(key, target);
      if (!(p > 0.0)) throw Error(errc::zero_probability_event, "smoothed model assigned zero probability");
      log_sum += std::log(p);
      ++scored;
      if (t < y.size()) key = codec.push(key, target);
    }
  }
  if (scored == 0) throw Error(errc::empty_corpus_windows, "nothing to score");
  return from_nats(-log_sum / static_cast<double>(scored), base);
}

// Learner cross-entropy minus the generator's exact next-symbol entropy,
// both in the same base. Sampling noise may make this slightly negative.
inline double kl_estimate(double heldout_ce, double exact_next_symbol_entropy) {
  return heldout_ce - exact_next_symbol_entropy;
}

}  // namespace locent
