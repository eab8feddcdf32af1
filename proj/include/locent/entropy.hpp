// entropy.hpp
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
// Exact entropies of a PFSA: mean length, next-symbol entropy, global
// entropy, and m-local entropy (expected next-symbol entropy given only
// the preceding m-1 symbols, contexts weighted by infix weight).
//
// All arithmetic is done in nats; EntropyReport converts on the way out.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locent/error.hpp"
#include "locent/matrices.hpp"
#include "locent/parallel.hpp"
#include "locent/pfsa.hpp"
#include "locent/probability.hpp"

namespace locent {

enum class LogBase { nats, bits };

inline double from_nats(double value, LogBase base) {
  return base == LogBase::bits ? value / std::numbers::ln2 : value;
}

inline double to_nats(double value, LogBase base) {
  return base == LogBase::bits ? value * std::numbers::ln2 : value;
}

inline std::string_view log_base_name(LogBase base) {
  return base == LogBase::bits ? "bits" : "nats";
}

inline LogBase parse_log_base(std::string_view s) {
  if (s == "bits" || s == "2") return LogBase::bits;
  if (s == "nats" || s == "e") return LogBase::nats;
  throw Error(errc::invalid_argument, "log base must be bits or nats, got '" + std::string(s) + "'");
}

struct EntropyReport {
  // Context order; context length is m - 1. Zero for quantities that
  // condition on the full prefix (next-symbol and global entropy).
  std::size_t m = 0;
  double value = 0.0;
  LogBase log_base = LogBase::nats;
  std::uint64_t contexts_evaluated = 0;
  std::uint64_t contexts_skipped_zero_mass = 0;
};

// -sum p log p over the nonzero entries of `unnormalized` after dividing by
// its total.
inline double entropy_of(std::span<const double> unnormalized) {
  double total = 0.0;
  for (double x : unnormalized) total += x;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double x : unnormalized) {
    if (x > 0.0) {
      const double p = x / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

// lambda^T K K rho - 1, using mean_length + 1 = expected number of prefixes.
inline double mean_length(const TransitionMatrices& mats) {
  return mats.prefix_row.dot(mats.star_final.transpose()) - 1.0;
}

namespace detail {

inline void require_deterministic(const Pfsa& pfsa) {
  if (!pfsa.deterministic()) {
    throw Error(errc::nondeterministic_unsupported,
                "exact next-symbol entropy needs a deterministic automaton");
  }
}

// Entropy in nats of the local distribution (outgoing weights, rho(q)) at
// every state.
inline std::vector<double> local_state_entropies(const Pfsa& pfsa) {
  std::vector<std::vector<double>> rows(pfsa.num_states());
  for (const Arc& a : pfsa.arcs()) rows[a.source].push_back(a.weight);
  std::vector<double> h(pfsa.num_states());
  for (std::size_t q = 0; q < pfsa.num_states(); ++q) {
    rows[q].push_back(pfsa.final_weights()[q]);
    h[q] = entropy_of(rows[q]);
  }
  return h;
}

inline double next_symbol_entropy_nats(const Pfsa& pfsa, const TransitionMatrices& mats) {
  require_deterministic(pfsa);
  const std::vector<double> local = local_state_entropies(pfsa);
  double weighted = 0.0;
  for (std::size_t q = 0; q < local.size(); ++q) {
    weighted += mats.prefix_row[static_cast<Eigen::Index>(q)] * local[q];
  }
  return weighted / (mean_length(mats) + 1.0);
}

}  // namespace detail

// Prefix-weighted average next-symbol entropy. For a deterministic
// automaton every prefix sits in one state, so the sum over prefixes
// groups by state: sum_q v_q H(q) / Z, with v = lambda^T K.
inline EntropyReport next_symbol_entropy(const Pfsa& pfsa, const TransitionMatrices& mats,
                                         LogBase base = LogBase::nats) {
  EntropyReport r;
  r.log_base = base;
  r.value = from_nats(detail::next_symbol_entropy_nats(pfsa, mats), base);
  return r;
}

// (mean_length + 1) x next-symbol entropy.
inline EntropyReport global_entropy(const Pfsa& pfsa, const TransitionMatrices& mats,
                                    LogBase base = LogBase::nats) {
  EntropyReport r;
  r.log_base = base;
  r.value = from_nats((mean_length(mats) + 1.0) * detail::next_symbol_entropy_nats(pfsa, mats), base);
  return r;
}

// Per-symbol cross-entropy of strings under the automaton itself, EOS counted.
inline double model_cross_entropy(const TransitionMatrices& mats, std::span<const String> strings,
                                  LogBase base = LogBase::nats) {
  double nll = 0.0;
  double symbols = 0.0;
  for (const auto& y : strings) {
    const double p = string_prob(mats, y);
    if (!(p > 0.0)) throw Error(errc::zero_probability_event, "string has zero probability under the automaton");
    nll -= std::log(p);
    symbols += static_cast<double>(y.size()) + 1.0;
  }
  if (symbols == 0.0) throw Error(errc::degenerate_input, "empty corpus");
  return from_nats(nll / symbols, base);
}

inline constexpr double kDefaultContextBudget = 1e8;

struct MLocalOptions {
  double context_budget = kDefaultContextBudget;
  std::size_t threads = 1;
  LogBase base = LogBase::nats;
};

namespace detail {

struct ContextSums {
  double weighted_entropy = 0.0;
  double weight = 0.0;
  std::uint64_t evaluated = 0;
  std::uint64_t skipped = 0;
};

// Depth-first walk over the context tree. Each node carries
// u = lambda^T K M(c) for its context c; children extend c by one symbol.
// Subtrees whose u vanishes are skipped and counted.
class ContextTreeWalker {
 public:
  ContextTreeWalker(const TransitionMatrices& mats, std::size_t context_length)
      : mats_(mats),
        n_(mats.num_states()),
        k_(mats.alphabet_size()),
        depth_(context_length),
        rows_(context_length + 1, std::vector<double>(n_)),
        emitted_(k_ + 1),
        leaves_below_(context_length + 1, 1) {
    for (std::size_t d = context_length; d-- > 0;) leaves_below_[d] = leaves_below_[d + 1] * k_;
    emission_.resize(n_ * k_);
    for (std::size_t q = 0; q < n_; ++q) {
      for (std::size_t y = 0; y < k_; ++y) {
        emission_[q * k_ + y] = mats.emission(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(y));
      }
    }
  }

  // Walks the subtree whose root (at `depth`) carries `u`.
  ContextSums walk(const std::vector<double>& u, std::size_t depth) {
    ContextSums sums;
    rows_[depth] = u;
    visit(depth, sums);
    return sums;
  }

  // Computes the child row of `parent` under symbol y; false if it is all
  // zero.
  bool child(const std::vector<double>& parent, Symbol y, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    bool any = false;
    for (const SymbolArc& a : mats_.arcs_by_symbol[y]) {
      const double v = parent[a.source] * a.weight;
      if (v != 0.0) {
        out[a.target] += v;
        any = true;
      }
    }
    return any;
  }

  std::uint64_t leaves_below(std::size_t depth) const { return leaves_below_[depth]; }

 private:
  void visit(std::size_t depth, ContextSums& sums) {
    if (depth == depth_) {
      leaf(rows_[depth], sums);
      return;
    }
    for (std::size_t y = 0; y < k_; ++y) {
      if (child(rows_[depth], static_cast<Symbol>(y), rows_[depth + 1])) {
        visit(depth + 1, sums);
      } else {
        sums.skipped += leaves_below_[depth + 1];
      }
    }
  }

  void leaf(const std::vector<double>& u, ContextSums& sums) {
    double weight = 0.0;
    for (std::size_t q = 0; q < n_; ++q) weight += u[q] * mats_.star_final[static_cast<Eigen::Index>(q)];
    if (!(weight > 0.0)) {
      ++sums.skipped;
      return;
    }
    std::fill(emitted_.begin(), emitted_.end(), 0.0);
    for (std::size_t q = 0; q < n_; ++q) {
      const double uq = u[q];
      if (uq == 0.0) continue;
      const double* row = &emission_[q * k_];
      for (std::size_t y = 0; y < k_; ++y) emitted_[y] += uq * row[y];
      emitted_[k_] += uq * mats_.final[static_cast<Eigen::Index>(q)];
    }
    sums.weighted_entropy += weight * entropy_of(emitted_);
    sums.weight += weight;
    ++sums.evaluated;
  }

  const TransitionMatrices& mats_;
  std::size_t n_;
  std::size_t k_;
  std::size_t depth_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> emitted_;
  std::vector<double> emission_;
  std::vector<std::uint64_t> leaves_below_;
};

}  // namespace detail

// Exact m-local entropy: sum_c w(c) H(next | c) / sum_c w(c) over
// c in alphabet^(m-1), w(c) the infix weight. m = 1 evaluates the single
// empty context, i.e. the infix-weighted next-symbol mixture.
//
// Cost is O(|alphabet|^(m-1) |Q| |alphabet|) after the closure solve. The
// first tree level is split across threads; partial sums are combined in
// symbol order, so the result does not depend on the thread count.
inline EntropyReport m_local_entropy(const Pfsa& pfsa, const TransitionMatrices& mats, std::size_t m,
                                     const MLocalOptions& options = {}) {
  if (pfsa.num_states() != mats.num_states() || pfsa.alphabet_size() != mats.alphabet_size()) {
    throw Error(errc::invalid_argument, "matrices were built from a different automaton");
  }
  if (m < 1) throw Error(errc::invalid_argument, "m must be at least 1");
  const std::size_t context_length = m - 1;
  const std::size_t k = mats.alphabet_size();
  const double contexts = std::pow(static_cast<double>(k), static_cast<double>(context_length));
  if (contexts > options.context_budget) {
    throw Error(errc::budget_exceeded, std::to_string(k) + "^" + std::to_string(context_length) +
                                           " contexts exceed the enumeration budget");
  }

  std::vector<double> root(mats.num_states());
  for (std::size_t q = 0; q < root.size(); ++q) root[q] = mats.prefix_row[static_cast<Eigen::Index>(q)];

  std::vector<detail::ContextSums> parts;
  if (context_length == 0) {
    detail::ContextTreeWalker walker(mats, 0);
    parts.push_back(walker.walk(root, 0));
  } else {
    parts.resize(k);
    parallel_for(k, options.threads, [&](std::size_t y) {
      detail::ContextTreeWalker walker(mats, context_length);
      std::vector<double> first(mats.num_states());
      if (walker.child(root, static_cast<Symbol>(y), first)) {
        parts[y] = walker.walk(first, 1);
      } else {
        parts[y].skipped = walker.leaves_below(1);
      }
    });
  }

  detail::ContextSums total;
  for (const auto& p : parts) {
    total.weighted_entropy += p.weighted_entropy;
    total.weight += p.weight;
    total.evaluated += p.evaluated;
    total.skipped += p.skipped;
  }
  if (!(total.weight > 0.0)) {
    throw Error(errc::zero_total_mass, "no context of length " + std::to_string(context_length) +
                                           " has positive infix weight");
  }
  EntropyReport r;
  r.m = m;
  r.log_base = options.base;
  r.value = from_nats(total.weighted_entropy / total.weight, options.base);
  r.contexts_evaluated = total.evaluated;
  r.contexts_skipped_zero_mass = total.skipped;
  return r;
}

}  // namespace locent
