// pfsa.hpp
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
// Probabilistic finite-state automata over the integer alphabet
// {0, ..., alphabet_size - 1}: representation, validation, and the
// versioned JSON exchange format.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "locent/error.hpp"

namespace locent {

using Symbol = std::uint32_t;
using String = std::vector<Symbol>;

inline constexpr double kNormalizationTolerance = 1e-9;
inline constexpr double kRenormalizeLimit = 1e-6;
inline constexpr int kPfsaFormatVersion = 1;

struct Arc {
  std::size_t source;
  Symbol symbol;
  double weight;
  std::size_t target;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Immutable after construction. The constructor only rejects structural
// defects (shape mismatches, indices out of range); normalization is
// checked separately by validate() so that violations can be reported as
// data.
class Pfsa {
 public:
  Pfsa(std::size_t alphabet_size, std::size_t num_states, std::vector<Arc> arcs,
       std::vector<double> initial, std::vector<double> final)
      : alphabet_size_(alphabet_size),
        num_states_(num_states),
        arcs_(std::move(arcs)),
        initial_(std::move(initial)),
        final_(std::move(final)) {
    if (alphabet_size_ == 0) throw Error(errc::invalid_automaton, "alphabet_size must be positive");
    if (num_states_ == 0) throw Error(errc::invalid_automaton, "num_states must be positive");
    if (initial_.size() != num_states_ || final_.size() != num_states_) {
      throw Error(errc::invalid_automaton, "initial/final vectors must have num_states entries");
    }
    std::set<std::pair<std::size_t, Symbol>> seen;
    deterministic_ = true;
    for (const Arc& a : arcs_) {
      if (a.source >= num_states_ || a.target >= num_states_) {
        throw Error(errc::invalid_automaton, "arc state index out of range");
      }
      if (a.symbol >= alphabet_size_) {
        throw Error(errc::invalid_automaton, "arc symbol out of range");
      }
      if (!seen.emplace(a.source, a.symbol).second) deterministic_ = false;
    }
  }

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t num_states() const { return num_states_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<double>& initial() const { return initial_; }
  const std::vector<double>& final_weights() const { return final_; }

  // True iff every (state, symbol) pair has at most one outgoing arc.
  bool deterministic() const { return deterministic_; }

  friend bool operator==(const Pfsa&, const Pfsa&) = default;

 private:
  std::size_t alphabet_size_;
  std::size_t num_states_;
  std::vector<Arc> arcs_;
  std::vector<double> initial_;
  std::vector<double> final_;
  bool deterministic_ = true;
};

enum class ViolationKind { initial_sum, state_sum, weight_range };

struct Violation {
  ViolationKind kind;
  // State index for state_sum and weight_range; 0 for initial_sum.
  std::size_t state;
  // Signed excess: observed sum minus 1, or the out-of-range weight.
  double magnitude;

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case ViolationKind::initial_sum:
        os << "initial weights sum to 1" << (magnitude >= 0 ? "+" : "") << magnitude;
        break;
      case ViolationKind::state_sum:
        os << "state " << state << ": outgoing + final sum to 1"
           << (magnitude >= 0 ? "+" : "") << magnitude;
        break;
      case ViolationKind::weight_range:
        os << "state " << state << ": weight " << magnitude << " outside [0,1]";
        break;
    }
    return os.str();
  }
};

inline std::vector<Violation> validate(const Pfsa& pfsa,
                                       double tolerance = kNormalizationTolerance) {
  std::vector<Violation> out;
  const std::size_t n = pfsa.num_states();
  auto out_of_range = [](double w) { return !(w >= 0.0 && w <= 1.0); };

  double init_sum = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double w = pfsa.initial()[q];
    if (out_of_range(w)) out.push_back({ViolationKind::weight_range, q, w});
    init_sum += w;
  }
  if (!(std::abs(init_sum - 1.0) <= tolerance)) {
    out.push_back({ViolationKind::initial_sum, 0, init_sum - 1.0});
  }

  std::vector<double> row(n, 0.0);
  for (const Arc& a : pfsa.arcs()) {
    if (out_of_range(a.weight)) out.push_back({ViolationKind::weight_range, a.source, a.weight});
    row[a.source] += a.weight;
  }
  for (std::size_t q = 0; q < n; ++q) {
    const double rho = pfsa.final_weights()[q];
    if (out_of_range(rho)) out.push_back({ViolationKind::weight_range, q, rho});
    const double total = row[q] + rho;
    if (!(std::abs(total - 1.0) <= tolerance)) {
      out.push_back({ViolationKind::state_sum, q, total - 1.0});
    }
  }
  return out;
}

// Rescales initial weights and each state's (outgoing, final) row to sum
// to one. Refuses inputs whose defects exceed `limit`, which would mean the
// data is wrong rather than rounded.
inline Pfsa renormalize(const Pfsa& pfsa, double limit = kRenormalizeLimit) {
  for (const Violation& v : validate(pfsa, limit)) {
    throw Error(errc::invalid_automaton, "cannot renormalize: " + v.describe());
  }
  const std::size_t n = pfsa.num_states();
  std::vector<double> init = pfsa.initial();
  double init_sum = 0.0;
  for (double w : init) init_sum += w;
  for (double& w : init) w /= init_sum;

  std::vector<double> row(pfsa.final_weights());
  for (const Arc& a : pfsa.arcs()) row[a.source] += a.weight;
  std::vector<Arc> arcs = pfsa.arcs();
  for (Arc& a : arcs) a.weight /= row[a.source];
  std::vector<double> fin = pfsa.final_weights();
  for (std::size_t q = 0; q < n; ++q) fin[q] /= row[q];
  return Pfsa(pfsa.alphabet_size(), n, std::move(arcs), std::move(init), std::move(fin));
}

inline nlohmann::json to_json(const Pfsa& pfsa) {
  nlohmann::json j;
  j["version"] = kPfsaFormatVersion;
  j["alphabet_size"] = pfsa.alphabet_size();
  j["num_states"] = pfsa.num_states();
  j["initial"] = pfsa.initial();
  j["final"] = pfsa.final_weights();
  nlohmann::json arcs = nlohmann::json::array();
  for (const Arc& a : pfsa.arcs()) {
    arcs.push_back(nlohmann::json::array({a.source, a.symbol, a.weight, a.target}));
  }
  j["transitions"] = std::move(arcs);
  return j;
}

// Parses the JSON exchange format without checking normalization.
inline Pfsa pfsa_from_json_unchecked(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kPfsaFormatVersion) {
      throw Error(errc::parse_error, "unsupported PFSA format version " + std::to_string(version));
    }
    std::vector<Arc> arcs;
    for (const auto& t : j.at("transitions")) {
      if (!t.is_array() || t.size() != 4) {
        throw Error(errc::parse_error, "transition must be [src, sym, weight, dst]");
      }
      arcs.push_back({t[0].get<std::size_t>(), t[1].get<Symbol>(), t[2].get<double>(),
                      t[3].get<std::size_t>()});
    }
    return Pfsa(j.at("alphabet_size").get<std::size_t>(), j.at("num_states").get<std::size_t>(),
                std::move(arcs), j.at("initial").get<std::vector<double>>(),
                j.at("final").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::parse_error, e.what());
  }
}

// Unless `allow_renormalize` is set the result must pass validate()
// exactly; with it, defects up to 1e-6 are rescaled away.
inline Pfsa pfsa_from_json(const nlohmann::json& j, bool allow_renormalize = false) {
  Pfsa pfsa = pfsa_from_json_unchecked(j);
  if (allow_renormalize) return renormalize(pfsa);
  const auto violations = validate(pfsa);
  if (!violations.empty()) {
    std::string msg = "automaton fails validation:";
    for (const auto& v : violations) msg += " [" + v.describe() + "]";
    throw Error(errc::invalid_automaton, msg);
  }
  return pfsa;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::parse_error, path + ": " + e.what());
  }
}

inline Pfsa load_pfsa(const std::string& path, bool allow_renormalize = false) {
  return pfsa_from_json(read_json_file(path), allow_renormalize);
}

inline void save_pfsa(const Pfsa& pfsa, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write " + path);
  out << to_json(pfsa).dump(1) << '\n';
}

// FNV-1a over a byte string, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Hash of the compact serialized form.
inline std::string fingerprint(const Pfsa& pfsa) { return fnv1a_hex(to_json(pfsa).dump()); }

}  // namespace locent
