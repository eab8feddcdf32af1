// sampler.hpp
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
// Ancestral sampling from a PFSA, corpora with provenance metadata, and
// the line-oriented corpus file format.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "locent/error.hpp"
#include "locent/parallel.hpp"
#include "locent/pfsa.hpp"
#include "locent/rng.hpp"

namespace locent {

inline constexpr std::size_t kMaxSampleLength = 10000;

// Precomputed per-state cumulative tables; the halting outcome comes
// first, then arcs in input order.
class StringSampler {
 public:
  explicit StringSampler(const Pfsa& pfsa) : initial_cdf_(cumulative(pfsa.initial())) {
    const std::size_t n = pfsa.num_states();
    outcomes_.resize(n);
    cdf_.resize(n);
    std::vector<std::vector<double>> weights(n);
    for (std::size_t q = 0; q < n; ++q) {
      outcomes_[q].push_back({0, 0, true});
      weights[q].push_back(pfsa.final_weights()[q]);
    }
    for (const Arc& a : pfsa.arcs()) {
      outcomes_[a.source].push_back({a.symbol, a.target, false});
      weights[a.source].push_back(a.weight);
    }
    for (std::size_t q = 0; q < n; ++q) cdf_[q] = cumulative(weights[q]);
  }

  String sample(SplitMix64& rng, std::size_t max_length = kMaxSampleLength) const {
    String out;
    std::size_t state = pick(initial_cdf_, rng);
    for (;;) {
      const Outcome& o = outcomes_[state][pick(cdf_[state], rng)];
      if (o.halt) return out;
      if (out.size() >= max_length) {
        throw Error(errc::sample_length_cap_exceeded,
                    "sampled string exceeded " + std::to_string(max_length) + " symbols");
      }
      out.push_back(o.symbol);
      state = o.target;
    }
  }

 private:
  struct Outcome {
    Symbol symbol;
    std::size_t target;
    bool halt;
  };

  static std::vector<double> cumulative(const std::vector<double>& w) {
    std::vector<double> c(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) c[i] = (acc += w[i]);
    return c;
  }

  // Scales the draw by the row total so rows that are normalized only to
  // rounding precision still sample every outcome.
  static std::size_t pick(const std::vector<double>& cdf, SplitMix64& rng) {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    return std::min(i, cdf.size() - 1);
  }

  std::vector<double> initial_cdf_;
  std::vector<std::vector<Outcome>> outcomes_;
  std::vector<std::vector<double>> cdf_;
};

inline String sample_string(const Pfsa& pfsa, SplitMix64& rng) { return StringSampler(pfsa).sample(rng); }

struct CorpusMetadata {
  std::string source;
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::string split = "all";
  std::size_t alphabet_size = 0;
  // Description of the perturbation applied, empty for unperturbed data.
  nlohmann::json perturbation;
};

inline nlohmann::json to_json(const CorpusMetadata& m) {
  nlohmann::json j{{"source", m.source},
                   {"seed", m.seed},
                   {"fingerprint", m.fingerprint},
                   {"split", m.split},
                   {"alphabet_size", m.alphabet_size}};
  if (!m.perturbation.is_null()) j["perturbation"] = m.perturbation;
  return j;
}

inline CorpusMetadata metadata_from_json(const nlohmann::json& j) {
  CorpusMetadata m;
  m.source = j.value("source", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.fingerprint = j.value("fingerprint", "");
  m.split = j.value("split", "all");
  m.alphabet_size = j.value("alphabet_size", std::size_t{0});
  if (j.contains("perturbation")) m.perturbation = j["perturbation"];
  return m;
}

struct Corpus {
  std::vector<String> strings;
  CorpusMetadata metadata;

  std::size_t size() const { return strings.size(); }
};

// String i is drawn from its own substream keyed by (seed, i), so the
// corpus is identical for any thread count.
inline Corpus sample_corpus(const Pfsa& pfsa, std::size_t n, std::uint64_t seed, std::size_t threads = 1) {
  const StringSampler sampler(pfsa);
  Corpus c;
  c.strings.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    SplitMix64 rng(mix_seed({seed, static_cast<std::uint64_t>(i)}));
    c.strings[i] = sampler.sample(rng);
  });
  c.metadata.source = "pfsa";
  c.metadata.seed = seed;
  c.metadata.fingerprint = fingerprint(pfsa);
  c.metadata.alphabet_size = pfsa.alphabet_size();
  return c;
}

// Contiguous slices in generation order. Labels default to train / valid /
// test for three slices and split<i> otherwise.
inline std::vector<Corpus> split_corpus(const Corpus& corpus, const std::vector<std::size_t>& sizes,
                                        std::vector<std::string> labels = {}) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total > corpus.size()) {
    throw Error(errc::sizes_exceed_corpus, "split sizes sum to " + std::to_string(total) +
                                               " but corpus has " + std::to_string(corpus.size()));
  }
  if (labels.empty()) {
    if (sizes.size() == 3) {
      labels = {"train", "valid", "test"};
    } else {
      for (std::size_t i = 0; i < sizes.size(); ++i) labels.push_back("split" + std::to_string(i));
    }
  }
  std::vector<Corpus> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Corpus part;
    part.metadata = corpus.metadata;
    part.metadata.split = labels.at(i);
    part.strings.assign(corpus.strings.begin() + static_cast<std::ptrdiff_t>(offset),
                        corpus.strings.begin() + static_cast<std::ptrdiff_t>(offset + sizes[i]));
    offset += sizes[i];
    out.push_back(std::move(part));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus files: one string per line, tokens separated by single spaces,
// empty line = empty string. Metadata lives in "<path>.meta.json".

using TokenString = std::vector<std::string>;

inline std::string metadata_path(const std::string& corpus_path) { return corpus_path + ".meta.json"; }

inline std::vector<TokenString> read_token_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open " + path);
  std::vector<TokenString> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TokenString tokens;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    lines.push_back(std::move(tokens));
  }
  return lines;
}

template <class Token>
void write_lines(const std::string& path, const std::vector<std::vector<Token>>& lines) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write " + path);
  for (const auto& line : lines) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) out << ' ';
      out << line[i];
    }
    out << '\n';
  }
  if (!out) throw Error(errc::io_error, "write failed for " + path);
}

inline Symbol parse_symbol(const std::string& tok) {
  Symbol v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(errc::parse_error, "'" + tok + "' is not a nonnegative integer symbol");
  }
  return v;
}

inline void write_metadata(const std::string& corpus_path, const CorpusMetadata& meta) {
  std::ofstream out(metadata_path(corpus_path));
  if (!out) throw Error(errc::io_error, "cannot write " + metadata_path(corpus_path));
  out << to_json(meta).dump(1) << '\n';
}

inline void write_corpus(const std::string& path, const Corpus& corpus) {
  write_lines(path, corpus.strings);
  write_metadata(path, corpus.metadata);
}

// Reads an integer-symbol corpus. The sidecar is optional; without it the
// alphabet size is inferred as max symbol + 1.
inline Corpus read_corpus(const std::string& path) {
  Corpus c;
  Symbol max_symbol = 0;
  bool any = false;
  for (const TokenString& line : read_token_lines(path)) {
    String s;
    s.reserve(line.size());
    for (const std::string& tok : line) {
      s.push_back(parse_symbol(tok));
      max_symbol = std::max(max_symbol, s.back());
      any = true;
    }
    c.strings.push_back(std::move(s));
  }
  std::ifstream meta(metadata_path(path));
  if (meta) {
    try {
      nlohmann::json j;
      meta >> j;
      c.metadata = metadata_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(errc::parse_error, metadata_path(path) + ": " + e.what());
    }
  } else {
    c.metadata.source = path;
  }
  const std::size_t inferred = any ? static_cast<std::size_t>(max_symbol) + 1 : 0;
  if (c.metadata.alphabet_size < inferred) c.metadata.alphabet_size = inferred;
  return c;
}

}  // namespace locent
