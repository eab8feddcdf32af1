// experiment.hpp
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
// Estimator validation (exact vs. plug-in m-local entropy over a family of
// generated automata) and the learner grid relating exact m-local entropy
// to held-out learner KL. Both write CSV; `summarize` reads it back.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locent/csv.hpp"
#include "locent/entropy.hpp"
#include "locent/generate.hpp"
#include "locent/matrices.hpp"
#include "locent/ngram.hpp"
#include "locent/parallel.hpp"
#include "locent/sampler.hpp"
#include "locent/stats.hpp"

namespace locent {

inline constexpr const char* kTable1Schema = "locent-table1 v1";
inline constexpr const char* kTable1DetailSchema = "locent-table1-detail v1";
inline constexpr const char* kRecordsSchema = "locent-records v1";

namespace detail {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Estimator validation.

struct Table1Protocol {
  std::vector<std::size_t> num_states{8, 16};
  std::vector<std::size_t> alphabet_sizes{32, 48};
  std::vector<std::uint64_t> topology_seeds{1, 2};
  std::vector<std::uint64_t> weight_seeds{101, 102};
  double mean_length = kDefaultMeanLength;
  // Smaller corpora are prefixes of the largest one.
  std::vector<std::size_t> corpus_sizes{50000, 200000};
  std::vector<std::size_t> orders{2, 3, 4, 5};
  std::uint64_t sample_seed = 7;
  Padding padding = Padding::none;
  LogBase base = LogBase::nats;
  std::size_t threads = 1;

  nlohmann::json to_json() const {
    return {{"num_states", num_states},       {"alphabet_sizes", alphabet_sizes},
            {"topology_seeds", topology_seeds}, {"weight_seeds", weight_seeds},
            {"mean_length", mean_length},     {"corpus_sizes", corpus_sizes},
            {"orders", orders},               {"sample_seed", sample_seed},
            {"padding", padding_name(padding)}, {"base", log_base_name(base)}};
  }

  static Table1Protocol from_json(const nlohmann::json& j) {
    Table1Protocol p;
    try {
      detail::read_if(j, "num_states", p.num_states);
      detail::read_if(j, "alphabet_sizes", p.alphabet_sizes);
      detail::read_if(j, "topology_seeds", p.topology_seeds);
      detail::read_if(j, "weight_seeds", p.weight_seeds);
      detail::read_if(j, "mean_length", p.mean_length);
      detail::read_if(j, "corpus_sizes", p.corpus_sizes);
      detail::read_if(j, "orders", p.orders);
      detail::read_if(j, "sample_seed", p.sample_seed);
      if (j.contains("padding")) p.padding = parse_padding(j.at("padding").get<std::string>());
      if (j.contains("base")) p.base = parse_log_base(j.at("base").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(errc::parse_error, std::string("table1 protocol: ") + e.what());
    }
    return p;
  }
};

struct Table1Estimate {
  std::string fingerprint;
  std::size_t num_states = 0;
  std::size_t alphabet_size = 0;
  std::uint64_t topology_seed = 0;
  std::uint64_t weight_seed = 0;
  std::size_t m = 0;
  std::size_t corpus_size = 0;
  double exact = 0.0;
  double estimated = 0.0;
};

struct Table1Cell {
  std::size_t m = 0;
  std::size_t corpus_size = 0;
  std::size_t automata = 0;
  double mae = 0.0, mae_sd = 0.0;
  // Relative errors are fractions, not percentages.
  double mre = 0.0, mre_sd = 0.0;
};

struct Table1Result {
  std::vector<Table1Estimate> estimates;
  std::vector<Table1Cell> cells;

  const Table1Cell& cell(std::size_t m, std::size_t corpus_size) const {
    for (const auto& c : cells) {
      if (c.m == m && c.corpus_size == corpus_size) return c;
    }
    throw Error(errc::invalid_argument, "no such table cell");
  }
};

inline Table1Result run_table1(const Table1Protocol& protocol) {
  if (protocol.corpus_sizes.empty() || protocol.orders.empty()) {
    throw Error(errc::invalid_argument, "table1 needs corpus sizes and orders");
  }
  std::vector<GenConfig> configs;
  for (std::size_t q : protocol.num_states) {
    for (std::size_t k : protocol.alphabet_sizes) {
      for (std::uint64_t t : protocol.topology_seeds) {
        for (std::uint64_t w : protocol.weight_seeds) {
          GenConfig c;
          c.num_states = q;
          c.alphabet_size = k;
          c.target_mean_length = protocol.mean_length;
          c.topology_seed = t;
          c.weight_seed = w;
          configs.push_back(c);
        }
      }
    }
  }
  const std::size_t largest = *std::max_element(protocol.corpus_sizes.begin(), protocol.corpus_sizes.end());
  const std::size_t per_automaton = protocol.orders.size() * protocol.corpus_sizes.size();
  std::vector<Table1Estimate> estimates(configs.size() * per_automaton);

  parallel_for(configs.size(), protocol.threads, [&](std::size_t a) {
    const GenConfig& c = configs[a];
    const Pfsa pfsa = random_dpfsa(c);
    const TransitionMatrices mats = build_matrices(pfsa);
    const Corpus corpus = sample_corpus(pfsa, largest, mix_seed({protocol.sample_seed, a}));
    const std::string fp = fingerprint(pfsa);
    std::size_t slot = a * per_automaton;
    for (std::size_t m : protocol.orders) {
      MLocalOptions opts;
      opts.base = protocol.base;
      const double exact = m_local_entropy(pfsa, mats, m, opts).value;
      for (std::size_t n : protocol.corpus_sizes) {
        const std::span<const String> prefix(corpus.strings.data(), n);
        Table1Estimate& e = estimates[slot++];
        e.fingerprint = fp;
        e.num_states = c.num_states;
        e.alphabet_size = c.alphabet_size;
        e.topology_seed = c.topology_seed;
        e.weight_seed = c.weight_seed;
        e.m = m;
        e.corpus_size = n;
        e.exact = exact;
        e.estimated = plugin_m_local_entropy(prefix, m, c.alphabet_size, protocol.base, protocol.padding).value;
      }
    }
  });

  Table1Result result;
  result.estimates = std::move(estimates);
  for (std::size_t m : protocol.orders) {
    for (std::size_t n : protocol.corpus_sizes) {
      std::vector<double> abs_err, rel_err;
      for (const auto& e : result.estimates) {
        if (e.m != m || e.corpus_size != n) continue;
        abs_err.push_back(std::abs(e.estimated - e.exact));
        rel_err.push_back(std::abs(e.estimated - e.exact) / e.exact);
      }
      Table1Cell cell;
      cell.m = m;
      cell.corpus_size = n;
      cell.automata = abs_err.size();
      cell.mae = detail::mean_of(abs_err);
      cell.mae_sd = detail::sd_of(abs_err);
      cell.mre = detail::mean_of(rel_err);
      cell.mre_sd = detail::sd_of(rel_err);
      result.cells.push_back(cell);
    }
  }
  return result;
}

inline CsvTable table1_csv(const Table1Result& r) {
  CsvTable t;
  t.schema = kTable1Schema;
  t.header = {"m", "corpus_size", "automata", "mae", "mae_sd", "mre", "mre_sd"};
  for (const auto& c : r.cells) {
    t.rows.push_back({std::to_string(c.m), std::to_string(c.corpus_size), std::to_string(c.automata),
                      format_real(c.mae), format_real(c.mae_sd), format_real(c.mre), format_real(c.mre_sd)});
  }
  return t;
}

inline CsvTable table1_detail_csv(const Table1Result& r) {
  CsvTable t;
  t.schema = kTable1DetailSchema;
  t.header = {"fingerprint", "num_states", "alphabet_size", "topology_seed", "weight_seed",
              "m",           "corpus_size", "exact",        "estimated"};
  for (const auto& e : r.estimates) {
    t.rows.push_back({e.fingerprint, std::to_string(e.num_states), std::to_string(e.alphabet_size),
                      std::to_string(e.topology_seed), std::to_string(e.weight_seed), std::to_string(e.m),
                      std::to_string(e.corpus_size), format_real(e.exact), format_real(e.estimated)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Learner grid.

struct GridCell {
  std::size_t num_states = 16;
  std::size_t alphabet_size = 32;

  std::string label() const { return std::to_string(num_states) + "x" + std::to_string(alphabet_size); }
};

struct GridProtocol {
  std::vector<GridCell> cells{{16, 32}};
  std::size_t topologies = 5;
  std::size_t weightings = 5;
  std::uint64_t seed = 0;
  double mean_length = kDefaultMeanLength;
  std::size_t train_size = 20000;
  std::size_t valid_size = 5000;
  std::size_t test_size = 5000;
  // Candidate learner orders; the one with the lowest validation
  // cross-entropy is scored on test.
  std::vector<std::size_t> learner_orders{2, 3, 4};
  SmoothingPolicy smoothing{};
  std::vector<std::size_t> m_values{2, 3, 4, 5};
  bool estimate_mlocal = true;
  LogBase base = LogBase::nats;
  double context_budget = kDefaultContextBudget;
  std::size_t threads = 1;

  nlohmann::json to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cells) cs.push_back({c.num_states, c.alphabet_size});
    return {{"cells", cs},
            {"topologies", topologies},
            {"weightings", weightings},
            {"seed", seed},
            {"mean_length", mean_length},
            {"train_size", train_size},
            {"valid_size", valid_size},
            {"test_size", test_size},
            {"learner_orders", learner_orders},
            {"smoothing", smoothing.to_string()},
            {"m_values", m_values},
            {"estimate_mlocal", estimate_mlocal},
            {"base", log_base_name(base)},
            {"context_budget", context_budget}};
  }

  static GridProtocol from_json(const nlohmann::json& j) {
    GridProtocol p;
    try {
      if (j.contains("cells")) {
        p.cells.clear();
        for (const auto& c : j.at("cells")) {
          if (c.is_object()) {
            p.cells.push_back({c.at("num_states").get<std::size_t>(), c.at("alphabet_size").get<std::size_t>()});
          } else {
            p.cells.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
          }
        }
      }
      detail::read_if(j, "topologies", p.topologies);
      detail::read_if(j, "weightings", p.weightings);
      detail::read_if(j, "seed", p.seed);
      detail::read_if(j, "mean_length", p.mean_length);
      detail::read_if(j, "train_size", p.train_size);
      detail::read_if(j, "valid_size", p.valid_size);
      detail::read_if(j, "test_size", p.test_size);
      detail::read_if(j, "learner_orders", p.learner_orders);
      if (j.contains("smoothing")) p.smoothing = parse_smoothing(j.at("smoothing").get<std::string>());
      detail::read_if(j, "m_values", p.m_values);
      detail::read_if(j, "estimate_mlocal", p.estimate_mlocal);
      if (j.contains("base")) p.base = parse_log_base(j.at("base").get<std::string>());
      detail::read_if(j, "context_budget", p.context_budget);
    } catch (const nlohmann::json::exception& e) {
      throw Error(errc::parse_error, std::string("grid protocol: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::vector<std::string> keys = {
          "cells",          "topologies", "weightings", "seed", "mean_length", "train_size", "valid_size",
          "test_size",      "learner_orders", "smoothing", "m_values", "estimate_mlocal", "base", "context_budget"};
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
        throw Error(errc::parse_error, "grid protocol: unknown key '" + it.key() + "'");
      }
    }
    if (p.learner_orders.empty() || p.m_values.empty()) {
      throw Error(errc::invalid_argument, "grid protocol needs learner orders and m values");
    }
    return p;
  }
};

struct ExperimentRecord {
  std::string cell;
  std::size_t automaton = 0;
  std::string fingerprint;
  std::string learner = "ngram";
  std::size_t num_states = 0;
  std::size_t alphabet_size = 0;
  std::uint64_t topology_seed = 0;
  std::uint64_t weight_seed = 0;
  std::size_t m = 0;
  double exact_mlocal = 0.0;
  double estimated_mlocal = std::numeric_limits<double>::quiet_NaN();
  double next_symbol_entropy = 0.0;
  std::size_t learner_order = 0;
  double learner_ce = 0.0;
  double kl = 0.0;
  std::size_t train_size = 0;
  std::size_t valid_size = 0;
  std::size_t test_size = 0;
  LogBase log_base = LogBase::nats;
};

// Identity of one evaluated automaton within a grid.
struct AutomatonInfo {
  std::string cell;
  std::size_t index = 0;
  std::uint64_t topology_seed = 0;
  std::uint64_t weight_seed = 0;
};

struct LearnerResult {
  std::size_t order = 0;
  double valid_ce = 0.0;
  double test_ce = 0.0;
};

// Trains one model per candidate order on `train`, keeps the order with
// the lowest validation cross-entropy (ties go to the smaller order) and
// scores `test` with it.
inline LearnerResult select_and_score(std::span<const String> train, std::span<const String> valid,
                                      std::span<const String> test, std::size_t alphabet_size,
                                      const std::vector<std::size_t>& orders, SmoothingPolicy smoothing,
                                      LogBase base) {
  LearnerResult best;
  bool have = false;
  std::optional<SmoothedModel> best_model;
  for (std::size_t order : orders) {
    SmoothedModel model = train_model(train, order, alphabet_size, smoothing);
    const double ce = heldout_cross_entropy(model, valid, base);
    if (!have || ce < best.valid_ce) {
      best.order = order;
      best.valid_ce = ce;
      best_model.emplace(std::move(model));
      have = true;
    }
  }
  best.test_ce = heldout_cross_entropy(*best_model, test, base);
  return best;
}

// Full pipeline for one automaton: sample train/valid/test, select and
// score the learner, and emit one record per m.
inline std::vector<ExperimentRecord> evaluate_automaton(const Pfsa& pfsa, const AutomatonInfo& info,
                                                        const GridProtocol& protocol) {
  const TransitionMatrices mats = build_matrices(pfsa);
  const double h = next_symbol_entropy(pfsa, mats, protocol.base).value;
  const std::size_t total = protocol.train_size + protocol.valid_size + protocol.test_size;
  const Corpus corpus =
      sample_corpus(pfsa, total, mix_seed({protocol.seed, info.topology_seed, info.weight_seed, info.index}));
  const auto parts = split_corpus(corpus, {protocol.train_size, protocol.valid_size, protocol.test_size});
  const LearnerResult learner = select_and_score(parts[0].strings, parts[1].strings, parts[2].strings,
                                                 pfsa.alphabet_size(), protocol.learner_orders,
                                                 protocol.smoothing, protocol.base);
  std::vector<ExperimentRecord> out;
  for (std::size_t m : protocol.m_values) {
    ExperimentRecord r;
    r.cell = info.cell;
    r.automaton = info.index;
    r.fingerprint = fingerprint(pfsa);
    r.num_states = pfsa.num_states();
    r.alphabet_size = pfsa.alphabet_size();
    r.topology_seed = info.topology_seed;
    r.weight_seed = info.weight_seed;
    r.m = m;
    MLocalOptions opts;
    opts.base = protocol.base;
    opts.context_budget = protocol.context_budget;
    r.exact_mlocal = m_local_entropy(pfsa, mats, m, opts).value;
    if (protocol.estimate_mlocal) {
      r.estimated_mlocal = plugin_m_local_entropy(corpus.strings, m, pfsa.alphabet_size(), protocol.base).value;
    }
    r.next_symbol_entropy = h;
    r.learner_order = learner.order;
    r.learner_ce = learner.test_ce;
    r.kl = kl_estimate(learner.test_ce, h);
    r.train_size = protocol.train_size;
    r.valid_size = protocol.valid_size;
    r.test_size = protocol.test_size;
    r.log_base = protocol.base;
    out.push_back(std::move(r));
  }
  return out;
}

// Records ordered by (cell, automaton, m) whatever the scheduling.
inline std::vector<ExperimentRecord> run_grid(const GridProtocol& protocol) {
  std::vector<AutomatonInfo> infos;
  std::vector<GenConfig> configs;
  for (std::size_t c = 0; c < protocol.cells.size(); ++c) {
    const GridCell& cell = protocol.cells[c];
    for (std::size_t t = 0; t < protocol.topologies; ++t) {
      for (std::size_t w = 0; w < protocol.weightings; ++w) {
        GenConfig g;
        g.num_states = cell.num_states;
        g.alphabet_size = cell.alphabet_size;
        g.target_mean_length = protocol.mean_length;
        g.topology_seed = mix_seed({protocol.seed, c, 0, t});
        g.weight_seed = mix_seed({protocol.seed, c, 1, w});
        configs.push_back(g);
        infos.push_back({cell.label(), t * protocol.weightings + w, g.topology_seed, g.weight_seed});
      }
    }
  }
  std::vector<std::vector<ExperimentRecord>> per(configs.size());
  parallel_for(configs.size(), protocol.threads,
               [&](std::size_t i) { per[i] = evaluate_automaton(random_dpfsa(configs[i]), infos[i], protocol); });
  std::vector<ExperimentRecord> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "cell",          "automaton",        "fingerprint",         "learner",       "num_states",
      "alphabet_size", "topology_seed",    "weight_seed",         "m",             "exact_mlocal",
      "estimated_mlocal", "next_symbol_entropy", "learner_order", "learner_ce",    "kl",
      "train_size",    "valid_size",       "test_size",           "log_base"};
  return cols;
}

inline CsvTable records_csv(const std::vector<ExperimentRecord>& records) {
  CsvTable t;
  t.schema = kRecordsSchema;
  t.header = record_columns();
  for (const auto& r : records) {
    t.rows.push_back({r.cell,
                      std::to_string(r.automaton),
                      r.fingerprint,
                      r.learner,
                      std::to_string(r.num_states),
                      std::to_string(r.alphabet_size),
                      std::to_string(r.topology_seed),
                      std::to_string(r.weight_seed),
                      std::to_string(r.m),
                      format_real(r.exact_mlocal),
                      std::isnan(r.estimated_mlocal) ? "nan" : format_real(r.estimated_mlocal),
                      format_real(r.next_symbol_entropy),
                      std::to_string(r.learner_order),
                      format_real(r.learner_ce),
                      format_real(r.kl),
                      std::to_string(r.train_size),
                      std::to_string(r.valid_size),
                      std::to_string(r.test_size),
                      std::string(log_base_name(r.log_base))});
  }
  return t;
}

inline std::vector<ExperimentRecord> records_from_csv(const CsvTable& t) {
  if (t.schema != kRecordsSchema) {
    throw Error(errc::parse_error, "expected schema '" + std::string(kRecordsSchema) + "', got '" + t.schema + "'");
  }
  std::vector<std::size_t> idx;
  for (const auto& c : record_columns()) idx.push_back(t.column(c));
  std::vector<ExperimentRecord> out;
  for (const auto& row : t.rows) {
    auto f = [&](std::size_t i) -> const std::string& { return row[idx[i]]; };
    ExperimentRecord r;
    r.cell = f(0);
    r.automaton = parse_unsigned(f(1));
    r.fingerprint = f(2);
    r.learner = f(3);
    r.num_states = parse_unsigned(f(4));
    r.alphabet_size = parse_unsigned(f(5));
    r.topology_seed = parse_unsigned(f(6));
    r.weight_seed = parse_unsigned(f(7));
    r.m = parse_unsigned(f(8));
    r.exact_mlocal = parse_real(f(9));
    r.estimated_mlocal = parse_real(f(10));
    r.next_symbol_entropy = parse_real(f(11));
    r.learner_order = parse_unsigned(f(12));
    r.learner_ce = parse_real(f(13));
    r.kl = parse_real(f(14));
    r.train_size = parse_unsigned(f(15));
    r.valid_size = parse_unsigned(f(16));
    r.test_size = parse_unsigned(f(17));
    r.log_base = parse_log_base(f(18));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary statistics over records.

// "mlocal:3" selects exact_mlocal of the m = 3 rows; "estimated:3" the
// plug-in estimate. Other names (kl, learner_ce, next_symbol_entropy,
// exact_mlocal, ...) may carry an optional ":m" too.
struct ColumnSpec {
  std::string column;
  std::optional<std::size_t> m;
};

inline ColumnSpec parse_column_spec(std::string_view s) {
  ColumnSpec spec;
  const auto colon = s.find(':');
  std::string name(s.substr(0, colon));
  if (colon != std::string_view::npos) spec.m = parse_unsigned(s.substr(colon + 1));
  if (name == "mlocal") name = "exact_mlocal";
  if (name == "estimated") name = "estimated_mlocal";
  if (name == "ce") name = "learner_ce";
  static const std::vector<std::string> numeric = {"exact_mlocal", "estimated_mlocal", "next_symbol_entropy",
                                                   "learner_ce",   "kl",               "learner_order"};
  if (std::find(numeric.begin(), numeric.end(), name) == numeric.end()) {
    throw Error(errc::invalid_argument, "unknown column '" + name + "'");
  }
  spec.column = name;
  return spec;
}

inline double record_value(const ExperimentRecord& r, const std::string& column) {
  if (column == "exact_mlocal") return r.exact_mlocal;
  if (column == "estimated_mlocal") return r.estimated_mlocal;
  if (column == "next_symbol_entropy") return r.next_symbol_entropy;
  if (column == "learner_ce") return r.learner_ce;
  if (column == "kl") return r.kl;
  if (column == "learner_order") return static_cast<double>(r.learner_order);
  throw Error(errc::invalid_argument, "unknown column '" + column + "'");
}

struct StatsSummary {
  std::string group;
  std::size_t n = 0;
  double r = 0.0;
  LinearFit fit;
  double p_value = 1.0;
};

// Pairs x and y per evaluated automaton (cell, index, learner). A spec
// without m uses the other spec's m, or the smallest m present.
inline std::pair<std::vector<double>, std::vector<double>> paired_values(const std::vector<ExperimentRecord>& records,
                                                                         const ColumnSpec& x, const ColumnSpec& y) {
  std::optional<std::size_t> fallback = x.m ? x.m : y.m;
  if (!fallback) {
    for (const auto& r : records) fallback = fallback ? std::min(*fallback, r.m) : r.m;
  }
  const std::size_t mx = x.m.value_or(fallback.value_or(0));
  const std::size_t my = y.m.value_or(fallback.value_or(0));
  using Key = std::tuple<std::string, std::size_t, std::string>;
  std::vector<Key> order;
  std::map<Key, double> xv, yv;
  for (const auto& r : records) {
    const Key key{r.cell, r.automaton, r.learner};
    if (r.m == mx && !xv.count(key)) {
      xv[key] = record_value(r, x.column);
      order.push_back(key);
    }
    if (r.m == my && !yv.count(key)) yv[key] = record_value(r, y.column);
  }
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const Key& k : order) {
    const auto it = yv.find(k);
    if (it == yv.end()) continue;
    out.first.push_back(xv[k]);
    out.second.push_back(it->second);
  }
  return out;
}

inline StatsSummary summarize(const std::vector<ExperimentRecord>& records, const ColumnSpec& x, const ColumnSpec& y,
                              std::size_t shuffles = 1000, std::uint64_t seed = 0) {
  const auto [xs, ys] = paired_values(records, x, y);
  StatsSummary s;
  s.group = "all";
  s.n = xs.size();
  s.r = pearson(xs, ys);
  s.fit = ols_fit(xs, ys);
  s.p_value = permutation_p_value(xs, ys, shuffles, seed);
  return s;
}

// One summary per grid cell, in order of first appearance.
inline std::vector<StatsSummary> summarize_by_cell(const std::vector<ExperimentRecord>& records, const ColumnSpec& x,
                                                   const ColumnSpec& y, std::size_t shuffles = 1000,
                                                   std::uint64_t seed = 0) {
  std::vector<std::string> cells;
  for (const auto& r : records) {
    if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);
  }
  std::vector<StatsSummary> out;
  for (const auto& c : cells) {
    std::vector<ExperimentRecord> subset;
    for (const auto& r : records) {
      if (r.cell == c) subset.push_back(r);
    }
    StatsSummary s = summarize(subset, x, y, shuffles, seed);
    s.group = c;
    out.push_back(s);
  }
  return out;
}

}  // namespace locent
