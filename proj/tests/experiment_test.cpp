// experiment_test.cpp
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


#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "locent/experiment.hpp"

namespace locent {
namespace {

Table1Protocol small_table1() {
  Table1Protocol p;
  p.num_states = {3};
  p.alphabet_sizes = {4, 5};
  p.topology_seeds = {1};
  p.weight_seeds = {2, 3};
  p.mean_length = 6;
  p.corpus_sizes = {500, 2000};
  p.orders = {2, 3};
  return p;
}

GridProtocol small_grid() {
  GridProtocol p;
  p.cells = {{3, 4}, {4, 3}};
  p.topologies = 2;
  p.weightings = 2;
  p.mean_length = 5;
  p.train_size = 600;
  p.valid_size = 200;
  p.test_size = 200;
  p.learner_orders = {2, 3};
  p.m_values = {2, 3};
  return p;
}

std::string csv_text(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

TEST(Table1, CellsAggregateEstimates) {
  const Table1Result r = run_table1(small_table1());
  ASSERT_EQ(r.estimates.size(), 4u * 2u * 2u);
  ASSERT_EQ(r.cells.size(), 4u);
  for (const auto& c : r.cells) {
    double mae = 0.0, mre = 0.0;
    int n = 0;
    for (const auto& e : r.estimates) {
      if (e.m != c.m || e.corpus_size != c.corpus_size) continue;
      mae += std::abs(e.estimated - e.exact);
      mre += std::abs(e.estimated - e.exact) / e.exact;
      ++n;
    }
    EXPECT_EQ(c.automata, 4u);
    EXPECT_NEAR(c.mae, mae / n, 1e-15);
    EXPECT_NEAR(c.mre, mre / n, 1e-15);
  }
  EXPECT_EQ(&r.cell(3, 2000), &r.cells[3]);
  EXPECT_THROW(r.cell(9, 2000), Error);
}

TEST(Table1, DeterministicAndThreadIndependent) {
  Table1Protocol p = small_table1();
  const std::string a = csv_text(table1_detail_csv(run_table1(p)));
  p.threads = 3;
  const std::string b = csv_text(table1_detail_csv(run_table1(p)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("# locent-table1-detail v1\n", 0), 0u);
}

TEST(Table1, ProtocolJsonRoundTrip) {
  const Table1Protocol p = small_table1();
  EXPECT_EQ(Table1Protocol::from_json(p.to_json()).to_json(), p.to_json());
}

TEST(Grid, RecordInvariants) {
  const auto records = run_grid(small_grid());
  ASSERT_EQ(records.size(), 2u * 4u * 2u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    EXPECT_EQ(r.kl, r.learner_ce - r.next_symbol_entropy);
    EXPECT_GE(r.exact_mlocal, 0.0);
    EXPECT_GE(r.estimated_mlocal, 0.0);
    EXPECT_GE(r.learner_ce, 0.0);
    EXPECT_EQ(r.cell, i < 8 ? "3x4" : "4x3");
    EXPECT_EQ(r.automaton, (i % 8) / 2);
    EXPECT_EQ(r.m, 2 + i % 2);
    EXPECT_EQ(r.learner, "ngram");
  }
}

TEST(Grid, DeterministicAndThreadIndependent) {
  GridProtocol p = small_grid();
  const std::string a = csv_text(records_csv(run_grid(p)));
  p.threads = 4;
  EXPECT_EQ(csv_text(records_csv(run_grid(p))), a);
}

TEST(Grid, CsvRoundTrip) {
  const auto records = run_grid(small_grid());
  const CsvTable t = records_csv(records);
  std::istringstream in(csv_text(t));
  const auto back = records_from_csv(read_csv(in));
  ASSERT_EQ(back.size(), records.size());
  EXPECT_EQ(csv_text(records_csv(back)), csv_text(t));
}

TEST(Grid, SchemaChecked) {
  std::istringstream in("# something else\ncell,m\nx,1\n");
  EXPECT_THROW(records_from_csv(read_csv(in)), Error);
}

TEST(Grid, ProtocolJson) {
  const GridProtocol p = small_grid();
  EXPECT_EQ(GridProtocol::from_json(p.to_json()).to_json(), p.to_json());
  const auto q = GridProtocol::from_json(nlohmann::json::parse(R"({"cells": [{"num_states": 8, "alphabet_size": 48}]})"));
  EXPECT_EQ(q.cells[0].label(), "8x48");
  EXPECT_THROW(GridProtocol::from_json(nlohmann::json::parse(R"({"cels": []})")), Error);
}

TEST(Grid, SingleStringLanguageHasNoLocalUncertainty) {
  GridProtocol p = small_grid();
  p.train_size = 2000;
  p.m_values = {2, 3, 4, 5};
  const Pfsa pfsa = single_string_pfsa({0, 3, 1, 4, 2, 5}, 6);
  const auto records = evaluate_automaton(pfsa, {"single", 0, 0, 0}, p);
  for (const auto& r : records) {
    EXPECT_EQ(r.exact_mlocal, 0.0);
    EXPECT_EQ(r.estimated_mlocal, 0.0);
    EXPECT_EQ(r.next_symbol_entropy, 0.0);
    EXPECT_GE(r.kl, 0.0);
    EXPECT_LT(r.kl, 0.01);
  }
}

TEST(Summary, PerfectLineAndPairing) {
  std::vector<ExperimentRecord> records;
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t m : {2u, 3u}) {
      ExperimentRecord r;
      r.cell = "c";
      r.automaton = a;
      r.m = m;
      r.exact_mlocal = static_cast<double>(a) + (m == 3 ? 10.0 : 0.0);
      r.kl = 2.0 * static_cast<double>(a) + 1.0;
      records.push_back(r);
    }
  }
  const auto s = summarize(records, parse_column_spec("mlocal:3"), parse_column_spec("kl"));
  EXPECT_EQ(s.n, 5u);
  EXPECT_NEAR(s.r, 1.0, 1e-15);
  EXPECT_NEAR(s.fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(s.fit.intercept, -19.0, 1e-12);
  EXPECT_NEAR(s.fit.r_squared, 1.0, 1e-15);
  const auto [xs, ys] = paired_values(records, parse_column_spec("mlocal:2"), parse_column_spec("mlocal:3"));
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(ys[i] - xs[i], 10.0);
  EXPECT_THROW(parse_column_spec("colour"), Error);
}

TEST(Summary, ByCell) {
  const auto records = run_grid(small_grid());
  const auto groups = summarize_by_cell(records, parse_column_spec("mlocal:2"), parse_column_spec("kl"), 50);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].group, "3x4");
  EXPECT_EQ(groups[0].n, 4u);
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_real(0.920477091497), "9.20477091e-01");
  EXPECT_EQ(parse_real("9.20477091e-01"), 0.920477091);
  EXPECT_THROW(parse_real("1.0x"), Error);
  EXPECT_THROW(parse_unsigned("-3"), Error);
}

}  // namespace
}  // namespace locent
