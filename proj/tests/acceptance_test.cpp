// acceptance_test.cpp
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
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "locent/entropy.hpp"
#include "locent/experiment.hpp"
#include "locent/generate.hpp"
#include "locent/matrices.hpp"
#include "locent/ngram.hpp"
#include "locent/perturb.hpp"
#include "locent/probability.hpp"
#include "locent/sampler.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace locent;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (!pass) detail << "; ";
    if (pass) detail.str("");
    pass = false;
    detail << what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void near(Outcome& o, const std::string& what, double got, double want, double tol) {
  if (!(std::abs(got - want) <= tol)) {
    o.fail(what + " got " + fmt("%.10g", got) + " want " + fmt("%.10g", want));
  }
}

std::vector<String> all_strings_up_to(std::size_t k, std::size_t max_len) {
  std::vector<String> out{{}};
  std::vector<String> layer{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<String> next;
    for (const auto& y : layer) {
      for (Symbol s = 0; s < k; ++s) {
        String z = y;
        z.push_back(s);
        next.push_back(z);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::size_t compared = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Pfsa p = testing::tiny_generated(i);
    const TransitionMatrices mats = build_matrices(p);
    const auto queries = all_strings_up_to(p.alphabet_size(), 2);
    const std::string tag = "automaton " + std::to_string(i) + " ";
    for (std::size_t m = 1; m <= 3; ++m) {
      const auto e = testing::enumerate_to_mass(p, m - 1, 1e-9, m == 1 ? queries : std::vector<String>{});
      if (e.string_mass < 1.0 - 1e-9) o.fail(tag + "enumeration stopped short");
      near(o, tag + "m-local m=" + std::to_string(m), m_local_entropy(p, mats, m).value, e.windows.m_local(), 1e-6);
      ++compared;
      if (m != 1) continue;
      near(o, tag + "global", global_entropy(p, mats).value, e.global_entropy, 1e-6);
      near(o, tag + "next-symbol", next_symbol_entropy(p, mats).value, e.prefix_weighted_h / e.prefix_mass, 1e-6);
      near(o, tag + "mean length", mean_length(mats), e.mean_length, 1e-6);
      compared += 3;
      for (const auto& q : queries) {
        near(o, tag + "string", string_prob(mats, q), e.string_probs.at(q), 1e-6);
        near(o, tag + "prefix", prefix_prob(mats, q), e.prefix_probs.at(q), 1e-6);
        near(o, tag + "infix", infix_weight(mats, q), e.infix_weights.at(q), 1e-6);
        compared += 3;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 60.0) o.fail("runtime " + fmt("%.1f", secs) + " s");
  if (o.pass) o.detail << compared << " quantities on 20 automata agree within 1e-6 in " << fmt("%.1f", secs) << " s";
  return o;
}

Outcome reference_automaton() {
  Outcome o;
  constexpr Symbol a = 0, b = 1;
  const Pfsa p = testing::t1();
  const TransitionMatrices mats = build_matrices(p);

  // Frozen values.
  near(o, "string_prob(eps)", string_prob(mats, String{}), 0.2, 1e-12);
  near(o, "prefix_prob(b)", prefix_prob(mats, String{b}), 0.3, 1e-12);
  near(o, "infix(a)", infix_weight(mats, String{a}), 2.125, 1e-12);
  near(o, "infix(b)", infix_weight(mats, String{b}), 0.9375, 1e-12);
  near(o, "mean length", mean_length(mats), 3.0625, 1e-12);
  near(o, "next-symbol", next_symbol_entropy(p, mats).value, 0.947351, 1e-6);
  near(o, "global", global_entropy(p, mats).value, 3.848614, 1e-6);
  near(o, "2-local", m_local_entropy(p, mats, 2).value, 0.920477, 1e-6);

  // Independent forward recursion.
  const auto dp1 = oracle::window_dp(p, 1);
  const auto dp0 = oracle::window_dp(p, 0);
  double global = 0.0;
  const double next = testing::dp_next_symbol_entropy(p, dp0, &global);
  near(o, "oracle string_prob(eps)", dp0.length_distribution.at(0), 0.2, 1e-6);
  near(o, "oracle infix(a)", dp0.windows.weight[a], 2.125, 1e-6);
  near(o, "oracle infix(b)", dp0.windows.weight[b], 0.9375, 1e-6);
  near(o, "oracle mean length", dp0.mean_length, 3.0625, 1e-6);
  near(o, "oracle next-symbol", next, 0.947351, 1e-6);
  near(o, "oracle global", global, 3.848614, 1e-6);
  near(o, "oracle 2-local", dp1.windows.m_local(), 0.920477, 1e-6);
  // After reading b the automaton sits in state 1 with forward weight 0.3.
  const Pfsa from_q1(2, 2, std::vector<Arc>(p.arcs().begin(), p.arcs().end()), {0.0, 1.0},
                     std::vector<double>(p.final_weights().begin(), p.final_weights().end()));
  near(o, "oracle prefix_prob(b)", 0.3 * oracle::window_dp(from_q1, 0).string_mass, 0.3, 1e-6);
  if (o.pass) o.detail << "closed forms and forward recursion agree with frozen values within 1e-6";
  return o;
}

Outcome estimator_validation() {
  Outcome o;
  const std::map<std::pair<std::size_t, std::size_t>, double> reported{
      {{2, 50000}, 0.04}, {{3, 50000}, 0.36}, {{4, 50000}, 3.63}, {{5, 50000}, 13.82},
      {{2, 200000}, 0.02}, {{3, 200000}, 0.13}, {{4, 200000}, 1.49}, {{5, 200000}, 7.61}};
  const auto start = std::chrono::steady_clock::now();
  const Table1Result r = run_table1(Table1Protocol{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::printf("  m  corpus    MRE%%      reported  ratio\n");
  for (const auto& [key, want] : reported) {
    const auto [m, n] = key;
    const double got = 100.0 * r.cell(m, n).mre;
    const double ratio = got / want;
    std::printf("  %zu  %-8zu  %-8.4f  %-8.2f  %.3f\n", m, n, got, want, ratio);
    if (!(ratio >= 0.5 && ratio <= 2.0)) {
      o.fail("m=" + std::to_string(m) + " n=" + std::to_string(n) + " ratio " + fmt("%.3f", ratio));
    }
    if (r.cell(m, n).automata != 16) o.fail("cell does not average 16 automata");
  }
  for (std::size_t m = 2; m <= 5; ++m) {
    if (!(r.cell(m, 200000).mre < r.cell(m, 50000).mre)) o.fail("MRE does not fall with corpus size at m=" + std::to_string(m));
  }
  for (std::size_t n : {50000, 200000}) {
    for (std::size_t m = 2; m < 5; ++m) {
      if (!(r.cell(m, n).mre < r.cell(m + 1, n).mre)) o.fail("MRE does not rise with m at n=" + std::to_string(n));
    }
  }
  if (secs >= 1800.0) o.fail("runtime " + fmt("%.0f", secs) + " s");
  if (o.pass) o.detail << "all 8 cells within 2x of reported MRE, monotone in m and corpus size, " << fmt("%.0f", secs) << " s";
  return o;
}

Outcome halting_identity() {
  Outcome o;
  std::size_t count = 0;
  for (std::size_t q : {1, 2, 3, 8, 16, 32}) {
    for (std::size_t k : {2, 3, 7, 32, 48}) {
      for (double mu : {0.3, 1.0, 5.0, 20.0, 100.0}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          GenConfig c;
          c.num_states = q;
          c.alphabet_size = k;
          c.target_mean_length = mu;
          c.topology_seed = mix_seed({q, k, seed});
          c.weight_seed = mix_seed({q, k, seed, 1});
          const Pfsa p = random_dpfsa(c);
          const std::string tag = std::to_string(q) + "x" + std::to_string(k) + " mu=" + fmt("%g", mu) + " ";
          near(o, tag + "mean length", mean_length(build_matrices(p)), mu, 1e-6);
          for (double f : p.final_weights()) near(o, tag + "halting", f, 1.0 / (mu + 1.0), 1e-12);
          ++count;
        }
      }
    }
  }
  if (o.pass) o.detail << count << " generated automata have mean length mu within 1e-6 and halting 1/(mu+1)";
  return o;
}

std::vector<std::size_t> frequency_histogram(const std::vector<String>& strings) {
  std::map<String, std::size_t> counts;
  for (const auto& y : strings) ++counts[y];
  std::vector<std::size_t> h;
  for (const auto& [y, c] : counts) h.push_back(c);
  std::sort(h.begin(), h.end());
  return h;
}

Outcome perturbation_suite() {
  Outcome o;
  GenConfig c;
  c.num_states = 4;
  c.alphabet_size = 6;
  c.target_mean_length = 6.0;
  c.topology_seed = 11;
  c.weight_seed = 12;
  const Corpus corpus = sample_corpus(random_dpfsa(c), 10000, 13);
  const auto base_hist = frequency_histogram(corpus.strings);

  std::vector<PerturbSpec> specs{{Family::reverse, 0, 0}, {Family::deterministic_shuffle, 21, 0},
                                 {Family::even_odd, 0, 0}, {Family::odd_even, 0, 0}};
  for (std::size_t k = 2; k <= 7; ++k) specs.push_back({Family::k_local, 22, k});
  for (const PerturbSpec& spec : specs) {
    Perturbation p(spec);
    const std::string tag = std::string(family_name(spec.family)) + (spec.k ? std::to_string(spec.k) : "") + " ";
    std::vector<String> out;
    for (const String& y : corpus.strings) {
      const String z = p.apply(std::span<const Symbol>(y));
      if (z.size() != y.size()) {
        o.fail(tag + "changed a length");
        break;
      }
      if (p.invert(std::span<const Symbol>(z)) != y) {
        o.fail(tag + "inverse does not restore");
        break;
      }
      String ys = y, zs = z;
      std::sort(ys.begin(), ys.end());
      std::sort(zs.begin(), zs.end());
      if (ys != zs) {
        o.fail(tag + "changed a symbol multiset");
        break;
      }
      if (spec.family == Family::reverse && p.apply(std::span<const Symbol>(z)) != y) {
        o.fail("reverse is not an involution");
        break;
      }
      out.push_back(z);
    }
    if (out.size() == corpus.size() && frequency_histogram(out) != base_hist) o.fail(tag + "changed the frequency histogram");
  }
  const String v{1, 2, 3, 4, 5};
  if (even_odd_shuffle(std::span<const Symbol>(v)) != String{2, 4, 1, 3, 5}) o.fail("even-odd of 1 2 3 4 5");
  if (o.pass) o.detail << specs.size() << " perturbations preserve lengths, multisets and histograms on 10000 strings";
  return o;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  return {detail::mean_of(v), detail::sd_of(v) / std::sqrt(static_cast<double>(v.size()))};
}

Outcome perturbation_entropy_trend() {
  Outcome o;
  constexpr std::size_t kSeeds = 20;
  constexpr std::size_t kStrings = 20000;
  std::ostringstream summary;
  for (std::size_t k_sym : {6, 8, 10, 12, 16}) {
    const Pfsa p = cycle_pfsa(k_sym, 0.9, 20.0);
    const Corpus corpus = sample_corpus(p, kStrings, mix_seed({k_sym, 5}));
    auto h3 = [&](const std::vector<String>& s) { return plugin_m_local_entropy(s, 3, k_sym).value; };
    const double base = h3(corpus.strings);
    auto over_seeds = [&](Family f, std::size_t k) {
      std::vector<double> v;
      for (std::uint64_t s = 0; s < kSeeds; ++s) {
        Perturbation pert({f, mix_seed({k_sym, k, s}), k});
        v.push_back(h3(pert.apply_all(corpus.strings)));
      }
      return mean_se(v);
    };
    std::vector<MeanSe> local;
    for (std::size_t k = 3; k <= 7; ++k) local.push_back(over_seeds(Family::k_local, k));
    const MeanSe shuffled = over_seeds(Family::deterministic_shuffle, 0);

    const std::string tag = "K=" + std::to_string(k_sym) + " ";
    summary << " " << tag << "base " << fmt("%.3f", base);
    for (std::size_t i = 0; i < local.size(); ++i) summary << " k" << i + 3 << " " << fmt("%.3f", local[i].mean);
    summary << " det " << fmt("%.3f", shuffled.mean) << ";";
    if (!(base < local[0].mean)) o.fail(tag + "base not below 3-local shuffle");
    for (std::size_t i = 0; i + 1 < local.size(); ++i) {
      if (local[i + 1].mean < local[i].mean - local[i].se) {
        o.fail(tag + "k-local mean drops by more than one SE at k=" + std::to_string(i + 4));
      }
    }
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (!(shuffled.mean >= local[i].mean)) o.fail(tag + "detshuffle below k=" + std::to_string(i + 3));
    }
  }
  std::printf("  3-local entropy (nats):%s\n", summary.str().c_str());
  if (o.pass) o.detail << "base < k=3 <= ... <= k=7 (within one SE) <= detshuffle on 5 automata, 20 seeds";
  return o;
}

// Per-symbol negative log likelihood by walking the raw arc list.
double arc_walk_cross_entropy(const Pfsa& p, const std::vector<String>& strings) {
  const std::size_t n = p.num_states();
  std::map<std::pair<std::size_t, Symbol>, std::vector<Arc>> out;
  for (const Arc& a : p.arcs()) out[{a.source, a.symbol}].push_back(a);
  double nll = 0.0, symbols = 0.0;
  for (const String& y : strings) {
    std::vector<double> alpha(p.initial().begin(), p.initial().end());
    for (Symbol s : y) {
      std::vector<double> next(n, 0.0);
      for (std::size_t q = 0; q < n; ++q) {
        if (alpha[q] == 0.0) continue;
        const auto it = out.find({q, s});
        if (it == out.end()) continue;
        for (const Arc& a : it->second) next[a.target] += alpha[q] * a.weight;
      }
      alpha = std::move(next);
    }
    double prob = 0.0;
    for (std::size_t q = 0; q < n; ++q) prob += alpha[q] * p.final_weights()[q];
    nll -= std::log(prob);
    symbols += static_cast<double>(y.size()) + 1.0;
  }
  return nll / symbols;
}

Outcome learner_correlation() {
  Outcome o;
  GridProtocol protocol;
  protocol.m_values = {3};
  const auto start = std::chrono::steady_clock::now();
  const auto records = run_grid(protocol);
  const StatsSummary s = summarize(records, parse_column_spec("mlocal:3"), parse_column_spec("kl"), 1000, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("  grid %s: n=%zu r=%.4f slope=%.4f R2=%.4f p=%.4f (%.0f s)\n", s.group.c_str(), s.n, s.r,
              s.fit.slope, s.fit.r_squared, s.p_value, secs);
  if (s.n < 25) o.fail("only " + std::to_string(s.n) + " automata");
  if (!(s.r > 0.0)) o.fail("r = " + fmt("%.4f", s.r));
  if (!(s.p_value < 0.05)) o.fail("p = " + fmt("%.4f", s.p_value));

  GenConfig g;
  g.num_states = 16;
  g.alphabet_size = 32;
  g.topology_seed = records.front().topology_seed;
  g.weight_seed = records.front().weight_seed;
  const std::vector<std::pair<std::string, Pfsa>> automata{{"reference", testing::t1()}, {"grid", random_dpfsa(g)}};
  std::ostringstream sanity;
  for (const auto& [name, p] : automata) {
    const TransitionMatrices mats = build_matrices(p);
    const Corpus corpus = sample_corpus(p, 200000, 31);
    const double ce = model_cross_entropy(mats, corpus.strings);
    const double walk = arc_walk_cross_entropy(p, corpus.strings);
    const double h = next_symbol_entropy(p, mats).value;
    near(o, name + " true-model cross-entropy vs next-symbol entropy", ce, h, 0.01);
    near(o, name + " cross-entropy vs arc walk", ce, walk, 1e-9);
    sanity << " " << name << " " << fmt("%.4f", ce) << " vs " << fmt("%.4f", h) << ";";
  }
  std::printf("  true-model cross-entropy:%s\n", sanity.str().c_str());
  if (o.pass) {
    o.detail << "r=" << fmt("%.3f", s.r) << " p=" << fmt("%.3f", s.p_value) << " over " << s.n
             << " automata; true-model cross-entropy within 0.01 nats";
  }
  return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = fs::relative(e.path(), dir).string();
    if (name == ".stdout" || name == ".stderr") continue;
    files[name] = testing::slurp(e.path());
  }
  return files;
}

Outcome cli_replay() {
  Outcome o;
  const fs::path dir = testing::scratch_dir("acceptance_replay");
  testing::write_file(dir / "t1.json", testing::kT1Json);
  testing::write_file(dir / "grid.json",
                      R"({"cells": [[3, 4], [4, 3]], "topologies": 2, "weightings": 2, "mean_length": 5,)"
                      R"( "train_size": 500, "valid_size": 200, "test_size": 200, "learner_orders": [2, 3],)"
                      R"( "m_values": [2, 3]})");
  testing::write_file(dir / "table1.json",
                      R"({"num_states": [3], "alphabet_sizes": [4], "topology_seeds": [1, 2], "weight_seeds": [3, 4],)"
                      R"( "mean_length": 6, "corpus_sizes": [500, 2000], "orders": [2, 3]})");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"gen-pfsa --states 4 --alphabet 5 --topology-seed 9 -o g.json", "g.json.config.json"},
      {"validate g.json", "locent.validate.config.json"},
      {"sample --pfsa g.json -n 2000 --seed 4 --split 1000,500,500 -o c.txt", "c.txt.config.json"},
      {"perturb --family klocal --k 3 --seed 3 -i c.train.txt -o p.txt", "p.txt.config.json"},
      {"learn --m 3 -i c.train.txt -o m.json", "m.json.config.json"},
      {"score --model m.json -i c.test.txt --base bits --pfsa g.json", "locent.score.config.json"},
      {"entropy --exact --m 3 --base nats g.json", "locent.entropy.config.json"},
      {"entropy --plugin --m 2 --base bits p.txt --sidecar plugin.json", "plugin.json"},
      {"entropy-est -i p.txt --m 3 --base bits", "locent.entropy-est.config.json"},
      {"exp grid --config grid.json --out records.csv", "records.csv.config.json"},
      {"exp stats --in records.csv --x mlocal:2 --y kl --by-cell --shuffles 200", "locent.stats.config.json"},
      {"exp table1 --config table1.json --out t1dir", "t1dir/table1.config.json"},
  };
  for (const auto& [args, sidecar] : runs) {
    const auto first = testing::run_locent(dir, args);
    if (first.exit_code != 0) {
      o.fail("'" + args + "' exited " + std::to_string(first.exit_code));
      continue;
    }
    if (!fs::exists(dir / sidecar)) {
      o.fail("'" + args + "' wrote no sidecar");
      continue;
    }
    const auto before = snapshot(dir);
    const auto again = testing::run_locent(dir, "replay " + sidecar);
    if (again.exit_code != 0 || again.out != first.out || snapshot(dir) != before) o.fail("replay of '" + args + "' differs");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail << runs.size() << " commands replayed byte-identically from their sidecars";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence},
      {"reference-automaton", reference_automaton},
      {"estimator-validation", estimator_validation},
      {"halting-identity", halting_identity},
      {"perturbation-suite", perturbation_suite},
      {"perturbation-entropy-trend", perturbation_entropy_trend},
      {"learner-correlation", learner_correlation},
      {"cli-replay", cli_replay},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
