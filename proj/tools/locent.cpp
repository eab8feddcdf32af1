// locent.cpp
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
// Command-line front end. Every run writes its resolved configuration to
// a sidecar JSON file; `locent replay SIDECAR` re-executes it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locent/csv.hpp"
#include "locent/entropy.hpp"
#include "locent/experiment.hpp"
#include "locent/generate.hpp"
#include "locent/matrices.hpp"
#include "locent/ngram.hpp"
#include "locent/perturb.hpp"
#include "locent/pfsa.hpp"
#include "locent/sampler.hpp"

namespace {

using namespace locent;
namespace fs = std::filesystem;

constexpr int kSidecarVersion = 1;

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(parse_unsigned(item));
  if (out.empty()) throw Error(errc::invalid_argument, "empty list '" + s + "'");
  return out;
}

// "dir/corpus.txt" + "train" -> "dir/corpus.train.txt".
std::string with_label(const std::string& path, const std::string& label) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "." + label + p.extension().string())).string();
}

void print_value(double v) { std::cout << format_real(v) << '\n'; }

// One registered subcommand.
struct Command {
  std::vector<std::string> path;
  CLI::App* app = nullptr;
  std::string sidecar;
  std::function<std::string()> default_sidecar;
  std::function<void(nlohmann::json& resolved)> run;
};

// Resolved option values (given or defaulted) and an argv that reproduces
// them.
void resolve_options(const CLI::App* app, nlohmann::json& options, std::vector<std::string>& argv) {
  std::vector<std::string> positional;
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->get_expected_min() == 0) {
      const bool on = opt->count() > 0;
      options[name] = on;
      if (on) argv.push_back("--" + name);
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else if (!opt->get_default_str().empty()) {
      value = opt->get_default_str();
    } else {
      continue;
    }
    options[name] = value;
    if (opt->get_positional()) {
      positional.push_back(value);
    } else {
      argv.push_back("--" + name + "=" + value);
    }
  }
  if (!positional.empty()) {
    argv.push_back("--");
    argv.insert(argv.end(), positional.begin(), positional.end());
  }
}

void write_sidecar(const Command& cmd, const nlohmann::json& resolved) {
  nlohmann::json options = nlohmann::json::object();
  std::vector<std::string> argv = cmd.path;
  resolve_options(cmd.app, options, argv);
  nlohmann::json j{{"locent_sidecar", kSidecarVersion},
                   {"command", cmd.path},
                   {"options", options},
                   {"argv", argv}};
  if (!resolved.is_null()) j["resolved"] = resolved;
  const std::string path = cmd.sidecar.empty() ? cmd.default_sidecar() : cmd.sidecar;
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write sidecar " + path);
  out << j.dump(2) << '\n';
}

LogBase base_option(const std::string& s) { return parse_log_base(s); }

class Cli {
 public:
  Cli() : app_("locent: exact and estimated local entropy of probabilistic automata", "locent") {
    app_.option_defaults()->always_capture_default();
    app_.require_subcommand(1);
    app_.set_help_all_flag("--help-all", "Show help for all subcommands");
    add_gen_pfsa();
    add_validate();
    add_sample();
    add_perturb();
    add_entropy();
    add_entropy_est();
    add_learn();
    add_score();
    add_exp();
    auto* replay = app_.add_subcommand("replay", "Re-run a command from its sidecar JSON");
    replay->add_option("sidecar", replay_path_, "Sidecar file written by an earlier run")->required();
    replay_ = replay;
  }

  int run(const std::vector<std::string>& args) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app_.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      std::cout << usage();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      std::cout << app_.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      std::cerr << "locent: " << e.what() << "\n\n" << usage();
      return 1;
    }
    if (replay_->parsed()) return replay();
    for (auto& cmd : commands_) {
      if (!cmd->app->parsed()) continue;
      nlohmann::json resolved;
      cmd->run(resolved);
      write_sidecar(*cmd, resolved);
      return 0;
    }
    return 1;
  }

 private:
  std::string usage() const {
    const CLI::App* app = active_app();
    if (app == &app_) return app_.help();
    std::string prefix = "locent";
    for (const CLI::App* p = app->get_parent(); p && p != &app_; p = p->get_parent()) prefix += " " + p->get_name();
    return app->help(prefix);
  }

  // Deepest subcommand seen on the command line, for usage text.
  const CLI::App* active_app() const {
    const CLI::App* app = &app_;
    for (;;) {
      const auto subs = app->get_subcommands();
      if (subs.empty()) return app;
      app = subs.front();
    }
  }

  Command& add(std::vector<std::string> path, CLI::App* app) {
    auto cmd = std::make_unique<Command>();
    cmd->path = std::move(path);
    cmd->app = app;
    app->add_option("--sidecar", cmd->sidecar, "Where to write the resolved configuration");
    commands_.push_back(std::move(cmd));
    return *commands_.back();
  }

  static std::function<std::string()> next_to(const std::string& path, const char* suffix = ".config.json") {
    return [&path, suffix] { return path + suffix; };
  }

  static std::function<std::string()> in_cwd(std::string name) {
    return [name] { return "locent." + name + ".config.json"; };
  }

  void add_gen_pfsa() {
    auto* app = app_.add_subcommand("gen-pfsa", "Generate a random deterministic PFSA");
    auto c = std::make_shared<GenConfig>();
    auto out = std::make_shared<std::string>();
    app->add_option("--states", c->num_states, "Number of states")->check(CLI::PositiveNumber);
    app->add_option("--alphabet", c->alphabet_size, "Alphabet size")->check(CLI::Range(2, 1 << 20));
    app->add_option("--mean-length", c->target_mean_length, "Target mean string length")
        ->check(CLI::PositiveNumber);
    app->add_option("--topology-seed", c->topology_seed, "Seed of the topology stream");
    app->add_option("--weight-seed", c->weight_seed, "Seed of the weight stream");
    app->add_option("--min-symbols", c->min_symbols_per_state, "Minimum outgoing symbols per state");
    app->add_option("-o,--output", *out, "Output JSON file")->required();
    Command& cmd = add({"gen-pfsa"}, app);
    cmd.default_sidecar = next_to(*out);
    cmd.run = [c, out](nlohmann::json&) {
      const Pfsa p = random_dpfsa(*c);
      save_pfsa(p, *out);
      std::cout << fingerprint(p) << '\n';
    };
  }

  void add_validate() {
    auto* app = app_.add_subcommand("validate", "Check normalization of a PFSA file");
    auto input = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(kNormalizationTolerance);
    auto fix = std::make_shared<bool>(false);
    app->add_option("input", *input, "PFSA JSON file")->required();
    app->add_option("--tolerance", *tol, "Allowed deviation of each sum from 1");
    app->add_flag("--renormalize", *fix, "Rescale defects up to 1e-6 and write the result to -o");
    app->add_option("-o,--output", *out, "Output file for --renormalize");
    Command& cmd = add({"validate"}, app);
    cmd.default_sidecar = [out] { return out->empty() ? std::string("locent.validate.config.json") : *out + ".config.json"; };
    cmd.run = [input, out, tol, fix](nlohmann::json&) {
      const Pfsa p = pfsa_from_json_unchecked(read_json_file(*input));
      if (*fix) {
        if (out->empty()) throw Error(errc::invalid_argument, "--renormalize needs -o");
        save_pfsa(renormalize(p), *out);
        std::cout << "ok\n";
        return;
      }
      const auto violations = validate(p, *tol);
      if (violations.empty()) {
        std::cout << "ok\n";
        return;
      }
      for (const auto& v : violations) std::cout << v.describe() << '\n';
      throw Error(errc::invalid_automaton, std::to_string(violations.size()) + " violation(s)");
    };
  }

  void add_sample() {
    auto* app = app_.add_subcommand("sample", "Sample a corpus from a PFSA");
    struct Opts {
      std::string pfsa, out, split, labels;
      std::size_t n = 0;
      std::uint64_t seed = 0;
      std::size_t threads = 0;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--pfsa", o->pfsa, "PFSA JSON file")->required();
    app->add_option("-n,--count", o->n, "Number of strings")->required();
    app->add_option("--seed", o->seed, "Sampling seed");
    app->add_option("--split", o->split, "Comma-separated split sizes, e.g. 20000,5000,5000");
    app->add_option("--labels", o->labels, "Comma-separated split labels");
    app->add_option("-o,--output", o->out, "Output corpus file")->required();
    app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
    Command& cmd = add({"sample"}, app);
    cmd.default_sidecar = next_to(o->out);
    cmd.run = [o](nlohmann::json&) {
      const Pfsa p = load_pfsa(o->pfsa);
      Corpus c = sample_corpus(p, o->n, o->seed, o->threads);
      c.metadata.source = o->pfsa;
      if (o->split.empty()) {
        write_corpus(o->out, c);
        return;
      }
      std::vector<std::string> labels;
      if (!o->labels.empty()) labels = split_csv_line(o->labels);
      for (const Corpus& part : split_corpus(c, parse_size_list(o->split), labels)) {
        write_corpus(with_label(o->out, part.metadata.split), part);
      }
    };
  }

  void add_perturb() {
    auto* app = app_.add_subcommand("perturb", "Apply a perturbation to every line of a corpus");
    struct Opts {
      std::string family, in, out;
      std::size_t k = 0;
      std::uint64_t seed = 0;
      bool invert = false;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--family", o->family, "reverse, detshuffle, evenodd, oddeven or klocal")->required();
    app->add_option("--k", o->k, "Window size for klocal");
    app->add_option("--seed", o->seed, "Permutation seed");
    app->add_flag("--invert", o->invert, "Apply the inverse perturbation");
    app->add_option("-i,--input", o->in, "Input corpus (whitespace-separated tokens)")->required();
    app->add_option("-o,--output", o->out, "Output corpus")->required();
    Command& cmd = add({"perturb"}, app);
    cmd.default_sidecar = next_to(o->out);
    cmd.run = [o](nlohmann::json&) {
      PerturbSpec spec{parse_family(o->family), o->seed, o->k};
      Perturbation p(spec);
      const auto lines = read_token_lines(o->in);
      std::vector<TokenString> out;
      out.reserve(lines.size());
      for (const auto& line : lines) {
        const std::span<const std::string> s(line);
        out.push_back(o->invert ? p.invert(s) : p.apply(s));
      }
      write_lines(o->out, out);
      CorpusMetadata meta;
      meta.source = o->in;
      if (std::ifstream in(metadata_path(o->in)); in) meta = metadata_from_json(read_json_file(metadata_path(o->in)));
      meta.perturbation = to_json(spec);
      if (o->invert) meta.perturbation["inverted"] = true;
      write_metadata(o->out, meta);
    };
  }

  struct EntropyOpts {
    std::string input, base, measure = "mlocal", padding = "none";
    std::size_t m = 0, alphabet = 0, threads = 0;
    double budget = kDefaultContextBudget;
    bool exact = false, plugin = false;
  };

  static void run_plugin(const EntropyOpts& o) {
    const Corpus c = read_corpus(o.input);
    const std::size_t k = o.alphabet ? o.alphabet : c.metadata.alphabet_size;
    if (o.m == 0) throw Error(errc::invalid_argument, "--m is required");
    print_value(plugin_m_local_entropy(c.strings, o.m, k, base_option(o.base), parse_padding(o.padding), o.threads)
                    .value);
  }

  void add_entropy() {
    auto* app = app_.add_subcommand("entropy", "Exact (from a PFSA) or plug-in (from a corpus) entropy");
    auto o = std::make_shared<EntropyOpts>();
    auto* exact = app->add_flag("--exact", o->exact, "Closed form from a PFSA file");
    auto* plugin = app->add_flag("--plugin", o->plugin, "Plug-in estimate from a corpus file");
    exact->excludes(plugin);
    app->add_option("input", o->input, "PFSA JSON (--exact) or corpus (--plugin)")->required();
    app->add_option("--m", o->m, "Order: context length m-1");
    app->add_option("--base", o->base, "Log base: bits or nats")->required()->check(CLI::IsMember({"bits", "nats"}));
    app->add_option("--measure", o->measure, "mlocal, next-symbol, global or mean-length (--exact)")
        ->check(CLI::IsMember({"mlocal", "next-symbol", "global", "mean-length"}));
    app->add_option("--budget", o->budget, "Maximum number of contexts for exact m-local entropy");
    app->add_option("--padding", o->padding, "Plug-in padding: none, toolkit or full");
    app->add_option("--alphabet", o->alphabet, "Alphabet size for --plugin (default: from metadata)");
    app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
    Command& cmd = add({"entropy"}, app);
    cmd.default_sidecar = in_cwd("entropy");
    cmd.run = [o](nlohmann::json&) {
      if (o->exact == o->plugin) throw Error(errc::invalid_argument, "give exactly one of --exact or --plugin");
      if (o->plugin) {
        if (o->measure != "mlocal") throw Error(errc::invalid_argument, "--plugin only estimates mlocal");
        run_plugin(*o);
        return;
      }
      const LogBase base = base_option(o->base);
      const Pfsa p = load_pfsa(o->input);
      const TransitionMatrices mats = build_matrices(p);
      if (o->measure == "next-symbol") return print_value(next_symbol_entropy(p, mats, base).value);
      if (o->measure == "global") return print_value(global_entropy(p, mats, base).value);
      if (o->measure == "mean-length") return print_value(mean_length(mats));
      if (o->m == 0) throw Error(errc::invalid_argument, "--m is required for mlocal");
      MLocalOptions opts;
      opts.base = base;
      opts.context_budget = o->budget;
      opts.threads = o->threads;
      print_value(m_local_entropy(p, mats, o->m, opts).value);
    };
  }

  void add_entropy_est() {
    auto* app = app_.add_subcommand("entropy-est", "Plug-in m-local entropy of a corpus");
    auto o = std::make_shared<EntropyOpts>();
    app->add_option("-i,--input", o->input, "Corpus file")->required();
    app->add_option("--m", o->m, "Order: context length m-1")->required();
    app->add_option("--base", o->base, "Log base: bits or nats")->required()->check(CLI::IsMember({"bits", "nats"}));
    app->add_option("--padding", o->padding, "none, toolkit or full");
    app->add_option("--alphabet", o->alphabet, "Alphabet size (default: from metadata)");
    app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
    Command& cmd = add({"entropy-est"}, app);
    cmd.default_sidecar = in_cwd("entropy-est");
    cmd.run = [o](nlohmann::json&) { run_plugin(*o); };
  }

  void add_learn() {
    auto* app = app_.add_subcommand("learn", "Train a smoothed n-gram model");
    struct Opts {
      std::string in, out, smoothing = "absdisc:0.75", padding = "full";
      std::size_t m = 0, alphabet = 0, threads = 0;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("-i,--input", o->in, "Training corpus")->required();
    app->add_option("-o,--output", o->out, "Model file (JSON)")->required();
    app->add_option("--m", o->m, "Order: context length m-1")->required()->check(CLI::PositiveNumber);
    app->add_option("--smoothing", o->smoothing, "mle, addk:K or absdisc:D");
    app->add_option("--padding", o->padding, "none, toolkit or full");
    app->add_option("--alphabet", o->alphabet, "Alphabet size (default: from metadata)");
    app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
    Command& cmd = add({"learn"}, app);
    cmd.default_sidecar = next_to(o->out);
    cmd.run = [o](nlohmann::json&) {
      const Corpus c = read_corpus(o->in);
      const std::size_t k = o->alphabet ? o->alphabet : c.metadata.alphabet_size;
      const SmoothedModel model =
          train_model(c.strings, o->m, k, parse_smoothing(o->smoothing), parse_padding(o->padding), o->threads);
      save_model(model, o->out);
    };
  }

  void add_score() {
    auto* app = app_.add_subcommand("score", "Per-symbol held-out cross-entropy of a corpus");
    struct Opts {
      std::string model, in, base, pfsa;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--model", o->model, "Model file from learn")->required();
    app->add_option("-i,--input", o->in, "Held-out corpus")->required();
    app->add_option("--base", o->base, "Log base: bits or nats")->required()->check(CLI::IsMember({"bits", "nats"}));
    app->add_option("--pfsa", o->pfsa, "Generating PFSA; also prints the KL estimate");
    Command& cmd = add({"score"}, app);
    cmd.default_sidecar = in_cwd("score");
    cmd.run = [o](nlohmann::json&) {
      const LogBase base = base_option(o->base);
      const SmoothedModel model = load_model(o->model);
      const double ce = heldout_cross_entropy(model, read_corpus(o->in).strings, base);
      print_value(ce);
      if (!o->pfsa.empty()) {
        const Pfsa p = load_pfsa(o->pfsa);
        print_value(kl_estimate(ce, next_symbol_entropy(p, build_matrices(p), base).value));
      }
    };
  }

  void add_exp() {
    auto* exp = app_.add_subcommand("exp", "Experiments");
    exp->require_subcommand(1);

    struct Opts {
      std::string config, out, base, in, x, y;
      std::size_t threads = 0, shuffles = 1000;
      std::uint64_t seed = 0;
      bool by_cell = false;
    };

    {
      auto* app = exp->add_subcommand("table1", "Exact vs. plug-in m-local entropy over generated automata");
      auto o = std::make_shared<Opts>();
      app->add_option("--config", o->config, "Protocol JSON (default protocol if omitted)");
      app->add_option("--out", o->out, "Output directory")->required();
      app->add_option("--base", o->base, "Override the protocol's log base")->check(CLI::IsMember({"bits", "nats"}));
      app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
      Command& cmd = add({"exp", "table1"}, app);
      cmd.default_sidecar = [o] { return (fs::path(o->out) / "table1.config.json").string(); };
      cmd.run = [o](nlohmann::json& resolved) {
        Table1Protocol p = o->config.empty() ? Table1Protocol{} : Table1Protocol::from_json(read_json_file(o->config));
        if (!o->base.empty()) p.base = parse_log_base(o->base);
        p.threads = o->threads;
        resolved = p.to_json();
        fs::create_directories(o->out);
        const Table1Result r = run_table1(p);
        const CsvTable table = table1_csv(r);
        write_csv((fs::path(o->out) / "table1.csv").string(), table);
        write_csv((fs::path(o->out) / "table1_detail.csv").string(), table1_detail_csv(r));
        write_csv(std::cout, table);
      };
    }
    {
      auto* app = exp->add_subcommand("grid", "Learner grid: exact m-local entropy vs. learner KL");
      auto o = std::make_shared<Opts>();
      app->add_option("--config", o->config, "Grid protocol JSON (default protocol if omitted)");
      app->add_option("--out", o->out, "Records CSV")->required();
      app->add_option("--base", o->base, "Override the protocol's log base")->check(CLI::IsMember({"bits", "nats"}));
      app->add_option("--threads", o->threads, "Worker threads (0: LOCENT_THREADS or all cores)");
      Command& cmd = add({"exp", "grid"}, app);
      cmd.default_sidecar = next_to(o->out);
      cmd.run = [o](nlohmann::json& resolved) {
        GridProtocol p = o->config.empty() ? GridProtocol{} : GridProtocol::from_json(read_json_file(o->config));
        if (!o->base.empty()) p.base = parse_log_base(o->base);
        p.threads = o->threads;
        resolved = p.to_json();
        write_csv(o->out, records_csv(run_grid(p)));
      };
    }
    {
      auto* app = exp->add_subcommand("stats", "Pearson r and least-squares fit over a records CSV");
      auto o = std::make_shared<Opts>();
      app->add_option("--in", o->in, "Records CSV")->required();
      app->add_option("--x", o->x, "x column, e.g. mlocal:3")->required();
      app->add_option("--y", o->y, "y column, e.g. kl")->required();
      app->add_flag("--by-cell", o->by_cell, "One summary per grid cell");
      app->add_option("--shuffles", o->shuffles, "Permutation-test shuffles");
      app->add_option("--seed", o->seed, "Permutation-test seed");
      Command& cmd = add({"exp", "stats"}, app);
      cmd.default_sidecar = in_cwd("stats");
      cmd.run = [o](nlohmann::json&) {
        const auto records = records_from_csv(read_csv(o->in));
        const ColumnSpec x = parse_column_spec(o->x), y = parse_column_spec(o->y);
        std::vector<StatsSummary> out;
        if (o->by_cell) {
          out = summarize_by_cell(records, x, y, o->shuffles, o->seed);
        } else {
          out.push_back(summarize(records, x, y, o->shuffles, o->seed));
        }
        CsvTable t;
        t.header = {"group", "n", "r", "slope", "intercept", "r_squared", "p_value"};
        for (const auto& s : out) {
          t.rows.push_back({s.group, std::to_string(s.n), format_real(s.r), format_real(s.fit.slope),
                            format_real(s.fit.intercept), format_real(s.fit.r_squared), format_real(s.p_value)});
        }
        write_csv(std::cout, t);
      };
    }
  }

  int replay() {
    const nlohmann::json j = read_json_file(replay_path_);
    if (!j.contains("locent_sidecar") || j.at("locent_sidecar") != kSidecarVersion) {
      throw Error(errc::parse_error, replay_path_ + " is not a locent sidecar");
    }
    const auto argv = j.at("argv").get<std::vector<std::string>>();
    if (!argv.empty() && argv[0] == "replay") throw Error(errc::invalid_argument, "cannot replay a replay");
    Cli fresh;
    return fresh.run(argv);
  }

  CLI::App app_;
  std::vector<std::unique_ptr<Command>> commands_;
  CLI::App* replay_ = nullptr;
  std::string replay_path_;
};

int exit_code(errc code) {
  switch (code) {
    case errc::invalid_argument:
    case errc::invalid_window_size:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    Cli cli;
    return cli.run(args);
  } catch (const Error& e) {
    std::cerr << "locent: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "locent: " << e.what() << '\n';
    return 2;
  }
}
