// Copyright 2026 The polyomwu Authors.
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

// polyomwu: generate games, solve for the QRE, run experiments, validate
// games and delay schedules.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 divergence.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyomwu/delay.hpp"
#include "polyomwu/game.hpp"
#include "polyomwu/harness.hpp"
#include "polyomwu/metrics.hpp"
#include "polyomwu/presets.hpp"

namespace {

using nlohmann::json;
using namespace polyomwu;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kDiverged = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GraphSpec parse_graph(const std::string& text) {
  if (text == "complete") return GraphSpec::Complete();
  std::vector<std::pair<Player, Player>> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      throw UsageError("graph edges look like 0-1,1-2 (got '" + item + "')");
    }
    edges.emplace_back(std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1)));
  }
  return GraphSpec::EdgeList(std::move(edges));
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void print_stats(const PolymatrixGame& game) {
  const GameStats s = game_stats(game);
  std::cout << "players " << game.num_players() << "  edges " << game.edges().size()
            << "  d_max " << s.d_max << "  a_inf " << format_double(s.a_inf) << "  s_max "
            << s.s_max << "\n";
}

// -- gen -----------------------------------------------------------------------

struct GenArgs {
  std::size_t n = 10;
  std::size_t actions = 10;
  std::string graph = "complete";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const PolymatrixGame game = random_zero_sum_game(a.n, a.actions, parse_graph(a.graph), a.seed);
  if (a.out.empty() || a.out == "-") {
    std::cout << game_to_json(game);
  } else {
    save_game(game, a.out);
    print_stats(game);
    std::cout << "hash " << game_hash(game) << "\n";
  }
  return kOk;
}

// -- qre -----------------------------------------------------------------------

struct QreArgs {
  std::string game;
  double tau = 0.1;
  double tol = 1e-10;
  std::size_t max_iter = QreOptions{}.max_iter;
  std::string out;
};

int cmd_qre(const QreArgs& a) {
  if (!(a.tau > 0.0)) throw UsageError("qre requires --tau > 0");
  if (!(a.tol > 0.0)) throw UsageError("qre requires --tol > 0");
  const PolymatrixGame game = load_game(a.game);
  QreOptions options;
  options.tol = a.tol;
  options.max_iter = a.max_iter;
  const QreSolution q = compute_qre(game, a.tau, options);
  const std::string text = qre_to_json(q).dump(2) + "\n";
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  std::cerr << "residual " << format_double(q.residual) << "  iterations " << q.iterations
            << (q.converged ? "  converged\n" : "  NOT converged\n");
  return q.converged ? kOk : kFail;
}

// -- run -----------------------------------------------------------------------

struct RunArgs {
  std::string preset;
  std::string config;
  std::string game;
  std::size_t n = 10;
  std::size_t actions = 10;
  std::string graph = "complete";
  double tau = 0.1;
  std::string eta = "safe";
  double eta_bar = 0.0;
  bool two_timescale = false;
  std::string delay = "none";
  std::int64_t gamma = 0;
  double pmean = 1.0;
  bool pcap = false;
  std::string permutation_file;
  Iteration horizon = 5000;
  Iteration record_every = 1;
  std::vector<std::uint64_t> seeds{0};
  bool regret = false;
  std::string out = "runs";
  int jobs = 1;
  bool quiet = false;
};

// Config file first, then every flag given on the command line.
RunConfig build_config(const RunArgs& a, const CLI::App& app) {
  json doc = a.config.empty() ? json::object() : read_json(a.config);
  for (const char* key : {"out", "jobs", "preset"}) doc.erase(key);
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (given("--game")) doc["game"] = a.game;
  if (given("--n")) doc["n"] = a.n;
  if (given("--actions")) doc["actions"] = a.actions;
  if (given("--graph")) {
    const GraphSpec g = parse_graph(a.graph);
    if (g.complete) {
      doc["graph"] = "complete";
    } else {
      json edges = json::array();
      for (const auto& [i, j] : g.edges) edges.push_back({i, j});
      doc["graph"] = edges;
    }
  }
  if (given("--tau")) doc["tau"] = a.tau;
  if (given("--eta")) {
    if (a.eta == "safe") {
      doc["eta"] = "safe";
    } else {
      try {
        doc["eta"] = std::stod(a.eta);
      } catch (const std::exception&) {
        throw UsageError("--eta must be a number or 'safe'");
      }
    }
  }
  if (given("--two-timescale")) doc["two_timescale"] = a.two_timescale;
  if (given("--eta-bar")) doc["eta_bar"] = a.eta_bar;
  if (given("--delay")) doc["delay"] = a.delay;
  if (given("--gamma")) doc["gamma"] = a.gamma;
  if (given("--pmean")) doc["pmean"] = a.pmean;
  if (given("--pcap")) doc["pcap"] = a.pcap;
  if (given("--permutation-file")) {
    doc["permutation_file"] = a.permutation_file;
    if (!given("--delay")) doc["delay"] = "replay";
  }
  if (given("--horizon")) doc["horizon"] = a.horizon;
  if (given("--record-every")) doc["record_every"] = a.record_every;
  if (given("--seeds")) doc["seeds"] = a.seeds;
  if (given("--regret")) doc["regret"] = a.regret;
  try {
    return config_from_json(doc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_run(const RunArgs& a, const CLI::App& app) {
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");
  std::string name = a.preset.empty() ? "custom" : a.preset;
  PresetOptions options;
  options.jobs = a.jobs;
  if (name == "custom") {
    options.custom = build_config(a, app);
  } else {
    if (!a.config.empty()) throw UsageError("--config only applies to the custom preset");
    if (app.count("--horizon")) options.horizon = a.horizon;
    if (app.count("--record-every")) options.record_every = a.record_every;
    if (app.count("--seeds")) options.seeds = a.seeds;
  }
  std::string hash;
  try {
    hash = preset_hash(name, options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path dir = std::filesystem::path(a.out) / (name + "-" + hash);
  const PresetResult result = run_preset(name, options);
  write_preset(result, dir);
  if (!a.quiet) {
    for (const auto& [group, idx] : result.best) {
      const auto& c = result.points[idx];
      std::cout << group << ": eta " << format_double(c.result.mean.rate.eta) << "  eta_bar "
                << format_double(c.result.mean.rate.eta_bar) << "  final kl_main "
                << format_double(c.final_kl_main) << "\n";
    }
  }
  std::cout << dir.string() << "\n";
  return kOk;
}

// -- validate ------------------------------------------------------------------

struct ValidateArgs {
  std::string game;
  std::string delay;
  std::int64_t gamma = -1;  // unset
  double pmean = 1.0;
  bool pcap = false;
  std::string permutation_file;
  std::size_t agents = 1;
  Iteration horizon = 5000;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

std::string join(const std::vector<Iteration>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size() && k < 10; ++k) s += (k ? " " : "") + std::to_string(v[k]);
  if (v.size() > 10) s += " ...";
  return s;
}

bool report(const std::string& what, const ScheduleReport& r) {
  std::cout << what << ": max displacement " << r.max_displacement << ", mean delay "
            << format_double(r.mean_delay) << ", duplicates " << r.duplicates.size()
            << ", missing " << r.missing.size() << ", out of range " << r.out_of_range.size()
            << (r.ok() ? "  PASS\n" : "  FAIL\n");
  if (!r.duplicates.empty()) std::cout << "  duplicates: " << join(r.duplicates) << "\n";
  if (!r.missing.empty()) std::cout << "  missing: " << join(r.missing) << "\n";
  if (!r.out_of_range.empty()) std::cout << "  out of range at t: " << join(r.out_of_range) << "\n";
  if (!r.displacement_ok) std::cout << "  displacement bound violated\n";
  return r.ok();
}

int cmd_validate(const ValidateArgs& a) {
  if (a.game.empty() && a.delay.empty() && a.permutation_file.empty()) {
    throw UsageError("validate needs --game, --delay or --permutation-file");
  }
  bool ok = true;
  if (!a.game.empty()) {
    std::optional<PolymatrixGame> loaded;
    try {
      loaded = load_game(a.game);
    } catch (const std::exception& e) {
      std::cout << "game: invalid: " << e.what() << "  FAIL\n";
      return kFail;
    }
    const PolymatrixGame& game = *loaded;
    print_stats(game);
    const auto v = a.samples > 0
                       ? check_zero_sum(game, ZeroSumMode::kSampled, a.samples, 1e-12, a.seed)
                       : check_zero_sum(game, ZeroSumMode::kExactPairwise);
    std::cout << "zero-sum: max residual " << format_double(v.max_residual)
              << (v.pass ? "  PASS\n" : "  FAIL\n");
    ok = ok && v.pass;
  }
  if (!a.permutation_file.empty()) {
    const auto table = load_permutation_file(a.permutation_file);
    std::map<std::size_t, std::vector<Iteration>> per_agent;
    for (const auto& [key, kappa] : table) per_agent[key.first].push_back(kappa);
    // Without --gamma only injectivity and range are checked.
    DelaySpec spec = a.gamma >= 0 ? DelaySpec::Permuted(a.gamma) : DelaySpec{DelayKind::kReplay};
    for (const auto& [agent, kappas] : per_agent) {
      ok = report("agent " + std::to_string(agent), validate_kappa_sequence(kappas, spec)) && ok;
    }
  } else if (!a.delay.empty()) {
    DelaySpec spec;
    try {
      spec.kind = parse_delay_kind(a.delay);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (spec.kind == DelayKind::kReplay) throw UsageError("use --permutation-file for replay");
    spec.gamma = std::max<std::int64_t>(a.gamma, 0);
    spec.poisson_mean = a.pmean;
    spec.poisson_cap = a.pcap;
    for (std::size_t agent = 0; agent < a.agents; ++agent) {
      ok = report("agent " + std::to_string(agent),
                  validate_schedule(spec, a.agents, a.seed, a.horizon, agent)) &&
           ok;
    }
  }
  return ok ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed entropy-regularized OMWU on zero-sum polymatrix games"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a random zero-sum polymatrix game");
  g->add_option("--n", gen.n, "Number of players")->check(CLI::PositiveNumber);
  g->add_option("--actions", gen.actions, "Actions per player")->check(CLI::PositiveNumber);
  g->add_option("--graph", gen.graph, "'complete' or edges like 0-1,1-2");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output path ('-' for stdout)");

  QreArgs qre;
  auto* q = app.add_subcommand("qre", "Compute the quantal response equilibrium");
  q->add_option("--game", qre.game, "Game file")->required();
  q->add_option("--tau", qre.tau, "Entropy regularization");
  q->add_option("--tol", qre.tol, "Residual tolerance");
  q->add_option("--max-iter", qre.max_iter, "Iteration cap");
  q->add_option("--out", qre.out, "Output path ('-' for stdout)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run an experiment preset or a single config");
  r->add_option("--preset", run.preset, "fig1a fig1b fig1c fig2a fig2b fig2c custom");
  r->add_option("--config", run.config, "JSON config (mirror of the flags)");
  r->add_option("--game", run.game, "Game file (default: generated per seed)");
  r->add_option("--n", run.n, "Players of generated games");
  r->add_option("--actions", run.actions, "Actions of generated games");
  r->add_option("--graph", run.graph, "Graph of generated games");
  r->add_option("--tau", run.tau, "Entropy regularization");
  r->add_option("--eta", run.eta, "Learning rate or 'safe'");
  r->add_option("--eta-bar", run.eta_bar, "Extrapolation rate (implies two-timescale)");
  r->add_flag("--two-timescale", run.two_timescale, "Two-timescale mode");
  r->add_option("--delay", run.delay, "none fixed uniform poisson permuted");
  r->add_option("--gamma", run.gamma, "Delay bound");
  r->add_option("--pmean", run.pmean, "Poisson mean delay");
  r->add_flag("--pcap", run.pcap, "Cap Poisson delays at 10 * mean");
  r->add_option("--permutation-file", run.permutation_file, "Replay table 'i t kappa'");
  r->add_option("--horizon", run.horizon, "Iterations T");
  r->add_option("--record-every", run.record_every, "Record every k iterations");
  r->add_option("--seeds", run.seeds, "Seeds, e.g. 0,1,2")->delimiter(',');
  r->add_flag("--regret", run.regret, "Record per-player regret");
  r->add_option("--out", run.out, "Output root directory");
  r->add_option("--jobs", run.jobs, "Concurrent seeds");
  r->add_flag("--quiet", run.quiet, "Only print the output directory");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check a game or a delay schedule");
  v->add_option("--game", val.game, "Game file to check for the zero-sum property");
  v->add_option("--samples", val.samples, "Sampled check with this many profiles");
  v->add_option("--delay", val.delay, "Schedule kind to check");
  v->add_option("--gamma", val.gamma, "Delay bound");
  v->add_option("--pmean", val.pmean, "Poisson mean delay");
  v->add_flag("--pcap", val.pcap, "Cap Poisson delays");
  v->add_option("--permutation-file", val.permutation_file, "Replay table to check");
  v->add_option("--agents", val.agents, "Number of agents")->check(CLI::PositiveNumber);
  v->add_option("--horizon", val.horizon, "Iterations");
  v->add_option("--seed", val.seed, "Schedule seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*q) return cmd_qre(qre);
    if (*r) return cmd_run(run, *r);
    if (*v) return cmd_validate(val);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const SeedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.divergence() ? kDiverged : kFail;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
