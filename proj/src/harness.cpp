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

#include "polyomwu/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <system_error>

#include "polyomwu/content_hash.hpp"
#include "polyomwu/kernels.hpp"

namespace polyomwu {

using nlohmann::json;

GameSource GameSource::Generated(std::size_t n, std::size_t actions, GraphSpec graph) {
  GameSource s;
  s.kind = Kind::kGenerated;
  s.n = n;
  s.actions = actions;
  s.graph = std::move(graph);
  return s;
}

GameSource GameSource::File(std::filesystem::path path) {
  GameSource s;
  s.kind = Kind::kFile;
  s.path = std::move(path);
  return s;
}

GameSource GameSource::Inline(PolymatrixGame game) {
  GameSource s;
  s.kind = Kind::kInline;
  s.game = std::make_shared<const PolymatrixGame>(std::move(game));
  return s;
}

PolymatrixGame GameSource::resolve(std::uint64_t seed) const {
  switch (kind) {
    case Kind::kGenerated: return random_zero_sum_game(n, actions, graph, seed);
    case Kind::kFile: return load_game(path);
    case Kind::kInline:
      if (!game) throw std::invalid_argument("GameSource: inline game missing");
      return *game;
  }
  throw std::logic_error("GameSource: bad kind");
}

void RunConfig::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be >= 0");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (record_every < 1) throw std::invalid_argument("record-every must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (eta) {
    if (!(*eta > 0.0) || !std::isfinite(*eta)) throw std::invalid_argument("eta must be > 0");
    if (*eta * tau >= 1.0) throw std::invalid_argument("eta * tau must be < 1");
  }
  if (eta_bar) {
    if (mode != Timescale::kTwo) {
      throw std::invalid_argument("eta-bar requires two-timescale mode");
    }
    if (!(*eta_bar > 0.0) || *eta_bar * tau >= 1.0) {
      throw std::invalid_argument("eta-bar must be > 0 with eta-bar * tau < 1");
    }
  }
  switch (delay.kind) {
    case DelayKind::kFixed:
    case DelayKind::kBoundedUniform:
    case DelayKind::kPermuted:
      if (delay.gamma < 0) throw std::invalid_argument("gamma must be >= 0");
      break;
    case DelayKind::kPoisson:
      if (!(delay.poisson_mean > 0.0)) throw std::invalid_argument("pmean must be > 0");
      break;
    case DelayKind::kReplay:
      if (permutation_file.empty()) {
        throw std::invalid_argument("replay delays need a permutation file");
      }
      break;
    case DelayKind::kNone: break;
  }
  if (game.kind == GameSource::Kind::kGenerated && (game.n < 2 || game.actions < 1)) {
    throw std::invalid_argument("generated games need n >= 2 and actions >= 1");
  }
  if (game.kind == GameSource::Kind::kFile && game.path.empty()) {
    throw std::invalid_argument("game file path is empty");
  }
}

namespace {

DelaySchedule make_schedule(const RunConfig& config, std::size_t n, std::uint64_t seed) {
  if (config.delay.kind == DelayKind::kReplay) {
    return DelaySchedule::replay(n, load_permutation_file(config.permutation_file));
  }
  return DelaySchedule(config.delay, n, seed);
}

std::int64_t effective_gamma(const RunConfig& config) {
  if (config.delay.kind == DelayKind::kPoisson) {
    return static_cast<std::int64_t>(std::llround(config.delay.poisson_mean));
  }
  if (config.delay.kind == DelayKind::kReplay) {
    return DelaySchedule::replay(1, load_permutation_file(config.permutation_file))
        .max_delay()
        .value_or(0);
  }
  return config.delay.max_delay().value_or(0);
}

}  // namespace

RateSetting resolve_rates(const RunConfig& config, const GameStats& stats) {
  RateSetting rate{config.mode, config.tau, 0.0, 0.0};
  if (config.eta) {
    rate.eta = *config.eta;
  } else {
    DelayContext context;
    RateRegime regime = RateRegime::kSync;
    switch (config.delay.kind) {
      case DelayKind::kNone: break;
      case DelayKind::kBoundedUniform:
      case DelayKind::kPoisson:
        regime = RateRegime::kRandomDelay;
        context.constants = delay_constants(config.delay);
        break;
      case DelayKind::kFixed:
        regime = RateRegime::kFixedDelay;
        context.gamma = config.delay.gamma;
        break;
      case DelayKind::kPermuted:
      case DelayKind::kReplay:
        regime = RateRegime::kPermuted;
        context.gamma = effective_gamma(config);
        break;
    }
    rate.eta = safe_rate(regime, stats, config.tau, context).eta;
  }
  if (config.mode == Timescale::kSingle) {
    rate.eta_bar = rate.eta;
  } else {
    rate.eta_bar = config.eta_bar ? *config.eta_bar
                                  : two_timescale_rate(rate.eta, config.tau,
                                                       effective_gamma(config));
  }
  if (!rate.is_valid()) {
    throw std::invalid_argument("invalid learning rates: eta = " + format_double(rate.eta) +
                                ", eta-bar = " + format_double(rate.eta_bar));
  }
  return rate;
}

FeedbackHistory::FeedbackHistory(std::size_t depth, std::span<const std::size_t> sizes)
    : slots_(depth, BlockVector(sizes)), index_(depth, -1), zero_(sizes) {
  if (depth == 0) throw std::invalid_argument("FeedbackHistory: depth must be >= 1");
}

void FeedbackHistory::put(Iteration s, const BlockVector& payoffs) {
  if (s == 0) zero_ = payoffs;
  const auto slot = static_cast<std::size_t>(s) % slots_.size();
  slots_[slot] = payoffs;
  index_[slot] = s;
}

const BlockVector& FeedbackHistory::get(Iteration s) const {
  if (s == 0) return zero_;
  const auto slot = static_cast<std::size_t>(s) % slots_.size();
  if (s < 0 || index_[slot] != s) {
    throw std::logic_error("feedback history: index " + std::to_string(s) +
                           " was evicted or never stored");
  }
  return slots_[slot];
}

namespace {

StrategyProfile profile_of(const BlockVector& logits) {
  StrategyProfile p(logits.block_sizes());
  for (std::size_t i = 0; i < logits.num_blocks(); ++i) softmax(logits[i], p[i]);
  return p;
}

// KL(p || softmax(logits)) where logits are normalized log-probabilities.
double kl_to_logits(const StrategyProfile& p, const BlockVector& logits) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    double di = 0.0;
    const auto pi = p[i];
    const auto li = logits[i];
    for (std::size_t k = 0; k < pi.size(); ++k) {
      if (pi[k] > 0.0) di += pi[k] * (std::log(pi[k]) - li[k]);
    }
    d += std::max(di, 0.0);
  }
  return d;
}

// KL(softmax(a) || softmax(b)) for normalized logits.
double kl_between_logits(const StrategyProfile& pa, const BlockVector& a,
                         const BlockVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.num_blocks(); ++i) {
    double di = 0.0;
    const auto p = pa[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] > 0.0) di += p[k] * (a[i][k] - b[i][k]);
    }
    d += std::max(di, 0.0);
  }
  return d;
}

bool all_finite(const BlockVector& v) {
  return std::ranges::all_of(v.flat(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory run_on(const RunConfig& config, const PolymatrixGame& game,
                  const StrategyProfile& qre, std::uint64_t seed) {
  config.validate();
  if (!qre.same_shape(BlockVector(game.action_sizes()))) {
    throw std::invalid_argument("run: QRE reference does not match the game");
  }
  const GameStats stats = game_stats(game);
  const auto& sizes = game.action_sizes();
  const std::size_t n = game.num_players();
  const double tau = config.tau;

  Trajectory out;
  out.rate = resolve_rates(config, stats);
  out.seed = seed;
  out.game_hash = game_hash(game);
  const double eta = out.rate.eta;
  const double eta_bar = out.rate.eta_bar;

  DelaySchedule schedule = make_schedule(config, n, seed);
  const auto max_delay = schedule.max_delay();
  const std::size_t depth = max_delay ? static_cast<std::size_t>(*max_delay) + 1
                                      : static_cast<std::size_t>(config.horizon) + 1;
  FeedbackHistory history(depth, sizes);

  BlockVector main(sizes);
  for (std::size_t i = 0; i < n; ++i) {
    std::ranges::fill(main[i], -std::log(static_cast<double>(sizes[i])));
  }
  BlockVector extrap = main;  // logits of pibar^(t)
  StrategyProfile extrap_profile = profile_of(extrap);
  BlockVector payoffs(sizes);
  payoff_vectors(game, extrap_profile, payoffs);
  history.put(0, payoffs);
  out.kl0 = kl_to_logits(qre, main);

  std::optional<RegretAccumulator> regret;
  if (config.record_regret) regret.emplace(sizes, tau);
  RunInternals internals;
  internals.d_max = static_cast<double>(stats.d_max);
  internals.a_inf = stats.a_inf;
  internals.synchronous_single =
      config.delay.kind == DelayKind::kNone && config.mode == Timescale::kSingle;

  BlockVector feedback(sizes);
  for (Iteration t = 0; t < config.horizon; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const Iteration kappa = schedule.next_kappa(i, t);
      const auto src = history.get(kappa)[i];
      std::ranges::copy(src, feedback[i].begin());
    }
    try {
      if (t >= 1) mwu_step_all(main, feedback, eta, tau);
    } catch (const std::domain_error& e) {
      throw DivergenceError(t, "divergence at t = " + std::to_string(t) + ": " + e.what());
    }
    if (!all_finite(main)) {
      throw DivergenceError(t, "divergence at t = " + std::to_string(t) +
                                   ": non-finite main logits");
    }

    if (t % config.record_every == 0) {
      TrajectoryRow row;
      row.t = t;
      row.kl_main = kl_to_logits(qre, main);
      row.kl_extrap = kl_to_logits(qre, extrap);
      const BlockVector& current = history.get(t);
      row.qre_gap = tau > 0.0 ? qre_gap(extrap_profile, current, tau) : 0.0;
      row.ne_gap = ne_gap(extrap_profile, current);
      if (regret) {
        row.regret = regret->horizon() == 0 ? std::vector<double>(n, 0.0) : regret->regrets();
      }
      if (config.retain_internals) {
        internals.kl_main_extrap.push_back(kl_between_logits(profile_of(main), main, extrap));
      }
      if (!std::isfinite(row.kl_main) || !std::isfinite(row.kl_extrap) ||
          !std::isfinite(row.qre_gap) || !std::isfinite(row.ne_gap)) {
        throw DivergenceError(t, "divergence at t = " + std::to_string(t) +
                                     ": non-finite metric");
      }
      out.rows.push_back(std::move(row));
    }

    extrap = main;
    try {
      mwu_step_all(extrap, feedback, eta_bar, tau);
    } catch (const std::domain_error& e) {
      throw DivergenceError(t, "divergence at t = " + std::to_string(t) + ": " + e.what());
    }
    if (!all_finite(extrap)) {
      throw DivergenceError(t, "divergence at t = " + std::to_string(t) +
                                   ": non-finite extrapolation logits");
    }
    extrap_profile = profile_of(extrap);
    payoff_vectors(game, extrap_profile, payoffs);
    history.put(t + 1, payoffs);
    if (regret) regret->add(extrap_profile, payoffs);
  }

  out.final_main = profile_of(main);
  out.final_extrap = extrap_profile;
  if (config.retain_internals) out.internals = std::move(internals);
  return out;
}

Trajectory run(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const PolymatrixGame game = config.game.resolve(seed);
  if (!(config.tau > 0.0)) {
    throw std::invalid_argument("run: KL metrics need a QRE reference, which needs tau > 0");
  }
  const QreSolution* qre = nullptr;
  try {
    qre = &cached_qre(game, config.tau);
  } catch (const std::domain_error& e) {
    throw DivergenceError(0, std::string("QRE reference diverged: ") + e.what());
  }
  return run_on(config, game, qre->profile, seed);
}

AveragedRun run_averaged(const RunConfig& config, int jobs) {
  config.validate();
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  const std::size_t s = config.seeds.size();
  std::vector<std::optional<Trajectory>> results(s);
  std::vector<std::exception_ptr> errors(s);

  const auto count = static_cast<std::int64_t>(s);
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
  for (std::int64_t k = 0; k < count; ++k) {
    try {
      results[k] = run(config, config.seeds[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  for (std::size_t k = 0; k < s; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const DivergenceError& e) {
      throw SeedError(config.seeds[k], e.what(), true);
    } catch (const std::exception& e) {
      throw SeedError(config.seeds[k], e.what(), false);
    }
  }

  AveragedRun out;
  for (auto& r : results) out.per_seed.push_back(std::move(*r));
  const Trajectory& first = out.per_seed.front();
  Trajectory& mean = out.mean;
  mean.rate = first.rate;
  mean.seed = first.seed;
  mean.rows = first.rows;
  mean.game_hash = first.game_hash;
  const double w = 1.0 / static_cast<double>(s);
  double kl0 = 0.0;
  for (auto& row : mean.rows) {
    row.kl_main = row.kl_extrap = row.qre_gap = row.ne_gap = 0.0;
    std::ranges::fill(row.regret, 0.0);
  }
  for (const auto& traj : out.per_seed) {
    if (traj.rows.size() != mean.rows.size()) {
      throw std::logic_error("run_averaged: trajectories have different lengths");
    }
    if (traj.game_hash != mean.game_hash) mean.game_hash.clear();
    kl0 += w * traj.kl0;
    for (std::size_t r = 0; r < traj.rows.size(); ++r) {
      const auto& src = traj.rows[r];
      auto& dst = mean.rows[r];
      dst.kl_main += w * src.kl_main;
      dst.kl_extrap += w * src.kl_extrap;
      dst.qre_gap += w * src.qre_gap;
      dst.ne_gap += w * src.ne_gap;
      if (src.regret.size() != dst.regret.size()) {
        throw std::logic_error("run_averaged: regret width differs across seeds");
      }
      for (std::size_t i = 0; i < src.regret.size(); ++i) dst.regret[i] += w * src.regret[i];
    }
  }
  mean.kl0 = kl0;
  return out;
}

RateFit fit_rate(const Trajectory& trajectory, Iteration t0, Iteration t1) {
  if (t1 < t0) throw std::invalid_argument("fit_rate: empty window");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const auto& row : trajectory.rows) {
    if (row.t < t0 || row.t > t1) continue;
    if (!(row.kl_main > 0.0)) {
      throw std::domain_error("fit_rate: non-positive kl_main at t = " +
                              std::to_string(row.t));
    }
    const auto x = static_cast<double>(row.t);
    const double y = std::log(row.kl_main);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_rate: need at least two rows in the window");
  const auto mm = static_cast<double>(m);
  const double den = mm * sxx - sx * sx;
  const double slope = (mm * sxy - sx * sy) / den;
  return {std::exp(slope), slope, t0, t1};
}

double potential(const Trajectory& trajectory, std::size_t row) {
  if (!trajectory.internals || !trajectory.internals->synchronous_single) {
    throw std::logic_error(
        "potential: needs a synchronous single-timescale run with internals retained");
  }
  const auto& in = *trajectory.internals;
  if (row >= trajectory.rows.size() || row >= in.kl_main_extrap.size()) {
    throw std::out_of_range("potential: row out of range");
  }
  const double c = 1.0 - 2.0 * trajectory.rate.eta * in.d_max * in.a_inf;
  return trajectory.rows[row].kl_main + c * in.kl_main_extrap[row];
}

// -- Output -------------------------------------------------------------------

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const Trajectory& trajectory) {
  const std::size_t width =
      trajectory.rows.empty() ? 0 : trajectory.rows.front().regret.size();
  std::string out = "t,kl_main,kl_extrap,qre_gap,ne_gap";
  for (std::size_t i = 0; i < width; ++i) out += ",regret_" + std::to_string(i);
  out += '\n';
  for (const auto& row : trajectory.rows) {
    out += std::to_string(row.t);
    for (double v : {row.kl_main, row.kl_extrap, row.qre_gap, row.ne_gap}) {
      out += ',';
      out += format_double(v);
    }
    for (double v : row.regret) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

json config_to_json(const RunConfig& config) {
  json j;
  switch (config.game.kind) {
    case GameSource::Kind::kFile: j["game"] = config.game.path.string(); break;
    case GameSource::Kind::kInline:
      j["game"] = nullptr;
      j["game_hash"] = config.game.game ? game_hash(*config.game.game) : "";
      break;
    case GameSource::Kind::kGenerated: j["game"] = nullptr; break;
  }
  j["n"] = config.game.n;
  j["actions"] = config.game.actions;
  if (config.game.graph.complete) {
    j["graph"] = "complete";
  } else {
    json edges = json::array();
    for (const auto& [a, b] : config.game.graph.edges) edges.push_back({a, b});
    j["graph"] = edges;
  }
  j["tau"] = config.tau;
  j["two_timescale"] = config.mode == Timescale::kTwo;
  j["eta"] = config.eta ? json(*config.eta) : json("safe");
  j["eta_bar"] = config.eta_bar ? json(*config.eta_bar) : json(nullptr);
  j["delay"] = to_string(config.delay.kind);
  j["gamma"] = config.delay.gamma;
  j["pmean"] = config.delay.poisson_mean;
  j["pcap"] = config.delay.poisson_cap;
  j["permutation_file"] = config.permutation_file.empty()
                              ? json(nullptr)
                              : json(config.permutation_file.string());
  j["horizon"] = config.horizon;
  j["record_every"] = config.record_every;
  j["seeds"] = config.seeds;
  j["regret"] = config.record_regret;
  return j;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::vector<std::string> known = {
      "game", "game_hash", "n", "actions", "graph", "tau", "two_timescale", "eta",
      "eta_bar", "delay", "gamma", "pmean", "pcap", "permutation_file", "horizon",
      "record_every", "seeds", "regret", "out", "jobs", "preset"};
  for (const auto& [key, value] : doc.items()) {
    if (std::ranges::find(known, key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  RunConfig c;
  try {
    c.game.n = doc.value("n", c.game.n);
    c.game.actions = doc.value("actions", c.game.actions);
    if (doc.contains("graph")) {
      const auto& g = doc["graph"];
      if (g.is_string()) {
        if (g.get<std::string>() != "complete") {
          throw std::invalid_argument("config: graph must be \"complete\" or an edge list");
        }
        c.game.graph = GraphSpec::Complete();
      } else {
        std::vector<std::pair<Player, Player>> edges;
        for (const auto& e : g) edges.emplace_back(e.at(0).get<Player>(), e.at(1).get<Player>());
        c.game.graph = GraphSpec::EdgeList(std::move(edges));
      }
    }
    if (doc.contains("game") && !doc["game"].is_null()) {
      c.game.kind = GameSource::Kind::kFile;
      c.game.path = doc["game"].get<std::string>();
    }
    c.tau = doc.value("tau", c.tau);
    if (doc.value("two_timescale", false)) c.mode = Timescale::kTwo;
    if (doc.contains("eta")) {
      const auto& e = doc["eta"];
      if (e.is_string()) {
        if (e.get<std::string>() != "safe") {
          throw std::invalid_argument("config: eta must be a number or \"safe\"");
        }
      } else {
        c.eta = e.get<double>();
      }
    }
    if (doc.contains("eta_bar") && !doc["eta_bar"].is_null()) {
      c.eta_bar = doc["eta_bar"].get<double>();
      c.mode = Timescale::kTwo;
    }
    c.delay.kind = parse_delay_kind(doc.value("delay", std::string("none")));
    c.delay.gamma = doc.value("gamma", c.delay.gamma);
    c.delay.poisson_mean = doc.value("pmean", c.delay.poisson_mean);
    c.delay.poisson_cap = doc.value("pcap", c.delay.poisson_cap);
    if (doc.contains("permutation_file") && !doc["permutation_file"].is_null()) {
      c.permutation_file = doc["permutation_file"].get<std::string>();
    }
    c.horizon = doc.value("horizon", c.horizon);
    c.record_every = doc.value("record_every", c.record_every);
    if (doc.contains("seeds")) c.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    c.record_regret = doc.value("regret", c.record_regret);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const RunConfig& config) {
  return git_blob_sha1(config_to_json(config).dump());
}

json profile_to_json(const StrategyProfile& profile) {
  json out = json::array();
  for (std::size_t i = 0; i < profile.num_blocks(); ++i) {
    const auto b = profile[i];
    out.push_back(std::vector<double>(b.begin(), b.end()));
  }
  return out;
}

StrategyProfile profile_from_json(const json& doc) {
  try {
    auto blocks = doc.get<std::vector<std::vector<double>>>();
    return StrategyProfile::from_blocks(blocks);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("profile: ") + e.what());
  }
}

json qre_to_json(const QreSolution& qre) {
  return {{"tau", qre.tau},
          {"residual", qre.residual},
          {"iterations", qre.iterations},
          {"converged", qre.converged},
          {"profile", profile_to_json(qre.profile)}};
}

QreSolution qre_from_json(const json& doc) {
  QreSolution q;
  try {
    q.tau = doc.at("tau").get<double>();
    q.residual = doc.at("residual").get<double>();
    q.iterations = doc.at("iterations").get<std::size_t>();
    q.converged = doc.at("converged").get<bool>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("qre: ") + e.what());
  }
  q.profile = profile_from_json(doc.at("profile"));
  return q;
}

json run_metadata(const RunConfig& config, const Trajectory& trajectory,
                  const std::string& csv) {
  json j;
  j["config"] = config_to_json(config);
  j["config_hash"] = config_hash(config);
  j["seed"] = trajectory.seed;
  j["rates"] = {{"mode", to_string(trajectory.rate.mode)},
                {"tau", trajectory.rate.tau},
                {"eta", trajectory.rate.eta},
                {"eta_bar", trajectory.rate.eta_bar}};
  j["game_hash"] = trajectory.game_hash;
  j["kl0"] = trajectory.kl0;
  j["csv_sha1"] = git_blob_sha1(csv);
  if (trajectory.final_main.num_blocks() > 0) {
    j["final_main"] = {{"profile", profile_to_json(trajectory.final_main)}};
    j["final_extrap"] = {{"profile", profile_to_json(trajectory.final_extrap)}};
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_averaged_run(const RunConfig& config, const AveragedRun& result,
                        const std::filesystem::path& dir) {
  for (const auto& traj : result.per_seed) {
    const std::string stem = "seed_" + std::to_string(traj.seed);
    const std::string csv = trajectory_csv(traj);
    write_text(dir / (stem + ".csv"), csv);
    write_text(dir / (stem + ".json"), run_metadata(config, traj, csv).dump(2) + "\n");
  }
  const std::string csv = trajectory_csv(result.mean);
  json meta = run_metadata(config, result.mean, csv);
  meta.erase("seed");
  meta["seeds"] = config.seeds;
  write_text(dir / "mean.csv", csv);
  write_text(dir / "mean.json", meta.dump(2) + "\n");
}

}  // namespace polyomwu
