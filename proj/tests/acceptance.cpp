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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "polyomwu/delay.hpp"
#include "polyomwu/harness.hpp"
#include "polyomwu/kernels.hpp"
#include "polyomwu/metrics.hpp"
#include "polyomwu/omwu.hpp"
#include "polyomwu/presets.hpp"
#include "polyomwu/rng.hpp"

using namespace polyomwu;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Base config: n = 10, |S_i| = 10, complete graph, tau = 0.1, seeds 0..4.
RunConfig standard() {
  RunConfig c = preset_base();
  c.record_every = 1;
  return c;
}

StrategyProfile random_profile(std::span<const std::size_t> sizes, Engine& engine) {
  StrategyProfile p(sizes);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double total = 0.0;
    for (double& v : p[i]) {
      v = -std::log(1.0 - uniform_real(engine, 0.0, 1.0));
      total += v;
    }
    for (double& v : p[i]) v /= total;
  }
  return p;
}

// -- 1-3: synchronous runs at eta = 1/36 ------------------------------------

constexpr double kSyncEta = 1.0 / 36.0;
constexpr Iteration kSyncHorizon = 3000;

std::vector<Trajectory>& sync_runs() {
  static std::vector<Trajectory> runs = [] {
    RunConfig c = standard();
    c.eta = kSyncEta;
    c.horizon = kSyncHorizon + 2;  // row T + 1 holds pibar^(T+1)
    c.retain_internals = true;
    std::vector<Trajectory> out;
    for (auto seed : c.seeds) out.push_back(run(c, seed));
    return out;
  }();
  return runs;
}

Outcome sync_contraction() {
  const auto start = Clock::now();
  const auto& runs = sync_runs();
  const double elapsed = seconds_since(start);
  bool ok = elapsed < 30.0;
  double worst_main = -1e300, worst_extrap = -1e300;
  for (const auto& traj : runs) {
    const auto stats = game_stats(random_zero_sum_game(10, 10, GraphSpec::Complete(), traj.seed));
    ok = ok && kSyncEta <= safe_rate(RateRegime::kSync, stats, 0.1).eta;
    const double q = 1.0 - kSyncEta * 0.1;
    for (Iteration t = 0; t <= kSyncHorizon; ++t) {
      const auto& row = traj.rows[static_cast<std::size_t>(t)];
      const auto& next = traj.rows[static_cast<std::size_t>(t + 1)];
      const double bound = std::pow(q, static_cast<double>(t)) * traj.kl0;
      worst_main = std::max(worst_main, row.kl_main - bound);
      worst_extrap = std::max(worst_extrap, next.kl_extrap - 2.0 * bound);
    }
  }
  ok = ok && worst_main <= 1e-9 && worst_extrap <= 1e-9;
  return {ok, "max excess main " + fmt(worst_main) + ", extrap " + fmt(worst_extrap) + ", " +
                  fmt(elapsed) + " s"};
}

Outcome potential_monotone() {
  double worst = -1e300;
  for (const auto& traj : sync_runs()) {
    const double q = 1.0 - traj.rate.eta * traj.rate.tau;
    for (std::size_t r = 0; r + 1 < traj.rows.size(); ++r) {
      worst = std::max(worst, potential(traj, r + 1) - q * potential(traj, r));
    }
  }
  return {worst <= 1e-10, "max L(t+1) - (1 - eta tau) L(t) = " + fmt(worst)};
}

Outcome sync_qre_gap() {
  double worst = -1e300;
  for (const auto& traj : sync_runs()) {
    const auto& in = *traj.internals;
    const double eta = traj.rate.eta, tau = traj.rate.tau;
    const double c = 1.0 / eta + 2.0 * in.d_max * in.d_max * in.a_inf * in.a_inf / tau;
    for (Iteration t = 1; t <= kSyncHorizon; ++t) {
      const double bound = c * std::pow(1.0 - eta * tau, static_cast<double>(t - 1)) * traj.kl0;
      worst = std::max(worst, traj.rows[static_cast<std::size_t>(t)].qre_gap - bound);
    }
  }
  return {worst <= 1e-9, "max excess " + fmt(worst)};
}

// -- 4: QRE reference --------------------------------------------------------

// Damped fixed-point iteration pi <- (1 - a) pi + a softmax(A pi / tau).
StrategyProfile damped_qre(const PolymatrixGame& game, double tau) {
  StrategyProfile pi = StrategyProfile::uniform(game.action_sizes());
  for (int it = 0; it < 200000; ++it) {
    StrategyProfile next(game.action_sizes());
    double change = 0.0;
    for (Player i = 0; i < game.num_players(); ++i) {
      auto f = payoff_vector(game, pi, i);
      for (double& v : f) v /= tau;
      std::vector<double> br(f.size());
      softmax(f, br);
      for (std::size_t k = 0; k < br.size(); ++k) {
        next[i][k] = 0.5 * pi[i][k] + 0.5 * br[k];
        change = std::max(change, std::abs(next[i][k] - pi[i][k]));
      }
    }
    pi = next;
    if (change < 1e-15) break;
  }
  return pi;
}

Outcome qre_reference() {
  double worst_res = 0.0, worst_diff = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto game = random_zero_sum_game(2, 2, GraphSpec::Complete(), 100 + seed);
    QreOptions opts;
    opts.tol = 1e-10;
    const auto sol = compute_qre(game, 0.5, opts);
    ok = ok && sol.converged;
    worst_res = std::max(worst_res, qre_residual(game, sol.profile, 0.5));
    const auto oracle = damped_qre(game, 0.5);
    for (std::size_t k = 0; k < oracle.total_size(); ++k) {
      worst_diff = std::max(worst_diff, std::abs(oracle.flat()[k] - sol.profile.flat()[k]));
    }
  }
  ok = ok && worst_res <= 1e-10 && worst_diff <= 1e-8;
  return {ok, "max residual " + fmt(worst_res) + ", max |qre - damped| " + fmt(worst_diff)};
}

// -- 5-7: properties on random games ----------------------------------------

PolymatrixGame corpus_game(std::uint64_t k) {
  Engine e = make_stream(k, StreamPurpose::kProfile, 0);
  const auto n = static_cast<std::size_t>(uniform_int(e, 2, 6));
  const auto s = static_cast<std::size_t>(uniform_int(e, 2, 5));
  if (k % 3 == 2) {
    std::vector<std::pair<Player, Player>> edges;
    for (Player i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return random_zero_sum_game(n, s, GraphSpec::EdgeList(std::move(edges)), k);
  }
  return random_zero_sum_game(n, s, GraphSpec::Complete(), k);
}

Outcome cross_sum_zero() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto game = corpus_game(k);
    Engine e = make_stream(k, StreamPurpose::kProfile, 1);
    const auto p = random_profile(game.action_sizes(), e);
    const auto q = random_profile(game.action_sizes(), e);
    worst = std::max(worst, std::abs(cross_sum(game, p, q)));
  }
  return {worst <= 1e-10, "max |cross_sum| " + fmt(worst) + " over 100 triples"};
}

struct GapCorpus {
  double worst_kl = -1e300;
  double worst_bridge = -1e300;
};

const GapCorpus& gap_corpus() {
  static const GapCorpus corpus = [] {
    GapCorpus c;
    for (std::uint64_t g = 0; g < 10; ++g) {
      const auto game = corpus_game(1000 + g);
      const auto stats = game_stats(game);
      const double d = static_cast<double>(stats.d_max);
      const double a = stats.a_inf;
      for (double tau : {0.01, 0.1, 1.0}) {
        const auto& qre = cached_qre(game, tau).profile;
        Engine e = make_stream(g, StreamPurpose::kProfile, 2);
        for (int k = 0; k < 10; ++k) {
          const auto pi = random_profile(game.action_sizes(), e);
          const double gap = qre_gap(game, pi, tau);
          const double bound =
              tau * kl_profile(pi, qre) + d * d * a * a / tau * kl_profile(qre, pi);
          c.worst_kl = std::max(c.worst_kl, gap - bound);
          const double bridge =
              gap + tau * std::log(static_cast<double>(stats.s_max));
          c.worst_bridge = std::max(c.worst_bridge, ne_gap(game, pi) - bridge);
        }
      }
    }
    return c;
  }();
  return corpus;
}

Outcome qre_gap_kl() {
  const double w = gap_corpus().worst_kl;
  return {w <= 1e-9, "max excess " + fmt(w) + " over 100 profiles x 3 tau"};
}

Outcome ne_bridge() {
  const double w = gap_corpus().worst_bridge;
  return {w <= 1e-12, "max excess " + fmt(w)};
}

// -- 8: bounded-uniform random delays ---------------------------------------

Outcome random_delay_trend() {
  const auto start = Clock::now();
  RunConfig delayed = standard();
  delayed.horizon = 5001;
  delayed.record_every = 10;
  delayed.delay = DelaySpec::BoundedUniform(10);
  RunConfig sync = delayed;
  sync.delay = DelaySpec::None();
  const auto d = run_averaged(delayed);
  const auto s = run_averaged(sync);
  const double elapsed = seconds_since(start);

  bool finite = true, larger = true;
  double at500 = 0.0, at5000 = 0.0;
  Iteration first_violation = -1;
  for (std::size_t r = 0; r < d.mean.rows.size(); ++r) {
    const auto& row = d.mean.rows[r];
    finite = finite && std::isfinite(row.kl_main);
    if (row.t == 500) at500 = row.kl_main;
    if (row.t == 5000) at5000 = row.kl_main;
    if (row.t >= 1 && !(row.kl_main > s.mean.rows[r].kl_main)) {
      if (larger) first_violation = row.t;
      larger = false;
    }
  }
  const bool ok = finite && at5000 < at500 && larger && elapsed < 120.0;
  std::string detail = "eta " + fmt(d.mean.rate.eta) + ", kl_main(500) " + fmt(at500) +
                       " -> kl_main(5000) " + fmt(at5000) + ", sync(5000) " +
                       fmt(s.mean.rows.back().kl_main) + ", " + fmt(elapsed) + " s";
  if (!larger) detail += ", not above sync at t = " + std::to_string(first_violation);
  return {ok, detail};
}

// -- 9: fixed delays ---------------------------------------------------------

Outcome fixed_delay_bound() {
  constexpr Iteration gamma = 50, horizon = 5000;
  RunConfig c = standard();
  c.delay = DelaySpec::Fixed(gamma);
  c.mode = Timescale::kTwo;
  c.horizon = horizon + 2;
  double worst = -1e300;
  bool ok = true;
  for (auto seed : c.seeds) {
    const auto traj = run(c, seed);
    const double eta = traj.rate.eta, tau = traj.rate.tau;
    ok = ok && traj.rate.eta_bar == two_timescale_rate(eta, tau, gamma);
    const double q = 1.0 - eta * tau;
    for (Iteration t = gamma; t <= horizon; ++t) {
      const double bound = std::pow(q, static_cast<double>(t + 1)) * traj.kl0 +
                           std::pow(q, static_cast<double>(t + 1 - gamma));
      const double lhs = std::max(traj.rows[static_cast<std::size_t>(t + 1)].kl_main,
                                  0.5 * traj.rows[static_cast<std::size_t>(t - gamma + 1)].kl_extrap);
      worst = std::max(worst, lhs - bound);
    }
  }
  ok = ok && worst <= 1e-9;
  return {ok, "max excess " + fmt(worst)};
}

// -- 10: permuted delays -----------------------------------------------------

Outcome permuted_delays() {
  constexpr Iteration gamma = 25, horizon = 5000;
  RunConfig c = standard();
  c.delay = DelaySpec::Permuted(gamma);
  c.mode = Timescale::kTwo;
  c.horizon = horizon + 1;
  double worst = -1e300;
  for (auto seed : c.seeds) {
    const auto game = random_zero_sum_game(10, 10, GraphSpec::Complete(), seed);
    const auto& qre = cached_qre(game, c.tau).profile;
    const auto traj = run_on(c, game, qre, seed);
    const double eta = traj.rate.eta, tau = traj.rate.tau;
    const auto n = static_cast<double>(game.num_players());
    const auto span = static_cast<double>(horizon - 2 * gamma);
    double main_sum = 0.0, extrap_sum = 0.0;
    for (Iteration t = 2 * gamma; t <= horizon - 1; ++t) {
      main_sum += traj.rows[static_cast<std::size_t>(t + 1)].kl_main;
      extrap_sum += traj.rows[static_cast<std::size_t>(t - gamma + 1)].kl_extrap;
    }
    const double lhs = std::max(main_sum, extrap_sum / 3.0) / span;
    // Largest single-player KL(qre_i || uniform_i).
    const auto uniform = StrategyProfile::uniform(game.action_sizes());
    double kl_i = 0.0;
    for (Player i = 0; i < game.num_players(); ++i) kl_i = std::max(kl_i, kl(qre[i], uniform[i]));
    const double rhs = (kl_i + n) / (eta * tau * span) +
                       24.0 * n * static_cast<double>(gamma) * std::log(10.0) / span;
    worst = std::max(worst, lhs - rhs);
  }

  std::string detail = "average bound max excess " + fmt(worst);
  bool ok = worst <= 0.0;
  for (double eta : {1e-3, 1e-4}) {
    RunConfig single = preset_base();
    single.delay = DelaySpec::Permuted(gamma);
    single.eta = eta;
    RunConfig two = single;
    two.mode = Timescale::kTwo;
    const double s = run_averaged(single).mean.rows.back().kl_main;
    const double t = run_averaged(two).mean.rows.back().kl_main;
    ok = ok && t < s;
    detail += "; eta " + fmt(eta) + ": two " + fmt(t) + " vs single " + fmt(s);
  }
  return {ok, detail};
}

// -- 11: regret ----------------------------------------------------------------

Outcome regret_bounds() {
  RunConfig c = standard();
  c.horizon = 2000;
  c.record_regret = true;
  double worst = -1e300, worst_sum = 1e300;
  bool ok = true;
  for (auto seed : c.seeds) {
    const auto game = random_zero_sum_game(10, 10, GraphSpec::Complete(), seed);
    const auto stats = game_stats(game);
    const double eta = no_regret_rate(stats, c.tau);
    c.eta = eta;
    const auto traj = run_on(c, game, cached_qre(game, c.tau).profile, seed);
    ok = ok && traj.rate.eta <= 1.0 / (4.0 * stats.d_max * stats.a_inf + 4.0 * c.tau);
    double log_sum = 0.0;
    for (Player k = 0; k < game.num_players(); ++k) {
      log_sum += std::log(static_cast<double>(game.action_size(k)));
    }
    for (std::size_t r = 1; r < traj.rows.size(); ++r) {
      double sum = 0.0;
      for (Player i = 0; i < game.num_players(); ++i) {
        const double bound = std::log(static_cast<double>(game.action_size(i))) / eta +
                             16.0 * eta * static_cast<double>(game.degree(i)) * stats.a_inf *
                                 stats.a_inf * log_sum;
        worst = std::max(worst, traj.rows[r].regret[i] - bound);
        sum += traj.rows[r].regret[i];
      }
      worst_sum = std::min(worst_sum, sum);
    }
  }
  ok = ok && worst <= 1e-6 && worst_sum >= -1e-9;
  return {ok, "max excess over bound " + fmt(worst) + ", min summed regret " + fmt(worst_sum)};
}

// -- 12: delay models ----------------------------------------------------------

double poisson_gof_pvalue(const std::vector<std::int64_t>& samples, double mean) {
  boost::math::poisson_distribution<double> pois(mean);
  const double n = static_cast<double>(samples.size());
  std::int64_t last = 0;
  while (n * (1.0 - boost::math::cdf(pois, static_cast<double>(last))) >= 5.0) ++last;
  std::vector<double> observed(static_cast<std::size_t>(last) + 1, 0.0);
  for (auto x : samples) observed[static_cast<std::size_t>(std::min(x, last))] += 1.0;
  double stat = 0.0;
  for (std::int64_t k = 0; k <= last; ++k) {
    const double p = k < last ? boost::math::pdf(pois, static_cast<double>(k))
                              : 1.0 - boost::math::cdf(pois, static_cast<double>(k - 1));
    const double diff = observed[static_cast<std::size_t>(k)] - n * p;
    stat += diff * diff / (n * p);
  }
  boost::math::chi_squared_distribution<double> chi(static_cast<double>(last));
  return boost::math::cdf(boost::math::complement(chi, stat));
}

std::vector<std::int64_t> delay_draws(const DelaySpec& spec, Iteration burn, Iteration count,
                                      std::uint64_t seed) {
  DelaySchedule s(spec, 1, seed);
  std::vector<std::int64_t> out;
  for (Iteration t = 0; t < burn + count; ++t) {
    const Iteration k = s.next_kappa(0, t);
    if (t >= burn) out.push_back(t - k);
  }
  return out;
}

Outcome delay_suite() {
  bool ok = true;
  std::string detail;
  for (std::size_t agent = 0; agent < 10; ++agent) {
    const auto report = validate_schedule(DelaySpec::Permuted(25), 10, 0, 5000, agent);
    ok = ok && report.ok() && report.max_displacement <= 25;
  }
  detail += std::string("permuted ") + (ok ? "ok" : "FAILED");

  constexpr std::int64_t gamma = 25;
  const auto u = delay_draws(DelaySpec::BoundedUniform(gamma), gamma, 100000, 1);
  double mean = 0.0;
  for (auto x : u) mean += static_cast<double>(x);
  mean /= static_cast<double>(u.size());
  const double sd = std::sqrt((std::pow(gamma + 1.0, 2) - 1.0) / 12.0);
  const double se = sd / std::sqrt(static_cast<double>(u.size()));
  const double z = (mean - gamma / 2.0) / se;
  ok = ok && std::abs(z) <= 3.0;
  detail += "; uniform mean " + fmt(mean) + " (z " + fmt(z) + ")";

  for (double m : {1.0, 5.0}) {
    const auto p = delay_draws(DelaySpec::Poisson(m), 200, 100000, 2);
    const double pv = poisson_gof_pvalue(p, m);
    ok = ok && pv > 0.001;
    detail += "; poisson(" + fmt(m) + ") p " + fmt(pv);
  }
  return {ok, detail};
}

// -- 13: determinism -----------------------------------------------------------

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    out[fs::relative(e.path(), root).string()] = s.str();
  }
  return out;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "polyomwu_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::size_t files = 0;
  std::string failed;
  for (const auto& name : preset_names()) {
    if (name == "custom") continue;
    std::map<std::string, std::string> outputs[2];
    for (int k = 0; k < 2; ++k) {
      const auto dir = root / std::to_string(k);
      const std::string cmd = std::string(POLYOMWU_CLI) + " run --preset " + name +
                              " --horizon 1000 --seeds 0,1,2 --quiet --jobs " +
                              (k == 0 ? "1" : "3") + " --out '" + dir.string() +
                              "' > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        failed += " " + name + "(exit)";
      }
      outputs[k] = csv_files(dir);
      fs::remove_all(dir);
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) {
      ok = false;
      failed += " " + name;
    }
    files += outputs[0].size();
  }
  fs::remove_all(root);
  std::string detail = std::to_string(files) + " CSV files compared across 6 presets";
  if (!failed.empty()) detail += ", differing:" + failed;
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sync last-iterate contraction", sync_contraction},
      {"potential monotonicity", potential_monotone},
      {"sync QRE-gap bound", sync_qre_gap},
      {"QRE reference quality", qre_reference},
      {"cross-sum vanishes", cross_sum_zero},
      {"QRE-gap vs KL bound", qre_gap_kl},
      {"NE-gap bridge", ne_bridge},
      {"random-delay trend", random_delay_trend},
      {"fixed-delay bound", fixed_delay_bound},
      {"permuted-delay average bound and two-timescale gain", permuted_delays},
      {"regret bounds", regret_bounds},
      {"delay-model suite", delay_suite},
      {"preset determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
