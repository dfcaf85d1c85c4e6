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

// Simulation harness: runs the delayed OMWU dynamics on a game and records
// distance-to-equilibrium metrics along the trajectory.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyomwu/delay.hpp"
#include "polyomwu/game.hpp"
#include "polyomwu/metrics.hpp"
#include "polyomwu/omwu.hpp"

namespace polyomwu {

// Where a run's game comes from. Generated games use the run seed, so every
// seed of an averaged run sees a fresh instance.
struct GameSource {
  enum class Kind { kGenerated, kFile, kInline };
  Kind kind = Kind::kGenerated;
  std::size_t n = 10;
  std::size_t actions = 10;
  GraphSpec graph;
  std::filesystem::path path;
  std::shared_ptr<const PolymatrixGame> game;

  static GameSource Generated(std::size_t n, std::size_t actions,
                              GraphSpec graph = GraphSpec::Complete());
  static GameSource File(std::filesystem::path path);
  static GameSource Inline(PolymatrixGame game);

  PolymatrixGame resolve(std::uint64_t seed) const;
};

struct RunConfig {
  GameSource game;
  double tau = 0.1;
  Timescale mode = Timescale::kSingle;
  std::optional<double> eta;      // nullopt: safe rate for the delay regime
  std::optional<double> eta_bar;  // two-timescale only; nullopt: two_timescale_rate
  DelaySpec delay;
  std::filesystem::path permutation_file;  // delay.kind == kReplay
  Iteration horizon = 5000;
  Iteration record_every = 1;
  std::vector<std::uint64_t> seeds{0};
  bool record_regret = false;
  bool retain_internals = false;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

// Learning rates a config resolves to on a given game.
RateSetting resolve_rates(const RunConfig& config, const GameStats& stats);

// Payoff vectors A pibar^(s) still reachable by a delay schedule. Index 0 is
// pinned; other indices live in a ring of the given depth, so a bounded delay
// gamma needs depth gamma + 1. get() throws std::logic_error for an evicted
// or never-stored index.
class FeedbackHistory {
 public:
  FeedbackHistory(std::size_t depth, std::span<const std::size_t> sizes);

  void put(Iteration s, const BlockVector& payoffs);
  const BlockVector& get(Iteration s) const;

 private:
  std::vector<BlockVector> slots_;
  std::vector<Iteration> index_;
  BlockVector zero_;
};

struct TrajectoryRow {
  Iteration t = 0;
  double kl_main = 0.0;    // KL(qre || pi^(t))
  double kl_extrap = 0.0;  // KL(qre || pibar^(t))
  double qre_gap = 0.0;    // of pibar^(t)
  double ne_gap = 0.0;     // of pibar^(t)
  std::vector<double> regret;  // per player over pibar^(1..t); empty unless enabled
};

// Quantities kept for potential-function checks.
struct RunInternals {
  std::vector<double> kl_main_extrap;  // KL(pi^(t) || pibar^(t)) per row
  double d_max = 0.0;
  double a_inf = 0.0;
  bool synchronous_single = false;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  RateSetting rate;
  std::uint64_t seed = 0;
  std::string game_hash;
  double kl0 = 0.0;  // KL(qre || uniform)
  StrategyProfile final_main;
  StrategyProfile final_extrap;
  std::optional<RunInternals> internals;
};

// Non-finite iterate at iteration t.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(Iteration t, const std::string& what)
      : std::runtime_error(what), t_(t) {}
  Iteration iteration() const { return t_; }

 private:
  Iteration t_;
};

// An error from one seed of an averaged run.
class SeedError : public std::runtime_error {
 public:
  SeedError(std::uint64_t seed, const std::string& what, bool divergence)
      : std::runtime_error("seed " + std::to_string(seed) + ": " + what),
        seed_(seed),
        divergence_(divergence) {}
  std::uint64_t seed() const { return seed_; }
  bool divergence() const { return divergence_; }

 private:
  std::uint64_t seed_;
  bool divergence_;
};

// Runs iterations t = 0..horizon-1 with the given seed; records rows at
// t = 0, k, 2k, ... For each t and agent i: draw kappa_i(t), take
// f_i = A_i pibar^(kappa_i(t)), update pi_i (t >= 1), then pibar_i^(t+1)
// from pi_i^(t) with the same f_i.
Trajectory run(const RunConfig& config, std::uint64_t seed);
inline Trajectory run(const RunConfig& config) { return run(config, config.seeds.at(0)); }

// Same as run() but on a caller-supplied game and QRE reference.
Trajectory run_on(const RunConfig& config, const PolymatrixGame& game,
                  const StrategyProfile& qre, std::uint64_t seed);

struct AveragedRun {
  Trajectory mean;
  std::vector<Trajectory> per_seed;
};

// Runs every seed (up to `jobs` concurrently) and averages each metric row by
// row in seed order.
AveragedRun run_averaged(const RunConfig& config, int jobs = 1);

struct RateFit {
  double rho = 1.0;  // per-iteration contraction exp(slope)
  double slope = 0.0;
  Iteration t0 = 0;
  Iteration t1 = 0;
};

// Least-squares slope of ln kl_main against t over rows with t in [t0, t1].
// Throws std::domain_error on non-positive KL in the window and
// std::invalid_argument on fewer than two rows.
RateFit fit_rate(const Trajectory& trajectory, Iteration t0, Iteration t1);

// L(t) = KL(qre || pi^(t)) + (1 - 2 eta d_max a_inf) KL(pi^(t) || pibar^(t))
// at the given row. Throws std::logic_error unless the run was synchronous,
// single-timescale and retained internals.
double potential(const Trajectory& trajectory, std::size_t row);

// -- Output -------------------------------------------------------------------

// Header t,kl_main,kl_extrap,qre_gap,ne_gap[,regret_0..regret_{n-1}].
std::string trajectory_csv(const Trajectory& trajectory);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& doc);
std::string config_hash(const RunConfig& config);

// Profiles serialize as an array of per-player probability arrays.
nlohmann::json profile_to_json(const StrategyProfile& profile);
StrategyProfile profile_from_json(const nlohmann::json& doc);

// {tau, residual, iterations, converged, profile}.
nlohmann::json qre_to_json(const QreSolution& qre);
QreSolution qre_from_json(const nlohmann::json& doc);

// Run metadata sidecar: config echo, seed, rates, hashes, final profiles.
nlohmann::json run_metadata(const RunConfig& config, const Trajectory& trajectory,
                            const std::string& csv);

// Writes seed_<s>.csv / seed_<s>.json per seed and mean.csv / mean.json.
void write_averaged_run(const RunConfig& config, const AveragedRun& result,
                        const std::filesystem::path& dir);

// Writes text to path, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace polyomwu
