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

// Feedback delay models. At iteration t agent i receives the payoff vector
// built from the extrapolated profile of iteration kappa_i(t) = max(t - d, 0),
// where the delay d is drawn per agent and per iteration.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyomwu/rng.hpp"

namespace polyomwu {

using Iteration = std::int64_t;

enum class DelayKind {
  kNone,
  kFixed,            // d = gamma
  kBoundedUniform,   // d ~ Uniform{0..gamma}
  kPoisson,          // d ~ Poisson(mean), optionally capped at 10 * mean
  kPermuted,         // bounded displacement, each index >= 1 delivered once
  kReplay,           // explicit (i, t, kappa) table
};

std::string to_string(DelayKind kind);
// Accepts none, fixed, uniform, poisson, permuted, replay.
DelayKind parse_delay_kind(const std::string& name);

struct DelaySpec {
  DelayKind kind = DelayKind::kNone;
  std::int64_t gamma = 0;     // fixed / bounded-uniform / permuted
  double poisson_mean = 1.0;  // poisson
  bool poisson_cap = false;   // cap draws at 10 * poisson_mean

  static DelaySpec None() { return {}; }
  static DelaySpec Fixed(std::int64_t g) { return {DelayKind::kFixed, g}; }
  static DelaySpec BoundedUniform(std::int64_t g) {
    return {DelayKind::kBoundedUniform, g};
  }
  static DelaySpec Poisson(double mean, bool cap = false) {
    return {DelayKind::kPoisson, 0, mean, cap};
  }
  static DelaySpec Permuted(std::int64_t g) { return {DelayKind::kPermuted, g}; }

  // Largest possible t - kappa, or nullopt when unbounded.
  std::optional<std::int64_t> max_delay() const;
};

// Constants of the tail assumption on random delays, plus the second-moment
// bound used by the asynchronous regret guarantee.
struct DelayConstants {
  double zeta = 0.0;
  double L = 0.0;
  double sigma2 = 0.0;
};

// bounded-uniform(gamma): zeta = 1 + 1/gamma, L = e gamma (gamma + 1),
//   sigma2 = gamma (gamma + 1).
// poisson(mean): zeta = 1 + 1/mean, L = e mean (1 + mean),
//   sigma2 = E[d (d + 1)] = mean^2 + 2 mean.
// Throws std::invalid_argument for the other kinds and for gamma = 0.
DelayConstants delay_constants(const DelaySpec& spec);

// Out-of-order calls to DelaySchedule::next_kappa.
class ScheduleOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Stateful per-run generator of kappa_i(t). Every agent has its own RNG
// substream make_stream(seed, kDelay, i) and must be queried once per t in
// increasing order starting at t = 0.
class DelaySchedule {
 public:
  DelaySchedule(const DelaySpec& spec, std::size_t num_agents, std::uint64_t seed);

  // Replays an explicit table (see load_permutation_file).
  static DelaySchedule replay(std::size_t num_agents,
                              std::map<std::pair<std::size_t, Iteration>, Iteration> table);

  Iteration next_kappa(std::size_t agent, Iteration t);

  const DelaySpec& spec() const { return spec_; }
  std::size_t num_agents() const { return agents_.size(); }

  // Largest delay this schedule can emit, nullopt when unbounded.
  std::optional<std::int64_t> max_delay() const;

 private:
  struct AgentState {
    Engine engine;
    Iteration next_t = 0;
    std::set<Iteration> pending;  // permuted: undelivered indices >= 1
  };

  Iteration permuted_kappa(AgentState& agent, Iteration t);

  DelaySpec spec_;
  std::vector<AgentState> agents_;
  std::map<std::pair<std::size_t, Iteration>, Iteration> table_;
  std::optional<std::int64_t> table_max_delay_;
};

struct ScheduleReport {
  std::int64_t max_displacement = 0;
  double mean_delay = 0.0;
  std::vector<Iteration> duplicates;      // indices >= 1 emitted more than once
  std::vector<Iteration> missing;         // permuted: uncovered s in [1, T-gamma-1]
  std::vector<Iteration> out_of_range;    // t where kappa < 0 or kappa > t
  bool displacement_ok = true;            // bounded kinds: t - kappa <= gamma
  bool ok() const {
    return duplicates.empty() && missing.empty() && out_of_range.empty() &&
           displacement_ok;
  }
};

// Replays kappa_i(0..horizon-1) from a fresh schedule built from (spec, seed)
// and checks the invariants of the delay kind. Duplicates and coverage are
// only enforced for the permuted kind; for other kinds the duplicate list is
// left empty.
ScheduleReport validate_schedule(const DelaySpec& spec, std::size_t num_agents,
                                 std::uint64_t seed, Iteration horizon,
                                 std::size_t agent);

// Same checks applied to an arbitrary kappa sequence for one agent.
ScheduleReport validate_kappa_sequence(const std::vector<Iteration>& kappas,
                                       const DelaySpec& spec);

// Permutation files: one "i t kappa" triple of integers per line.
std::map<std::pair<std::size_t, Iteration>, Iteration> load_permutation_file(
    const std::filesystem::path& path);
void save_permutation_file(
    const std::map<std::pair<std::size_t, Iteration>, Iteration>& table,
    const std::filesystem::path& path);

}  // namespace polyomwu
