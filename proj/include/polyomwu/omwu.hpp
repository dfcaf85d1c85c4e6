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

// Entropy-regularized optimistic multiplicative weights, in log space.
//
// Each agent keeps two distributions: the main iterate pi_i and the
// extrapolation pibar_i that the other agents observe. With feedback
// f = A_i pibar^(kappa_i(t)) at iteration t:
//
//   t >= 1:  log pi_i^(t)      = (1 - eta tau)  log pi_i^(t-1) + eta  f  + c
//            log pibar_i^(t+1) = (1 - etab tau) log pi_i^(t)   + etab f  + c'
//
// Both updates of one iteration use the same f. In single-timescale mode
// etab = eta; the two-timescale mode inflates etab to compensate for delay.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyomwu/delay.hpp"
#include "polyomwu/game.hpp"

namespace polyomwu {

// (1 - rate tau) logits + rate feedback, recentred by its log-sum-exp.
// Requires equal lengths, rate > 0, tau >= 0 and rate * tau <= 1.
// Throws std::domain_error on non-finite feedback.
std::vector<double> mwu_step(std::span<const double> logits,
                             std::span<const double> feedback, double rate,
                             double tau);

// Softmax with max shift.
std::vector<double> normalize(std::span<const double> logits);

// Extrapolation rate with 1 - etab tau = (1 - eta tau)^(gamma + 1), or
// (gamma + 1) eta when tau = 0. Requires eta tau < 1.
double two_timescale_rate(double eta, double tau, std::int64_t gamma);

enum class Timescale { kSingle, kTwo };

std::string to_string(Timescale mode);
Timescale parse_timescale(const std::string& name);

struct RateSetting {
  Timescale mode = Timescale::kSingle;
  double tau = 0.0;
  double eta = 0.0;
  double eta_bar = 0.0;

  // eta > 0, eta_bar >= eta, eta tau < 1, eta_bar tau < 1, and
  // eta_bar == eta in single-timescale mode.
  bool is_valid() const;
};

enum class RateRegime { kSync, kRandomDelay, kFixedDelay, kPermuted };

std::string to_string(RateRegime regime);

// What the delay-dependent bounds need: gamma for fixed / permuted delays,
// the tail constants for random delays.
struct DelayContext {
  std::optional<std::int64_t> gamma;
  std::optional<DelayConstants> constants;
};

// Largest learning rate the convergence guarantee of each regime allows.
//   sync:         min{1/(2 tau), 1/(4 d A)}                     (single)
//   random delay: min{tau/(24 d^2 A^2 (L + 1)), (zeta-1)/(tau zeta)} (single)
//   fixed delay:  min{1/(2 tau (g+1)), 1/(5 d A (g+1)^2)}       (two-timescale)
//   permuted:     min{1/(2 tau (g+1)), 1/(28 d A (g+1)^(5/2))}  (two-timescale)
// with d = d_max, A = a_inf and g = gamma. Terms with a zero denominator are
// dropped. Throws std::invalid_argument when the context lacks what the
// regime needs, or when tau = 0 for a delay regime.
RateSetting safe_rate(RateRegime regime, const GameStats& stats, double tau,
                      const DelayContext& context = {});

// Rate cap of the synchronous no-regret guarantee: 1/(4 d A + 4 tau).
double no_regret_rate(const GameStats& stats, double tau);

// One agent's state. The simulation harness runs the same update on all
// agents at once through the batched kernels; this is the per-agent form.
struct AgentState {
  std::vector<double> main_logits;
  std::vector<double> extrap_logits;
  double eta = 0.0;
  double eta_bar = 0.0;

  static AgentState uniform(std::size_t num_actions, double eta, double eta_bar);

  // One iteration with delayed feedback f received at iteration t.
  void step(std::span<const double> feedback, double tau, std::int64_t t);

  std::vector<double> main() const { return normalize(main_logits); }
  std::vector<double> extrapolation() const { return normalize(extrap_logits); }
};

}  // namespace polyomwu
