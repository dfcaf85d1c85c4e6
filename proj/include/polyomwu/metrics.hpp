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

// Equilibrium metrics: KL divergences, regularized best-response values, the
// QRE / NE gaps, a QRE solver and per-player regret.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "polyomwu/game.hpp"

namespace polyomwu {

// Raised by kl() when p puts mass where q has none.
class InfiniteDivergence : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// sum_k p_k log(p_k / q_k), with 0 log 0 = 0.
double kl(std::span<const double> p, std::span<const double> q);

// Sum of per-player kl.
double kl_profile(const StrategyProfile& p, const StrategyProfile& q);

// max over the simplex of <pi, q> + tau H(pi): tau * logsumexp(q / tau) for
// tau > 0, max_k q_k for tau = 0.
double br_value(std::span<const double> payoffs, double tau);

// max_i [br_value(A_i pi, tau) - u_{i,tau}(pi)], clamped at zero.
double qre_gap(const PolymatrixGame& game, const StrategyProfile& profile, double tau);

// max_i [max_k (A_i pi)_k - pi_i^T A_i pi], clamped at zero.
double ne_gap(const PolymatrixGame& game, const StrategyProfile& profile);

// Same gaps from precomputed payoff vectors A_i pi.
double qre_gap(const StrategyProfile& profile, const BlockVector& payoffs, double tau);
double ne_gap(const StrategyProfile& profile, const BlockVector& payoffs);

// max_i || pi_i - softmax(A_i pi / tau) ||_inf.
double qre_residual(const PolymatrixGame& game, const StrategyProfile& profile,
                    double tau);

struct QreSolution {
  StrategyProfile profile;
  double tau = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // filled when requested
};

struct QreOptions {
  double tol = 1e-10;
  std::size_t max_iter = 2'000'000;
  bool record_trace = false;
};

// Runs synchronous single-timescale OMWU from the uniform profile with
// eta = min{1/(2 tau), 1/(4 d_max a_inf)} until qre_residual of the main
// iterate is <= tol. On hitting max_iter returns converged = false with the
// best residual seen.
QreSolution compute_qre(const PolymatrixGame& game, double tau,
                        const QreOptions& options = {});

// Reference QRE for (game, tau) at the default tolerance, memoized by
// (game_hash, tau). Thread-safe. Throws std::runtime_error if the solver
// does not converge.
const QreSolution& cached_qre(const PolymatrixGame& game, double tau);

// tau KL(pi || qre) + (d_max^2 a_inf^2 / tau) KL(qre || pi).
double qre_gap_kl_bound(const PolymatrixGame& game, const StrategyProfile& profile,
                        const QreSolution& qre, double tau);

// Streaming regret of every player against the best fixed strategy in
// hindsight. add() takes one extrapolated profile pibar^(t) together with its
// payoff vectors A pibar^(t).
class RegretAccumulator {
 public:
  RegretAccumulator(std::span<const std::size_t> action_sizes, double tau);

  void add(const StrategyProfile& profile, const BlockVector& payoffs);

  std::size_t horizon() const { return horizon_; }
  // Throws std::logic_error when nothing has been added.
  double regret(Player i) const;
  std::vector<double> regrets() const;

 private:
  double tau_;
  std::size_t horizon_ = 0;
  BlockVector cumulative_payoff_;           // sum_t A_i pibar^(t)
  std::vector<double> cumulative_utility_;  // sum_t u_{i,tau}(pibar^(t))
};

// Regret of player i over the history pibar^(1..T).
double regret(const PolymatrixGame& game, std::span<const StrategyProfile> history,
              Player i, double tau);

}  // namespace polyomwu
