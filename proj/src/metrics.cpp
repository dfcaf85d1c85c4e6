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

#include "polyomwu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "polyomwu/kernels.hpp"
#include "polyomwu/omwu.hpp"

namespace polyomwu {

double kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl: length mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    if (q[k] <= 0.0) {
      throw InfiniteDivergence("kl: q has no mass at index " + std::to_string(k) +
                               " where p does");
    }
    d += p[k] * (std::log(p[k]) - std::log(q[k]));
  }
  return std::max(d, 0.0);
}

double kl_profile(const StrategyProfile& p, const StrategyProfile& q) {
  if (!p.same_shape(q)) throw std::invalid_argument("kl_profile: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) d += kl(p[i], q[i]);
  return d;
}

double br_value(std::span<const double> payoffs, double tau) {
  if (payoffs.empty()) throw std::invalid_argument("br_value: empty payoff vector");
  if (tau < 0.0) throw std::invalid_argument("br_value: tau must be >= 0");
  const double m = *std::ranges::max_element(payoffs);
  if (tau == 0.0) return m;
  double s = 0.0;
  for (double q : payoffs) s += std::exp((q - m) / tau);
  return m + tau * std::log(s);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

BlockVector payoffs_of(const PolymatrixGame& game, const StrategyProfile& profile) {
  BlockVector out(game.action_sizes());
  payoff_vectors(game, profile, out);
  return out;
}

}  // namespace

double qre_gap(const StrategyProfile& profile, const BlockVector& payoffs, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("qre_gap: tau must be > 0");
  if (!profile.same_shape(payoffs)) throw std::invalid_argument("qre_gap: shape mismatch");
  double gap = 0.0;
  for (std::size_t i = 0; i < profile.num_blocks(); ++i) {
    const double u = dot(profile[i], payoffs[i]) + tau * entropy(profile[i]);
    gap = std::max(gap, br_value(payoffs[i], tau) - u);
  }
  return gap;
}

double ne_gap(const StrategyProfile& profile, const BlockVector& payoffs) {
  if (!profile.same_shape(payoffs)) throw std::invalid_argument("ne_gap: shape mismatch");
  double gap = 0.0;
  for (std::size_t i = 0; i < profile.num_blocks(); ++i) {
    const double best = *std::ranges::max_element(payoffs[i]);
    gap = std::max(gap, best - dot(profile[i], payoffs[i]));
  }
  return gap;
}

double qre_gap(const PolymatrixGame& game, const StrategyProfile& profile, double tau) {
  if (!profile.is_valid(1e-9)) throw std::invalid_argument("qre_gap: invalid profile");
  return qre_gap(profile, payoffs_of(game, profile), tau);
}

double ne_gap(const PolymatrixGame& game, const StrategyProfile& profile) {
  return ne_gap(profile, payoffs_of(game, profile));
}

namespace {

double residual_from_payoffs(const StrategyProfile& profile, const BlockVector& payoffs,
                             double tau, std::vector<double>& scratch) {
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.num_blocks(); ++i) {
    const auto q = payoffs[i];
    scratch.resize(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) scratch[k] = q[k] / tau;
    softmax(scratch, scratch);
    for (std::size_t k = 0; k < q.size(); ++k) {
      worst = std::max(worst, std::abs(profile[i][k] - scratch[k]));
    }
  }
  return worst;
}

StrategyProfile profile_from_logits(const BlockVector& logits) {
  StrategyProfile p(logits.block_sizes());
  for (std::size_t i = 0; i < logits.num_blocks(); ++i) softmax(logits[i], p[i]);
  return p;
}

}  // namespace

double qre_residual(const PolymatrixGame& game, const StrategyProfile& profile,
                    double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("qre_residual: tau must be > 0");
  std::vector<double> scratch;
  return residual_from_payoffs(profile, payoffs_of(game, profile), tau, scratch);
}

QreSolution compute_qre(const PolymatrixGame& game, double tau,
                        const QreOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("compute_qre: tau must be > 0");
  if (!(options.tol > 0.0)) throw std::invalid_argument("compute_qre: tol must be > 0");
  const GameStats stats = game_stats(game);
  const double eta = safe_rate(RateRegime::kSync, stats, tau).eta;

  const auto& sizes = game.action_sizes();
  BlockVector main(sizes);
  for (std::size_t i = 0; i < main.num_blocks(); ++i) {
    std::ranges::fill(main[i], -std::log(static_cast<double>(sizes[i])));
  }
  BlockVector extrap = main;
  BlockVector feedback(sizes);
  BlockVector main_payoffs(sizes);
  std::vector<double> scratch;

  QreSolution best;
  best.tau = tau;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0;; ++t) {
    payoff_vectors(game, profile_from_logits(extrap), feedback);
    if (t >= 1) mwu_step_all(main, feedback, eta, tau);

    StrategyProfile current = profile_from_logits(main);
    payoff_vectors(game, current, main_payoffs);
    const double residual = residual_from_payoffs(current, main_payoffs, tau, scratch);
    if (options.record_trace) best.residual_trace.push_back(residual);
    if (residual < best.residual) {
      best.residual = residual;
      best.profile = std::move(current);
      best.iterations = t;
    }
    if (residual <= options.tol) {
      best.converged = true;
      return best;
    }
    if (t >= options.max_iter) return best;

    extrap = main;
    mwu_step_all(extrap, feedback, eta, tau);
  }
}

const QreSolution& cached_qre(const PolymatrixGame& game, double tau) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, double>, std::unique_ptr<QreSolution>> cache;
  const auto key = std::pair{game_hash(game), tau};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;
  }
  auto solution = std::make_unique<QreSolution>(compute_qre(game, tau));
  if (!solution->converged) {
    throw std::runtime_error("QRE solver did not converge (residual " +
                             std::to_string(solution->residual) + ")");
  }
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(solution));
  return *it->second;
}

double qre_gap_kl_bound(const PolymatrixGame& game, const StrategyProfile& profile,
                        const QreSolution& qre, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("qre_gap_kl_bound: tau must be > 0");
  const GameStats s = game_stats(game);
  const double coupling = static_cast<double>(s.d_max * s.d_max) * s.a_inf * s.a_inf / tau;
  double bound = tau * kl_profile(profile, qre.profile);
  if (coupling > 0.0) bound += coupling * kl_profile(qre.profile, profile);
  return bound;
}

// -- Regret -------------------------------------------------------------------

RegretAccumulator::RegretAccumulator(std::span<const std::size_t> action_sizes,
                                     double tau)
    : tau_(tau),
      cumulative_payoff_(action_sizes),
      cumulative_utility_(action_sizes.size(), 0.0) {
  if (tau < 0.0) throw std::invalid_argument("RegretAccumulator: tau must be >= 0");
}

void RegretAccumulator::add(const StrategyProfile& profile, const BlockVector& payoffs) {
  if (!profile.same_shape(cumulative_payoff_) || !payoffs.same_shape(cumulative_payoff_)) {
    throw std::invalid_argument("RegretAccumulator::add: shape mismatch");
  }
  for (std::size_t i = 0; i < profile.num_blocks(); ++i) {
    auto v = cumulative_payoff_[i];
    const auto q = payoffs[i];
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += q[k];
    double u = dot(profile[i], q);
    if (tau_ > 0.0) u += tau_ * entropy(profile[i]);
    cumulative_utility_[i] += u;
  }
  ++horizon_;
}

double RegretAccumulator::regret(Player i) const {
  if (horizon_ == 0) throw std::logic_error("regret: empty history");
  if (i >= cumulative_utility_.size()) throw std::out_of_range("regret: player out of range");
  const double comparator =
      br_value(cumulative_payoff_[i], static_cast<double>(horizon_) * tau_);
  return comparator - cumulative_utility_[i];
}

std::vector<double> RegretAccumulator::regrets() const {
  std::vector<double> out(cumulative_utility_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = regret(i);
  return out;
}

double regret(const PolymatrixGame& game, std::span<const StrategyProfile> history,
              Player i, double tau) {
  if (history.empty()) throw std::invalid_argument("regret: empty history");
  RegretAccumulator acc(game.action_sizes(), tau);
  BlockVector payoffs(game.action_sizes());
  for (const auto& profile : history) {
    payoff_vectors(game, profile, payoffs);
    acc.add(profile, payoffs);
  }
  return acc.regret(i);
}

}  // namespace polyomwu
