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

#include "polyomwu/omwu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polyomwu/kernels.hpp"

namespace polyomwu {

std::vector<double> mwu_step(std::span<const double> logits,
                             std::span<const double> feedback, double rate,
                             double tau) {
  if (logits.size() != feedback.size() || logits.empty()) {
    throw std::invalid_argument("mwu_step: logits and feedback lengths differ");
  }
  if (!(rate > 0.0) || tau < 0.0 || rate * tau > 1.0) {
    throw std::invalid_argument("mwu_step: need rate > 0, tau >= 0, rate*tau <= 1");
  }
  const double keep = 1.0 - rate * tau;
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!std::isfinite(feedback[k])) {
      throw std::domain_error("mwu_step: non-finite feedback");
    }
    // keep == 0 drops the prior exactly, even if a logit is -inf.
    out[k] = (keep == 0.0 ? 0.0 : keep * logits[k]) + rate * feedback[k];
  }
  const double lse = log_sum_exp(out);
  for (double& v : out) v -= lse;
  return out;
}

std::vector<double> normalize(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  softmax(logits, p);
  return p;
}

double two_timescale_rate(double eta, double tau, std::int64_t gamma) {
  if (!(eta > 0.0) || tau < 0.0 || eta * tau >= 1.0) {
    throw std::invalid_argument("two_timescale_rate: need eta > 0 and eta*tau < 1");
  }
  if (gamma < 0) throw std::invalid_argument("two_timescale_rate: gamma must be >= 0");
  const auto k = static_cast<double>(gamma + 1);
  if (tau == 0.0) return k * eta;
  // 1 - (1 - x)^k without cancellation for small x.
  return -std::expm1(k * std::log1p(-eta * tau)) / tau;
}

std::string to_string(Timescale mode) {
  return mode == Timescale::kSingle ? "single" : "two";
}

Timescale parse_timescale(const std::string& name) {
  if (name == "single") return Timescale::kSingle;
  if (name == "two" || name == "two-timescale") return Timescale::kTwo;
  throw std::invalid_argument("unknown timescale mode '" + name + "'");
}

bool RateSetting::is_valid() const {
  if (!(eta > 0.0) || !(eta_bar >= eta) || tau < 0.0) return false;
  if (eta * tau >= 1.0 || eta_bar * tau >= 1.0) return false;
  if (mode == Timescale::kSingle && eta_bar != eta) return false;
  return std::isfinite(eta) && std::isfinite(eta_bar);
}

std::string to_string(RateRegime regime) {
  switch (regime) {
    case RateRegime::kSync: return "sync";
    case RateRegime::kRandomDelay: return "random-delay";
    case RateRegime::kFixedDelay: return "fixed-delay";
    case RateRegime::kPermuted: return "permuted";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// num / den, or +inf when den is zero.
double ratio(double num, double den) { return den > 0.0 ? num / den : kInf; }

std::int64_t require_gamma(const DelayContext& context, RateRegime regime) {
  if (!context.gamma || *context.gamma < 0) {
    throw std::invalid_argument("safe_rate: regime " + to_string(regime) +
                                " needs gamma >= 0");
  }
  return *context.gamma;
}

}  // namespace

RateSetting safe_rate(RateRegime regime, const GameStats& stats, double tau,
                      const DelayContext& context) {
  if (tau < 0.0) throw std::invalid_argument("safe_rate: tau must be >= 0");
  if (regime != RateRegime::kSync && !(tau > 0.0)) {
    throw std::invalid_argument("safe_rate: delay regimes need tau > 0");
  }
  const auto d = static_cast<double>(stats.d_max);
  const double a = stats.a_inf;
  RateSetting rate{Timescale::kSingle, tau, 0.0, 0.0};
  switch (regime) {
    case RateRegime::kSync:
      rate.eta = std::min(ratio(1.0, 2.0 * tau), ratio(ratio(1.0, 4.0 * d), a));
      break;
    case RateRegime::kRandomDelay: {
      if (!context.constants) {
        throw std::invalid_argument("safe_rate: random-delay regime needs delay constants");
      }
      const auto& c = *context.constants;
      if (!(c.zeta > 1.0) || c.L < 0.0) {
        throw std::invalid_argument("safe_rate: need zeta > 1 and L >= 0");
      }
      rate.eta = std::min(ratio(tau, 24.0 * d * d * a * a * (c.L + 1.0)),
                          (c.zeta - 1.0) / (tau * c.zeta));
      break;
    }
    case RateRegime::kFixedDelay:
    case RateRegime::kPermuted: {
      const auto g1 = static_cast<double>(require_gamma(context, regime) + 1);
      const double coupling = regime == RateRegime::kFixedDelay
                                  ? 5.0 * d * a * g1 * g1
                                  : 28.0 * d * a * std::pow(g1, 2.5);
      rate.eta = std::min(ratio(1.0, 2.0 * tau * g1), ratio(1.0, coupling));
      rate.mode = Timescale::kTwo;
      break;
    }
  }
  if (!std::isfinite(rate.eta)) {
    throw std::invalid_argument("safe_rate: unbounded rate (tau = 0 on a zero game)");
  }
  rate.eta_bar = rate.mode == Timescale::kTwo
                     ? two_timescale_rate(rate.eta, tau, *context.gamma)
                     : rate.eta;
  return rate;
}

double no_regret_rate(const GameStats& stats, double tau) {
  const double den = 4.0 * static_cast<double>(stats.d_max) * stats.a_inf + 4.0 * tau;
  if (!(den > 0.0)) throw std::invalid_argument("no_regret_rate: unbounded rate");
  return 1.0 / den;
}

AgentState AgentState::uniform(std::size_t num_actions, double eta, double eta_bar) {
  if (num_actions == 0) throw std::invalid_argument("AgentState: no actions");
  const double v = -std::log(static_cast<double>(num_actions));
  return {std::vector<double>(num_actions, v), std::vector<double>(num_actions, v),
          eta, eta_bar};
}

void AgentState::step(std::span<const double> feedback, double tau, std::int64_t t) {
  if (t >= 1) main_logits = mwu_step(main_logits, feedback, eta, tau);
  extrap_logits = mwu_step(main_logits, feedback, eta_bar, tau);
}

}  // namespace polyomwu
