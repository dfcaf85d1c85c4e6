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

#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "polyomwu/omwu.hpp"
#include "test_util.hpp"

using namespace polyomwu;
using namespace polyomwu::testing;

namespace {

std::vector<double> probs(const std::vector<double>& logits) { return normalize(logits); }

// pi'(k) proportional to pi(k)^(1 - rate tau) exp(rate f_k), on probabilities.
std::vector<double> multiplicative(const std::vector<double>& pi, const std::vector<double>& f,
                                   double rate, double tau) {
  std::vector<double> out(pi.size());
  double z = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    z += out[k] = std::pow(pi[k], 1.0 - rate * tau) * std::exp(rate * f[k]);
  }
  for (double& v : out) v /= z;
  return out;
}

}  // namespace

TEST_CASE("mwu_step examples") {
  const std::vector<double> logits{std::log(0.2), std::log(0.3), std::log(0.5)};
  const auto same = mwu_step(logits, std::vector<double>(3, 0.0), 0.7, 0.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(same[k] == doctest::Approx(logits[k]).epsilon(1e-15));

  const std::vector<double> f{0.3, -1.2, 2.0};
  const auto a = mwu_step(logits, f, 2.0, 0.5);
  const auto b = mwu_step(std::vector<double>{5.0, -7.0, 1.0}, f, 2.0, 0.5);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a[k] == b[k]);
    double z = 0.0;
    for (double x : f) z += std::exp(2.0 * x);
    CHECK(a[k] == doctest::Approx(2.0 * f[k] - std::log(z)).epsilon(1e-14));
  }
  // rate * tau = 1 drops even a -inf prior.
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(std::isfinite(mwu_step(std::vector<double>{ninf, 0.0, 0.0}, f, 2.0, 0.5)[0]));

  const auto u = mwu_step(std::vector<double>{std::log(0.5), std::log(0.5)},
                          std::vector<double>{1.0, -1.0}, 0.5, 0.0);
  const auto p = probs(u);
  const double oracle = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(p[0] == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.731059).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.268941).epsilon(1e-6));
}

TEST_CASE("mwu_step errors") {
  const std::vector<double> l{0.0, 0.0};
  CHECK_THROWS_AS(mwu_step(l, std::vector<double>{1.0, NAN}, 0.1, 0.1), std::domain_error);
  CHECK_THROWS_AS(mwu_step(l, std::vector<double>{1.0, INFINITY}, 0.1, 0.1), std::domain_error);
  CHECK_THROWS_AS(mwu_step(l, std::vector<double>{1.0}, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(mwu_step(l, l, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(mwu_step(l, l, 11.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(mwu_step(l, l, 0.1, -0.1), std::invalid_argument);
}

TEST_CASE("mwu_step matches the multiplicative form") {
  Engine e = make_stream(20, StreamPurpose::kProfile, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pi = random_simplex(5, e);
    std::vector<double> f(5), logits(5);
    for (double& x : f) x = uniform_real(e, -2.0, 2.0);
    for (std::size_t k = 0; k < 5; ++k) logits[k] = std::log(pi[k]);
    const double rate = uniform_real(e, 0.01, 1.0);
    const double tau = uniform_real(e, 0.0, 1.0);
    const auto got = probs(mwu_step(logits, f, rate, tau));
    const auto want = multiplicative(pi, f, rate, tau);
    for (std::size_t k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
  }
}

TEST_CASE("mwu_step properties") {
  Engine e = make_stream(21, StreamPurpose::kProfile, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(7), f(7);
    for (double& x : logits) x = uniform_real(e, -50.0, 50.0);
    for (double& x : f) x = uniform_real(e, -1e6, 1e6);
    const double rate = uniform_real(e, 1e-3, 1.0);
    const double tau = uniform_real(e, 0.0, 1.0);
    const auto out = mwu_step(logits, f, rate, tau);
    const auto p = probs(out);
    double total = 0.0;
    for (std::size_t k = 0; k < 7; ++k) {
      CHECK(std::isfinite(out[k]));
      CHECK(p[k] >= 0.0);
      total += p[k];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    // Adding a constant to the feedback does not move the distribution.
    const double c = uniform_real(e, -100.0, 100.0);
    std::vector<double> small(7);
    for (double& x : small) x = uniform_real(e, -3.0, 3.0);
    std::vector<double> small_shifted = small;
    for (double& x : small_shifted) x += c;
    const auto p1 = probs(mwu_step(logits, small, rate, tau));
    const auto p2 = probs(mwu_step(logits, small_shifted, rate, tau));
    for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(p1[k] - p2[k]) <= 1e-12);

    // Zero feedback scales the logit spread by exactly (1 - rate tau).
    const auto z = mwu_step(logits, std::vector<double>(7, 0.0), rate, tau);
    const auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return *hi - *lo;
    };
    CHECK(spread(z) == doctest::Approx((1.0 - rate * tau) * spread(logits)).epsilon(1e-12));
  }
}

TEST_CASE("normalize") {
  auto p = normalize(std::vector<double>{1.5, 1.5, 1.5, 1.5});
  for (double x : p) CHECK(x == 0.25);
  p = normalize(std::vector<double>{std::log(3.0), 0.0});
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));
  p = normalize(std::vector<double>{1000.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] >= 0.0);
  CHECK(p[1] < 1e-300);
}

TEST_CASE("two_timescale_rate") {
  CHECK(two_timescale_rate(0.01, 0.1, 0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(two_timescale_rate(0.001, 0.0, 25) == doctest::Approx(0.026).epsilon(1e-15));
  const double oracle = (1.0 - std::pow(0.9999, 26)) / 0.1;
  CHECK(two_timescale_rate(0.001, 0.1, 25) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(0.0259675).epsilon(1e-6));
  CHECK(std::abs(two_timescale_rate(0.001, 1e-9, 25) - 0.026) <= 1e-6);
  // 1 - etab tau = (1 - eta tau)^(gamma + 1).
  const double eb = two_timescale_rate(0.02, 0.1, 7);
  CHECK(1.0 - eb * 0.1 == doctest::Approx(std::pow(1.0 - 0.002, 8)).epsilon(1e-14));
  CHECK(eb >= 0.02);
  CHECK_THROWS_AS(two_timescale_rate(0.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(two_timescale_rate(10.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(two_timescale_rate(0.1, 0.1, -1), std::invalid_argument);
}

TEST_CASE("safe_rate examples") {
  const GameStats s{9, 1.0, 10};
  auto r = safe_rate(RateRegime::kSync, s, 0.1);
  CHECK(r.eta == doctest::Approx(1.0 / 36.0).epsilon(1e-15));
  CHECK(r.eta_bar == r.eta);
  CHECK(r.mode == Timescale::kSingle);

  r = safe_rate(RateRegime::kFixedDelay, s, 0.1, {50, std::nullopt});
  CHECK(r.eta == doctest::Approx(1.0 / 117045.0).epsilon(1e-15));
  CHECK(r.eta == doctest::Approx(8.5437e-6).epsilon(1e-4));
  CHECK(r.mode == Timescale::kTwo);
  CHECK(r.eta_bar == doctest::Approx(two_timescale_rate(r.eta, 0.1, 50)).epsilon(1e-15));

  const DelayConstants c{1.0 + 1.0 / 25.0, std::exp(1.0) * 25.0 * 26.0, 650.0};
  r = safe_rate(RateRegime::kRandomDelay, s, 0.1, {std::nullopt, c});
  const double oracle = std::min(0.1 / (24.0 * 81.0 * (c.L + 1.0)), (c.zeta - 1.0) / (0.1 * c.zeta));
  CHECK(r.eta == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(r.eta_bar == r.eta);

  r = safe_rate(RateRegime::kPermuted, s, 0.1, {25, std::nullopt});
  CHECK(r.eta == doctest::Approx(1.0 / (28.0 * 9.0 * std::pow(26.0, 2.5))).epsilon(1e-14));

  // a_inf = 0 leaves only the tau branch.
  r = safe_rate(RateRegime::kSync, GameStats{9, 0.0, 10}, 0.1);
  CHECK(r.eta == doctest::Approx(5.0).epsilon(1e-15));

  CHECK_THROWS_AS(safe_rate(RateRegime::kFixedDelay, s, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(safe_rate(RateRegime::kRandomDelay, s, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(safe_rate(RateRegime::kPermuted, s, 0.0, {3, std::nullopt}),
                  std::invalid_argument);
  CHECK_THROWS_AS(safe_rate(RateRegime::kSync, GameStats{0, 0.0, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("safe_rate outputs are valid settings") {
  Engine e = make_stream(22, StreamPurpose::kProfile, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const GameStats s{static_cast<std::size_t>(uniform_int(e, 1, 30)), uniform_real(e, 0.0, 5.0), 3};
    const double tau = uniform_real(e, 1e-3, 3.0);
    const auto g = uniform_int(e, 1, 60);
    const DelayConstants c{1.0 + 1.0 / static_cast<double>(g),
                           std::exp(1.0) * static_cast<double>(g * (g + 1)), 0.0};
    for (auto regime : {RateRegime::kSync, RateRegime::kRandomDelay, RateRegime::kFixedDelay,
                        RateRegime::kPermuted}) {
      const auto r = safe_rate(regime, s, tau, {g, c});
      CHECK(r.is_valid());
      CHECK(r.eta * tau < 1.0);
      CHECK(r.eta_bar * tau < 1.0);
      CHECK(r.eta_bar >= r.eta);
    }
  }
}

TEST_CASE("no_regret_rate") {
  CHECK(no_regret_rate(GameStats{9, 1.0, 10}, 0.1) == doctest::Approx(1.0 / 36.4).epsilon(1e-15));
  CHECK_THROWS_AS(no_regret_rate(GameStats{0, 0.0, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("RateSetting validity") {
  CHECK(RateSetting{Timescale::kSingle, 0.1, 0.01, 0.01}.is_valid());
  CHECK_FALSE(RateSetting{Timescale::kSingle, 0.1, 0.01, 0.02}.is_valid());
  CHECK(RateSetting{Timescale::kTwo, 0.1, 0.01, 0.02}.is_valid());
  CHECK_FALSE(RateSetting{Timescale::kTwo, 0.1, 0.02, 0.01}.is_valid());
  CHECK_FALSE(RateSetting{Timescale::kTwo, 0.1, 0.01, 10.0}.is_valid());
  CHECK_FALSE(RateSetting{Timescale::kSingle, 0.1, 0.0, 0.0}.is_valid());
}

TEST_CASE("update ordering follows a three-step hand trace") {
  // eta = 0.5, etab = 0.8, tau = 0.25, two actions, feedback f0, f1, f2 at
  // t = 0, 1, 2. On probabilities:
  //   t = 0: pi0 = uniform;          pb1 ~ pi0^(0.8) exp(0.8 f0)
  //   t = 1: pi1 ~ pi0^(7/8) e^(f1/2); pb2 ~ pi1^(0.8) exp(0.8 f1)
  //   t = 2: pi2 ~ pi1^(7/8) e^(f2/2); pb3 ~ pi2^(0.8) exp(0.8 f2)
  const double eta = 0.5, etab = 0.8, tau = 0.25;
  const std::vector<std::vector<double>> f{{1.0, 0.0}, {0.0, 2.0}, {-1.0, 1.0}};
  auto agent = AgentState::uniform(2, eta, etab);

  std::vector<double> pi{0.5, 0.5};
  for (int t = 0; t < 3; ++t) {
    agent.step(f[t], tau, t);
    if (t >= 1) pi = multiplicative(pi, f[t], eta, tau);
    const auto pb = multiplicative(pi, f[t], etab, tau);
    const auto got_main = agent.main();
    const auto got_extrap = agent.extrapolation();
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(got_main[k] == doctest::Approx(pi[k]).epsilon(1e-14));
      CHECK(got_extrap[k] == doctest::Approx(pb[k]).epsilon(1e-14));
    }
  }
  // Closed form of the first action after three steps.
  // pi1 = softmax(0, 1) since (7/8) log(1/2) cancels; pi2 logits: 7/8 * (0, 1) + (-0.5, 0.5).
  const double l0 = -0.5, l1 = 7.0 / 8.0 + 0.5;
  CHECK(agent.main()[0] == doctest::Approx(1.0 / (1.0 + std::exp(l1 - l0))).epsilon(1e-14));
  const double b0 = 0.8 * l0 - 0.8, b1 = 0.8 * l1 + 0.8;
  CHECK(agent.extrapolation()[0] == doctest::Approx(1.0 / (1.0 + std::exp(b1 - b0))).epsilon(1e-14));
}
