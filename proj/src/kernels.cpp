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

#include "polyomwu/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polyomwu {

double log_sum_exp(std::span<const double> x) {
  const double m = *std::ranges::max_element(x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void softmax(std::span<const double> x, std::span<double> out) {
  const double m = *std::ranges::max_element(x);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = std::exp(x[k] - m);
    s += out[k];
  }
  const double inv = 1.0 / s;
  for (double& v : out) v *= inv;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

namespace {

// Player i's payoff block. Shared by both kernel variants so the arithmetic is
// identical.
inline void payoff_block(const PolymatrixGame& game, const BlockVector& profile,
                         Player i, std::span<double> out) {
  std::ranges::fill(out, 0.0);
  for (const auto& nb : game.neighbors(i)) {
    const Matrix& a = game.neighbor_payoff(nb);
    const double* pj = profile[nb.player].data();
    for (std::size_t r = 0; r < a.rows; ++r) {
      const double* row = a.values.data() + r * a.cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < a.cols; ++c) acc += row[c] * pj[c];
      out[r] += acc;
    }
  }
}

// Returns false if feedback had a non-finite entry.
inline bool mwu_block(std::span<double> logits, std::span<const double> feedback,
                      double rate, double tau) {
  const double keep = 1.0 - rate * tau;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(feedback[k])) return false;
    logits[k] = keep * logits[k] + rate * feedback[k];
  }
  const double lse = log_sum_exp(logits);
  for (double& v : logits) v -= lse;
  return true;
}

void check_mwu_args(const BlockVector& logits, const BlockVector& feedback,
                    double rate, double tau) {
  if (!logits.same_shape(feedback)) {
    throw std::invalid_argument("mwu_step: logits/feedback shape mismatch");
  }
  if (!(rate > 0.0) || tau < 0.0 || rate * tau > 1.0) {
    throw std::invalid_argument("mwu_step: need rate > 0, tau >= 0, rate*tau <= 1");
  }
}

[[noreturn]] void throw_non_finite(std::size_t i) {
  throw std::domain_error("mwu_step: non-finite feedback for player " +
                          std::to_string(i));
}

}  // namespace

void payoff_vectors(const PolymatrixGame& game, const BlockVector& profile,
                    BlockVector& out) {
  require_compatible(game, profile);
  if (!out.same_shape(profile)) out = BlockVector(game.action_sizes());
  const auto n = static_cast<std::ptrdiff_t>(game.num_players());
#pragma omp parallel for schedule(static) if (n >= static_cast<std::ptrdiff_t>(kParallelPlayerThreshold))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    payoff_block(game, profile, static_cast<Player>(i), out[static_cast<std::size_t>(i)]);
  }
}

void mwu_step_all(BlockVector& logits, const BlockVector& feedback, double rate,
                  double tau) {
  check_mwu_args(logits, feedback, rate, tau);
  const auto n = static_cast<std::ptrdiff_t>(logits.num_blocks());
  std::ptrdiff_t bad = n;
#pragma omp parallel for schedule(static) reduction(min : bad) if (n >= static_cast<std::ptrdiff_t>(kParallelPlayerThreshold))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!mwu_block(logits[u], feedback[u], rate, tau)) bad = std::min(bad, i);
  }
  if (bad < n) throw_non_finite(static_cast<std::size_t>(bad));
}

namespace reference {

void payoff_vectors(const PolymatrixGame& game, const BlockVector& profile,
                    BlockVector& out) {
  require_compatible(game, profile);
  if (!out.same_shape(profile)) out = BlockVector(game.action_sizes());
  for (Player i = 0; i < game.num_players(); ++i) {
    payoff_block(game, profile, i, out[i]);
  }
}

void mwu_step_all(BlockVector& logits, const BlockVector& feedback, double rate,
                  double tau) {
  check_mwu_args(logits, feedback, rate, tau);
  for (std::size_t i = 0; i < logits.num_blocks(); ++i) {
    if (!mwu_block(logits[i], feedback[i], rate, tau)) throw_non_finite(i);
  }
}

}  // namespace reference

}  // namespace polyomwu
