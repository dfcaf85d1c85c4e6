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

// Per-iteration kernels of the simulation. The default versions distribute
// players across OpenMP threads; the reference:: versions are the plain serial
// loops kept for testing and benchmarking. Each player's block is computed by
// one thread with the same summation order as the serial code, so both paths
// produce bit-identical results.

#pragma once

#include <span>

#include "polyomwu/game.hpp"

namespace polyomwu {

// log sum_k exp(x_k), shifted by max_k x_k. x must be nonempty.
double log_sum_exp(std::span<const double> x);

// out = softmax(x), shifted by max_k x_k. out may alias x.
void softmax(std::span<const double> x, std::span<double> out);

// Shannon entropy -sum p log p with 0 log 0 = 0.
double entropy(std::span<const double> p);

// out[i] = A_i profile for every player i.
void payoff_vectors(const PolymatrixGame& game, const BlockVector& profile,
                    BlockVector& out);

// logits[i] <- (1 - rate*tau) logits[i] + rate*feedback[i], recentred so
// that logits[i] is an exact log-probability vector. Throws std::domain_error
// on non-finite feedback.
void mwu_step_all(BlockVector& logits, const BlockVector& feedback, double rate,
                  double tau);

// Minimum number of players before the kernels fork threads.
inline constexpr std::size_t kParallelPlayerThreshold = 16;

namespace reference {

void payoff_vectors(const PolymatrixGame& game, const BlockVector& profile,
                    BlockVector& out);

void mwu_step_all(BlockVector& logits, const BlockVector& feedback, double rate,
                  double tau);

}  // namespace reference

}  // namespace polyomwu
