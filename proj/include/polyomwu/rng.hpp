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

#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace polyomwu {

// What a random substream is used for. The numeric values are part of the
// reproducibility contract: changing them changes every generated game and
// delay sequence.
enum class StreamPurpose : std::uint32_t {
  kEdgePayoff = 1,   // index = edge position in the edge list
  kDelay = 2,        // index = player
  kProfile = 3,      // index = caller-chosen (tests, sampled checks)
  kZeroSumCheck = 4, // index = 0
};

// Engine type for every stochastic component. mt19937_64 has a fully
// specified output sequence, and the Boost distributions layered on top are
// the same code on every platform, so seeded runs replay bit-identically.
using Engine = boost::random::mt19937_64;

// Stream splitting: the engine for (seed, purpose, index) is seeded with a
// std::seed_seq over the 32-bit words
//   {seed_lo, seed_hi, purpose, index_lo, index_hi}.
// seed_seq's mixing algorithm is fixed by the standard.
Engine make_stream(std::uint64_t seed, StreamPurpose purpose,
                   std::uint64_t index);

// Uniform double on [lo, hi).
double uniform_real(Engine& engine, double lo, double hi);

// Uniform integer on the closed range [lo, hi].
std::int64_t uniform_int(Engine& engine, std::int64_t lo, std::int64_t hi);

// Poisson draw with the given mean (> 0).
std::int64_t poisson(Engine& engine, double mean);

}  // namespace polyomwu
