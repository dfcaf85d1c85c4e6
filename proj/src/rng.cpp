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

#include "polyomwu/rng.hpp"

#include <random>
#include <stdexcept>

#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace polyomwu {

Engine make_stream(std::uint64_t seed, StreamPurpose purpose,
                   std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

double uniform_real(Engine& engine, double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine);
}

std::int64_t uniform_int(Engine& engine, std::int64_t lo, std::int64_t hi) {
  boost::random::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(engine);
}

std::int64_t poisson(Engine& engine, double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("poisson: mean must be > 0");
  boost::random::poisson_distribution<std::int64_t, double> dist(mean);
  return dist(engine);
}

}  // namespace polyomwu
