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

#include "polyomwu/delay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

namespace polyomwu {

std::string to_string(DelayKind kind) {
  switch (kind) {
    case DelayKind::kNone: return "none";
    case DelayKind::kFixed: return "fixed";
    case DelayKind::kBoundedUniform: return "uniform";
    case DelayKind::kPoisson: return "poisson";
    case DelayKind::kPermuted: return "permuted";
    case DelayKind::kReplay: return "replay";
  }
  return "unknown";
}

DelayKind parse_delay_kind(const std::string& name) {
  if (name == "none") return DelayKind::kNone;
  if (name == "fixed") return DelayKind::kFixed;
  if (name == "uniform") return DelayKind::kBoundedUniform;
  if (name == "poisson") return DelayKind::kPoisson;
  if (name == "permuted") return DelayKind::kPermuted;
  if (name == "replay") return DelayKind::kReplay;
  throw std::invalid_argument("unknown delay kind '" + name + "'");
}

std::optional<std::int64_t> DelaySpec::max_delay() const {
  switch (kind) {
    case DelayKind::kNone: return 0;
    case DelayKind::kFixed:
    case DelayKind::kBoundedUniform:
    case DelayKind::kPermuted: return gamma;
    case DelayKind::kPoisson:
      if (poisson_cap) return static_cast<std::int64_t>(std::floor(10.0 * poisson_mean));
      return std::nullopt;
    case DelayKind::kReplay: return std::nullopt;
  }
  return std::nullopt;
}

DelayConstants delay_constants(const DelaySpec& spec) {
  constexpr double e = std::numbers::e;
  if (spec.kind == DelayKind::kBoundedUniform) {
    if (spec.gamma < 1) {
      throw std::invalid_argument("delay_constants: bounded delays need gamma >= 1");
    }
    const auto g = static_cast<double>(spec.gamma);
    return {1.0 + 1.0 / g, e * g * (g + 1.0), g * (g + 1.0)};
  }
  if (spec.kind == DelayKind::kPoisson) {
    if (!(spec.poisson_mean > 0.0)) {
      throw std::invalid_argument("delay_constants: poisson mean must be > 0");
    }
    const double m = spec.poisson_mean;
    return {1.0 + 1.0 / m, e * m * (1.0 + m), m * m + 2.0 * m};
  }
  throw std::invalid_argument("delay_constants: no constants for delay kind " +
                              to_string(spec.kind));
}

// -- DelaySchedule ------------------------------------------------------------

DelaySchedule::DelaySchedule(const DelaySpec& spec, std::size_t num_agents,
                             std::uint64_t seed)
    : spec_(spec) {
  if (spec.kind == DelayKind::kReplay) {
    throw std::invalid_argument("DelaySchedule: use DelaySchedule::replay for tables");
  }
  if (spec.gamma < 0) throw std::invalid_argument("DelaySchedule: gamma must be >= 0");
  if (spec.kind == DelayKind::kPoisson && !(spec.poisson_mean > 0.0)) {
    throw std::invalid_argument("DelaySchedule: poisson mean must be > 0");
  }
  agents_.reserve(num_agents);
  for (std::size_t i = 0; i < num_agents; ++i) {
    agents_.push_back({make_stream(seed, StreamPurpose::kDelay, i), 0, {}});
  }
}

DelaySchedule DelaySchedule::replay(
    std::size_t num_agents,
    std::map<std::pair<std::size_t, Iteration>, Iteration> table) {
  DelaySchedule s(DelaySpec::None(), num_agents, 0);
  s.spec_.kind = DelayKind::kReplay;
  std::int64_t worst = 0;
  for (const auto& [key, kappa] : table) {
    if (key.first >= num_agents) {
      throw std::invalid_argument("replay table: agent out of range");
    }
    if (kappa < 0 || kappa > key.second) {
      throw std::invalid_argument("replay table: kappa outside [0, t]");
    }
    worst = std::max(worst, key.second - kappa);
  }
  s.table_ = std::move(table);
  s.table_max_delay_ = worst;
  return s;
}

std::optional<std::int64_t> DelaySchedule::max_delay() const {
  if (spec_.kind == DelayKind::kReplay) return table_max_delay_;
  return spec_.max_delay();
}

Iteration DelaySchedule::next_kappa(std::size_t agent, Iteration t) {
  AgentState& state = agents_.at(agent);
  if (t != state.next_t) {
    throw ScheduleOrderError("next_kappa: agent " + std::to_string(agent) +
                             " expected t=" + std::to_string(state.next_t) +
                             ", got t=" + std::to_string(t));
  }
  ++state.next_t;
  switch (spec_.kind) {
    case DelayKind::kNone:
      return t;
    case DelayKind::kFixed:
      return std::max<Iteration>(t - spec_.gamma, 0);
    case DelayKind::kBoundedUniform:
      return std::max<Iteration>(t - uniform_int(state.engine, 0, spec_.gamma), 0);
    case DelayKind::kPoisson: {
      std::int64_t d = poisson(state.engine, spec_.poisson_mean);
      if (spec_.poisson_cap) d = std::min(d, *spec_.max_delay());
      return std::max<Iteration>(t - d, 0);
    }
    case DelayKind::kPermuted:
      return permuted_kappa(state, t);
    case DelayKind::kReplay: {
      const auto it = table_.find({agent, t});
      if (it == table_.end()) {
        throw std::out_of_range("replay table has no entry for agent " +
                                std::to_string(agent) + " at t=" + std::to_string(t));
      }
      return it->second;
    }
  }
  return t;
}

// Undelivered indices s >= 1 wait in `pending`. The index t - gamma is forced
// out when it becomes due, so nothing is delayed by more than gamma; every
// other step emits a uniformly random pending index. While t <= gamma nothing
// can be due yet, and the reusable index 0 joins the draw as a filler.
Iteration DelaySchedule::permuted_kappa(AgentState& agent, Iteration t) {
  if (t == 0) return 0;
  agent.pending.insert(t);
  const Iteration due = t - spec_.gamma;
  if (due >= 1) {
    if (auto it = agent.pending.find(due); it != agent.pending.end()) {
      agent.pending.erase(it);
      return due;
    }
  }
  const auto size = static_cast<std::int64_t>(agent.pending.size());
  const std::int64_t upper = (t <= spec_.gamma) ? size : size - 1;
  const std::int64_t pick = uniform_int(agent.engine, 0, upper);
  if (pick == size) return 0;
  auto it = std::next(agent.pending.begin(), pick);
  const Iteration s = *it;
  agent.pending.erase(it);
  return s;
}

// -- Validation ---------------------------------------------------------------

ScheduleReport validate_kappa_sequence(const std::vector<Iteration>& kappas,
                                       const DelaySpec& spec) {
  ScheduleReport report;
  const auto horizon = static_cast<Iteration>(kappas.size());
  const auto bound = spec.max_delay();
  const Iteration mean_from = bound.value_or(0);
  double delay_sum = 0.0;
  std::int64_t delay_count = 0;
  std::vector<int> hits(kappas.size() + 1, 0);
  for (Iteration t = 0; t < horizon; ++t) {
    const Iteration kappa = kappas[static_cast<std::size_t>(t)];
    if (kappa < 0 || kappa > t) {
      report.out_of_range.push_back(t);
      continue;
    }
    const std::int64_t d = t - kappa;
    report.max_displacement = std::max(report.max_displacement, d);
    if (bound && d > *bound) report.displacement_ok = false;
    if (t >= mean_from) {
      delay_sum += static_cast<double>(d);
      ++delay_count;
    }
    if (kappa >= 1) ++hits[static_cast<std::size_t>(kappa)];
  }
  report.mean_delay = delay_count > 0 ? delay_sum / static_cast<double>(delay_count) : 0.0;
  if (spec.kind == DelayKind::kPermuted || spec.kind == DelayKind::kReplay) {
    for (std::size_t s = 1; s < hits.size(); ++s) {
      if (hits[s] > 1) report.duplicates.push_back(static_cast<Iteration>(s));
    }
  }
  if (spec.kind == DelayKind::kPermuted) {
    for (Iteration s = 1; s <= horizon - spec.gamma - 1; ++s) {
      if (hits[static_cast<std::size_t>(s)] == 0) report.missing.push_back(s);
    }
  }
  return report;
}

ScheduleReport validate_schedule(const DelaySpec& spec, std::size_t num_agents,
                                 std::uint64_t seed, Iteration horizon,
                                 std::size_t agent) {
  DelaySchedule schedule(spec, num_agents, seed);
  std::vector<Iteration> kappas;
  kappas.reserve(static_cast<std::size_t>(std::max<Iteration>(horizon, 0)));
  for (Iteration t = 0; t < horizon; ++t) kappas.push_back(schedule.next_kappa(agent, t));
  return validate_kappa_sequence(kappas, spec);
}

std::map<std::pair<std::size_t, Iteration>, Iteration> load_permutation_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::map<std::pair<std::size_t, Iteration>, Iteration> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long i = 0, t = 0, kappa = 0;
    std::string extra;
    if (!(fields >> i >> t >> kappa) || (fields >> extra) || i < 0) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'i t kappa'");
    }
    if (!table.emplace(std::pair{static_cast<std::size_t>(i), t}, kappa).second) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": duplicate (i, t)");
    }
  }
  return table;
}

void save_permutation_file(
    const std::map<std::pair<std::size_t, Iteration>, Iteration>& table,
    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& [key, kappa] : table) {
    out << key.first << ' ' << key.second << ' ' << kappa << '\n';
  }
}

}  // namespace polyomwu
