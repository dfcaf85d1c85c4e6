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

// Named experiment presets. Each expands deterministically to a list of
// RunConfigs (a learning-rate grid per curve group), runs them and keeps the
// best grid point of each group as the reported curve.
//
//   fig1a  sync vs bounded-uniform {0..10} delays, single-timescale
//   fig1b  permuted gamma = 25: final KL over the eta grid, single vs two
//   fig1c  permuted gamma = 25, eta = 1e-3: final KL over an eta-bar grid
//   fig2a  bounded-uniform gamma = 25, single vs two
//   fig2b  fixed gamma = 50, single vs two
//   fig2c  permuted gamma = 25, single vs two
//   custom a single config supplied by the caller

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polyomwu/harness.hpp"

namespace polyomwu {

// 0.1, 0.05, 0.02, 0.01, ..., 1e-6.
std::vector<double> default_eta_grid();

// Eta-bar grid of fig1c: 1-2-5 steps from eta to 0.5 plus the
// two_timescale_rate value.
std::vector<double> eta_bar_grid(double eta, double tau, std::int64_t gamma);

// n = 10, |S_i| = 10, complete graph, tau = 0.1, seeds 0..4, T = 5000,
// record every 10 iterations.
RunConfig preset_base();

const std::vector<std::string>& preset_names();

struct PresetOptions {
  int jobs = 1;
  std::optional<Iteration> horizon;
  std::optional<Iteration> record_every;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::vector<double>> eta_grid;
  std::optional<RunConfig> custom;  // required by "custom"
};

struct PresetPoint {
  std::string label;  // unique within the preset
  std::string group;  // curve family, e.g. "sync" or "two"
  RunConfig config;
};

// Grid points in a fixed order. Throws std::invalid_argument on an unknown
// name or a custom preset without a config.
std::vector<PresetPoint> expand_preset(const std::string& name,
                                       const PresetOptions& options = {});

struct PresetCurve {
  PresetPoint point;
  AveragedRun result;
  double final_kl_main = 0.0;
  double final_kl_extrap = 0.0;
};

struct PresetResult {
  std::string name;
  std::vector<PresetCurve> points;
  // Index into points of the best (lowest final mean kl_main) point per group,
  // in first-appearance order of the groups.
  std::vector<std::pair<std::string, std::size_t>> best;
};

PresetResult run_preset(const std::string& name, const PresetOptions& options = {});

// First ten hex digits of the content hash of the expanded grid.
std::string preset_hash(const std::string& name, const PresetOptions& options = {});

// Layout under dir:
//   grid.csv                      one line per grid point
//   <group>.csv                   mean curve of the group's best point
//   summary.json                  chosen points and their rates
//   runs/<label>/seed_<s>.csv     per-seed trajectories (+ .json metadata)
//   runs/<label>/mean.csv         (+ mean.json)
// A preset with a single point (custom) writes its seed and mean files
// directly under dir instead of runs/ and the group curve.
void write_preset(const PresetResult& result, const std::filesystem::path& dir);

}  // namespace polyomwu
