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

#include "polyomwu/presets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "polyomwu/content_hash.hpp"

namespace polyomwu {

using nlohmann::json;

std::vector<double> default_eta_grid() {
  std::vector<double> grid;
  for (int e = 1; e <= 6; ++e) {
    grid.push_back(std::stod("1e-" + std::to_string(e)));
    if (e < 6) {
      grid.push_back(std::stod("5e-" + std::to_string(e + 1)));
      grid.push_back(std::stod("2e-" + std::to_string(e + 1)));
    }
  }
  return grid;
}

std::vector<double> eta_bar_grid(double eta, double tau, std::int64_t gamma) {
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double decade = eta * std::pow(10.0, k);
    if (decade > 0.5) break;
    for (double m : {1.0, 2.0, 5.0}) {
      if (decade * m <= 0.5 * (1.0 + 1e-12)) grid.push_back(decade * m);
    }
  }
  grid.push_back(two_timescale_rate(eta, tau, gamma));
  std::ranges::sort(grid);
  return grid;
}

RunConfig preset_base() {
  RunConfig c;
  c.game = GameSource::Generated(10, 10, GraphSpec::Complete());
  c.tau = 0.1;
  c.horizon = 5000;
  c.record_every = 10;
  c.seeds = {0, 1, 2, 3, 4};
  return c;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1c", "fig2a",
                                                 "fig2b", "fig2c", "custom"};
  return names;
}

namespace {

RunConfig base_with(const PresetOptions& options) {
  RunConfig c = preset_base();
  if (options.horizon) c.horizon = *options.horizon;
  if (options.record_every) c.record_every = *options.record_every;
  if (options.seeds) c.seeds = *options.seeds;
  return c;
}

std::string label_of(const std::string& group, double eta,
                     std::optional<double> eta_bar = std::nullopt) {
  std::string s = group + "_eta" + format_double(eta);
  if (eta_bar) s += "_etabar" + format_double(*eta_bar);
  return s;
}

void add_eta_grid(std::vector<PresetPoint>& out, const std::string& group, RunConfig c,
                  const std::vector<double>& grid) {
  for (double eta : grid) {
    c.eta = eta;
    out.push_back({label_of(group, eta), group, c});
  }
}

// Single- and two-timescale eta grids on the same delay model.
std::vector<PresetPoint> single_vs_two(const RunConfig& base, const DelaySpec& delay,
                                       const std::vector<double>& grid) {
  std::vector<PresetPoint> out;
  RunConfig single = base;
  single.delay = delay;
  single.mode = Timescale::kSingle;
  add_eta_grid(out, "single", single, grid);
  RunConfig two = single;
  two.mode = Timescale::kTwo;
  add_eta_grid(out, "two", two, grid);
  return out;
}

}  // namespace

std::vector<PresetPoint> expand_preset(const std::string& name,
                                       const PresetOptions& options) {
  const RunConfig base = base_with(options);
  const std::vector<double> grid = options.eta_grid.value_or(default_eta_grid());
  if (grid.empty()) throw std::invalid_argument("preset: empty eta grid");
  std::vector<PresetPoint> out;
  if (name == "fig1a") {
    RunConfig sync = base;
    add_eta_grid(out, "sync", sync, grid);
    RunConfig delayed = base;
    delayed.delay = DelaySpec::BoundedUniform(10);
    add_eta_grid(out, "uniform10", delayed, grid);
  } else if (name == "fig1b") {
    out = single_vs_two(base, DelaySpec::Permuted(25), grid);
  } else if (name == "fig1c") {
    RunConfig c = base;
    c.delay = DelaySpec::Permuted(25);
    c.mode = Timescale::kTwo;
    c.eta = 1e-3;
    for (double eta_bar : eta_bar_grid(*c.eta, c.tau, 25)) {
      c.eta_bar = eta_bar;
      out.push_back({label_of("two", *c.eta, eta_bar), "two", c});
    }
  } else if (name == "fig2a") {
    out = single_vs_two(base, DelaySpec::BoundedUniform(25), grid);
  } else if (name == "fig2b") {
    out = single_vs_two(base, DelaySpec::Fixed(50), grid);
  } else if (name == "fig2c") {
    out = single_vs_two(base, DelaySpec::Permuted(25), grid);
  } else if (name == "custom") {
    if (!options.custom) throw std::invalid_argument("preset custom requires a config file");
    RunConfig c = *options.custom;
    if (options.horizon) c.horizon = *options.horizon;
    if (options.record_every) c.record_every = *options.record_every;
    if (options.seeds) c.seeds = *options.seeds;
    out.push_back({"custom", "custom", c});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  for (const auto& p : out) p.config.validate();
  return out;
}

PresetResult run_preset(const std::string& name, const PresetOptions& options) {
  PresetResult result;
  result.name = name;
  std::map<std::string, std::size_t> best;
  for (auto& point : expand_preset(name, options)) {
    PresetCurve curve;
    curve.result = run_averaged(point.config, options.jobs);
    const auto& last = curve.result.mean.rows.back();
    curve.final_kl_main = last.kl_main;
    curve.final_kl_extrap = last.kl_extrap;
    curve.point = std::move(point);
    const std::size_t idx = result.points.size();
    auto it = best.find(curve.point.group);
    if (it == best.end()) {
      best.emplace(curve.point.group, idx);
      result.best.emplace_back(curve.point.group, idx);
    } else if (curve.final_kl_main < result.points[it->second].final_kl_main) {
      it->second = idx;
      for (auto& [g, i] : result.best) {
        if (g == curve.point.group) i = idx;
      }
    }
    result.points.push_back(std::move(curve));
  }
  return result;
}

std::string preset_hash(const std::string& name, const PresetOptions& options) {
  json doc;
  doc["preset"] = name;
  json points = json::array();
  for (const auto& p : expand_preset(name, options)) {
    points.push_back({{"label", p.label}, {"group", p.group}, {"config", config_to_json(p.config)}});
  }
  doc["points"] = points;
  return git_blob_sha1(doc.dump()).substr(0, 10);
}

void write_preset(const PresetResult& result, const std::filesystem::path& dir) {
  std::string grid = "label,group,mode,eta,eta_bar,final_kl_main,final_kl_extrap,selected\n";
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const auto& c = result.points[k];
    const bool selected = std::ranges::any_of(
        result.best, [k](const auto& b) { return b.second == k; });
    const auto& rate = c.result.mean.rate;
    grid += c.point.label + "," + c.point.group + "," + to_string(rate.mode) + "," +
            format_double(rate.eta) + "," + format_double(rate.eta_bar) + "," +
            format_double(c.final_kl_main) + "," + format_double(c.final_kl_extrap) + "," +
            (selected ? "1" : "0") + "\n";
    const bool single = result.points.size() == 1;
    write_averaged_run(c.point.config, c.result, single ? dir : dir / "runs" / c.point.label);
  }
  write_text(dir / "grid.csv", grid);

  json summary;
  summary["preset"] = result.name;
  json chosen = json::object();
  for (const auto& [group, idx] : result.best) {
    const auto& c = result.points[idx];
    if (result.points.size() > 1) {
      write_text(dir / (group + ".csv"), trajectory_csv(c.result.mean));
    }
    chosen[group] = {{"label", c.point.label},
                     {"eta", c.result.mean.rate.eta},
                     {"eta_bar", c.result.mean.rate.eta_bar},
                     {"final_kl_main", c.final_kl_main}};
  }
  summary["best"] = chosen;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace polyomwu
