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

#include "polyomwu/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "polyomwu/content_hash.hpp"
#include "polyomwu/kernels.hpp"
#include "polyomwu/rng.hpp"

namespace polyomwu {

using json = nlohmann::json;

// -- BlockVector --------------------------------------------------------------

BlockVector::BlockVector(std::span<const std::size_t> block_sizes, double fill) {
  offsets_.reserve(block_sizes.size() + 1);
  offsets_.push_back(0);
  for (std::size_t s : block_sizes) offsets_.push_back(offsets_.back() + s);
  data_.assign(offsets_.back(), fill);
}

std::vector<std::size_t> BlockVector::block_sizes() const {
  std::vector<std::size_t> sizes(num_blocks());
  for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i] = block_size(i);
  return sizes;
}

StrategyProfile StrategyProfile::uniform(std::span<const std::size_t> action_sizes) {
  StrategyProfile p(action_sizes);
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const double v = 1.0 / static_cast<double>(p.block_size(i));
    std::ranges::fill(p[i], v);
  }
  return p;
}

StrategyProfile StrategyProfile::from_blocks(
    const std::vector<std::vector<double>>& blocks) {
  std::vector<std::size_t> sizes;
  for (const auto& b : blocks) sizes.push_back(b.size());
  StrategyProfile p(sizes);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::ranges::copy(blocks[i], p[i].begin());
  }
  return p;
}

bool StrategyProfile::is_valid(double tol) const {
  for (std::size_t i = 0; i < num_blocks(); ++i) {
    const auto block = (*this)[i];
    if (block.empty()) return false;
    double sum = 0.0;
    for (double v : block) {
      if (!std::isfinite(v) || v < 0.0) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

std::vector<std::vector<double>> StrategyProfile::to_blocks() const {
  std::vector<std::vector<double>> out(num_blocks());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].assign((*this)[i].begin(), (*this)[i].end());
  }
  return out;
}

// -- Matrix -------------------------------------------------------------------

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

// -- PolymatrixGame -----------------------------------------------------------

PolymatrixGame::PolymatrixGame(std::vector<std::size_t> action_sizes,
                               std::vector<Edge> edges)
    : action_sizes_(std::move(action_sizes)),
      edges_(std::move(edges)),
      neighbors_(action_sizes_.size()) {
  const std::size_t n = action_sizes_.size();
  if (n == 0) throw std::invalid_argument("game: no players");
  for (std::size_t s : action_sizes_) {
    if (s == 0) throw std::invalid_argument("game: empty action set");
  }
  std::set<std::pair<Player, Player>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.i >= n || edge.j >= n) {
      throw std::invalid_argument("game: edge endpoint out of range");
    }
    if (edge.i == edge.j) throw std::invalid_argument("game: self edge");
    const auto key = std::minmax(edge.i, edge.j);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("game: duplicate edge");
    }
    const std::size_t si = action_sizes_[edge.i];
    const std::size_t sj = action_sizes_[edge.j];
    if (edge.a_ij.rows != si || edge.a_ij.cols != sj ||
        edge.a_ij.values.size() != si * sj || edge.a_ji.rows != sj ||
        edge.a_ji.cols != si || edge.a_ji.values.size() != si * sj) {
      throw std::invalid_argument("game: payoff matrix shape mismatch on edge (" +
                                  std::to_string(edge.i) + "," +
                                  std::to_string(edge.j) + ")");
    }
    for (const Matrix* m : {&edge.a_ij, &edge.a_ji}) {
      for (double v : m->values) {
        if (!std::isfinite(v)) throw std::invalid_argument("game: non-finite payoff");
      }
    }
    neighbors_[edge.i].push_back({edge.j, e, true});
    neighbors_[edge.j].push_back({edge.i, e, false});
  }
  for (auto& list : neighbors_) {
    std::ranges::sort(list, {}, &Neighbor::player);
  }
}

const Matrix* PolymatrixGame::payoff(Player i, Player j) const {
  for (const Neighbor& nb : neighbors_.at(i)) {
    if (nb.player == j) return &neighbor_payoff(nb);
  }
  return nullptr;
}

void require_compatible(const PolymatrixGame& game, const BlockVector& profile) {
  if (profile.num_blocks() != game.num_players()) {
    throw std::invalid_argument("profile has wrong number of players");
  }
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    if (profile.block_size(i) != game.action_size(i)) {
      throw std::invalid_argument("profile block " + std::to_string(i) +
                                  " has wrong size");
    }
  }
}

// -- Utilities ----------------------------------------------------------------

namespace {

void check_player(const PolymatrixGame& game, Player i) {
  if (i >= game.num_players()) {
    throw std::out_of_range("player index " + std::to_string(i) + " out of range");
  }
}

void accumulate_payoff(const PolymatrixGame& game, const BlockVector& profile,
                       Player i, std::span<double> out) {
  std::ranges::fill(out, 0.0);
  for (const auto& nb : game.neighbors(i)) {
    const Matrix& a = game.neighbor_payoff(nb);
    const auto pj = profile[nb.player];
    for (std::size_t r = 0; r < a.rows; ++r) {
      const double* row = a.values.data() + r * a.cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < a.cols; ++c) acc += row[c] * pj[c];
      out[r] += acc;
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::vector<double> payoff_vector(const PolymatrixGame& game,
                                  const StrategyProfile& profile, Player i) {
  check_player(game, i);
  require_compatible(game, profile);
  std::vector<double> out(game.action_size(i));
  accumulate_payoff(game, profile, i, out);
  return out;
}

double utility(const PolymatrixGame& game, const StrategyProfile& profile,
               Player i, double tau) {
  if (tau < 0.0) throw std::invalid_argument("utility: tau must be >= 0");
  if (!profile.is_valid(1e-9)) throw std::invalid_argument("utility: invalid profile");
  const auto q = payoff_vector(game, profile, i);
  double u = dot(profile[i], q);
  if (tau > 0.0) u += tau * entropy(profile[i]);
  return u;
}

double cross_sum(const PolymatrixGame& game, const StrategyProfile& p,
                 const StrategyProfile& q) {
  require_compatible(game, p);
  require_compatible(game, q);
  double total = 0.0;
  std::vector<double> buf;
  for (Player i = 0; i < game.num_players(); ++i) {
    buf.assign(game.action_size(i), 0.0);
    accumulate_payoff(game, q, i, buf);
    total += dot(p[i], buf);
    accumulate_payoff(game, p, i, buf);
    total += dot(q[i], buf);
  }
  return total;
}

ZeroSumVerdict check_zero_sum(const PolymatrixGame& game, ZeroSumMode mode,
                              std::size_t samples, double tol, std::uint64_t seed) {
  ZeroSumVerdict verdict;
  if (mode == ZeroSumMode::kExactPairwise) {
    for (const Edge& e : game.edges()) {
      for (std::size_t r = 0; r < e.a_ij.rows; ++r) {
        for (std::size_t c = 0; c < e.a_ij.cols; ++c) {
          verdict.max_residual =
              std::max(verdict.max_residual, std::abs(e.a_ij(r, c) + e.a_ji(c, r)));
        }
      }
    }
  } else {
    if (samples == 0) throw std::invalid_argument("check_zero_sum: samples must be >= 1");
    Engine engine = make_stream(seed, StreamPurpose::kZeroSumCheck, 0);
    std::vector<std::size_t> pure(game.num_players());
    for (std::size_t k = 0; k < samples; ++k) {
      for (Player i = 0; i < game.num_players(); ++i) {
        pure[i] = static_cast<std::size_t>(
            uniform_int(engine, 0, static_cast<std::int64_t>(game.action_size(i)) - 1));
      }
      double total = 0.0;
      for (const Edge& e : game.edges()) {
        total += e.a_ij(pure[e.i], pure[e.j]) + e.a_ji(pure[e.j], pure[e.i]);
      }
      verdict.max_residual = std::max(verdict.max_residual, std::abs(total));
    }
  }
  verdict.pass = verdict.max_residual <= tol;
  return verdict;
}

PolymatrixGame random_zero_sum_game(std::size_t n, std::size_t action_size,
                                    const GraphSpec& graph, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_zero_sum_game: n must be >= 2");
  if (action_size < 1) {
    throw std::invalid_argument("random_zero_sum_game: action_size must be >= 1");
  }
  std::vector<std::pair<Player, Player>> pairs;
  if (graph.complete) {
    for (Player i = 0; i < n; ++i) {
      for (Player j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
  } else {
    pairs = graph.edges;
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [i, j] = pairs[e];
    if (i >= n || j >= n || i == j) {
      throw std::invalid_argument("random_zero_sum_game: invalid edge (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
    }
    Engine engine = make_stream(seed, StreamPurpose::kEdgePayoff, e);
    Matrix a(action_size, action_size);
    for (double& v : a.values) v = uniform_real(engine, -1.0, 1.0);
    Matrix b = a.transposed();
    for (double& v : b.values) v = -v;
    edges.push_back({i, j, std::move(a), std::move(b)});
  }
  return PolymatrixGame(std::vector<std::size_t>(n, action_size), std::move(edges));
}

GameStats game_stats(const PolymatrixGame& game) {
  GameStats stats;
  for (Player i = 0; i < game.num_players(); ++i) {
    stats.d_max = std::max(stats.d_max, game.degree(i));
    stats.s_max = std::max(stats.s_max, game.action_size(i));
  }
  for (const Edge& e : game.edges()) {
    stats.a_inf = std::max({stats.a_inf, e.a_ij.max_abs(), e.a_ji.max_abs()});
  }
  return stats;
}

// -- Serialization --------------------------------------------------------------

std::string game_to_json(const PolymatrixGame& game) {
  json doc;
  doc["n"] = game.num_players();
  doc["action_sizes"] = game.action_sizes();
  json edges = json::array();
  for (const Edge& e : game.edges()) {
    edges.push_back({{"i", e.i}, {"j", e.j}, {"a_ij", e.a_ij.values},
                     {"a_ji", e.a_ji.values}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump() + "\n";
}

PolymatrixGame game_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("game json: ") + err.what());
  }
  try {
    const auto n = doc.at("n").get<std::size_t>();
    auto sizes = doc.at("action_sizes").get<std::vector<std::size_t>>();
    if (sizes.size() != n) {
      throw std::invalid_argument("game json: action_sizes length != n");
    }
    std::vector<Edge> edges;
    for (const auto& je : doc.at("edges")) {
      Edge e;
      e.i = je.at("i").get<Player>();
      e.j = je.at("j").get<Player>();
      if (e.i >= n || e.j >= n) {
        throw std::invalid_argument("game json: edge endpoint out of range");
      }
      e.a_ij.rows = sizes[e.i];
      e.a_ij.cols = sizes[e.j];
      e.a_ij.values = je.at("a_ij").get<std::vector<double>>();
      e.a_ji.rows = sizes[e.j];
      e.a_ji.cols = sizes[e.i];
      e.a_ji.values = je.at("a_ji").get<std::vector<double>>();
      edges.push_back(std::move(e));
    }
    return PolymatrixGame(std::move(sizes), std::move(edges));
  } catch (const json::exception& err) {
    throw std::invalid_argument(std::string("game json: ") + err.what());
  }
}

void save_game(const PolymatrixGame& game, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << game_to_json(game);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PolymatrixGame load_game(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return game_from_json(buf.str());
}

std::string game_hash(const PolymatrixGame& game) {
  return git_blob_sha1(game_to_json(game));
}

}  // namespace polyomwu
