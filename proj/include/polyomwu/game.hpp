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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace polyomwu {

using Player = std::size_t;

// Per-player blocks of reals stored contiguously. Used for strategy profiles,
// logits and payoff vectors, which all share the action-set layout.
class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(std::span<const std::size_t> block_sizes,
                       double fill = 0.0);

  std::size_t num_blocks() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t block_size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t total_size() const { return data_.size(); }

  std::span<double> operator[](std::size_t i) {
    return {data_.data() + offsets_[i], block_size(i)};
  }
  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + offsets_[i], block_size(i)};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const BlockVector& other) const {
    return offsets_ == other.offsets_;
  }
  std::vector<std::size_t> block_sizes() const;

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  std::vector<double> data_;
  std::vector<std::size_t> offsets_;  // num_blocks + 1 entries
};

// One probability vector per player.
class StrategyProfile : public BlockVector {
 public:
  using BlockVector::BlockVector;

  static StrategyProfile uniform(std::span<const std::size_t> action_sizes);
  static StrategyProfile from_blocks(const std::vector<std::vector<double>>& blocks);

  // Nonnegative entries, each block summing to 1 within tol.
  bool is_valid(double tol = 1e-12) const;

  std::vector<std::vector<double>> to_blocks() const;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }

  Matrix transposed() const;
  double max_abs() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Undirected edge {i, j} carrying both directed payoff matrices:
// a_ij is |S_i| x |S_j| (player i's payoff), a_ji is |S_j| x |S_i|.
struct Edge {
  Player i = 0;
  Player j = 0;
  Matrix a_ij;
  Matrix a_ji;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GameStats {
  std::size_t d_max = 0;  // maximum degree
  double a_inf = 0.0;     // max_{i,j} ||A_ij||_inf (entrywise)
  std::size_t s_max = 0;  // max action-set size
};

// An n-player polymatrix game. Immutable after construction; absent edges
// contribute zero payoff.
class PolymatrixGame {
 public:
  struct Neighbor {
    Player player;
    std::size_t edge;
    bool forward;  // true when this player is edge.i
  };

  // Throws std::invalid_argument on shape mismatches, self edges, duplicate
  // edges, out-of-range players or non-finite entries.
  PolymatrixGame(std::vector<std::size_t> action_sizes, std::vector<Edge> edges);

  std::size_t num_players() const { return action_sizes_.size(); }
  std::size_t action_size(Player i) const { return action_sizes_.at(i); }
  const std::vector<std::size_t>& action_sizes() const { return action_sizes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t degree(Player i) const { return neighbors_.at(i).size(); }

  // Neighbors of i sorted by player index.
  std::span<const Neighbor> neighbors(Player i) const { return neighbors_.at(i); }

  // A_ij for the owner i of a neighbor entry (i, nb.player).
  const Matrix& neighbor_payoff(const Neighbor& nb) const {
    return nb.forward ? edges_[nb.edge].a_ij : edges_[nb.edge].a_ji;
  }
  // A_ij, or nullptr when (i, j) is not an edge.
  const Matrix* payoff(Player i, Player j) const;

  friend bool operator==(const PolymatrixGame& a, const PolymatrixGame& b) {
    return a.action_sizes_ == b.action_sizes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::size_t> action_sizes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> neighbors_;
};

// Throws std::invalid_argument when profile does not match the game layout.
void require_compatible(const PolymatrixGame& game, const BlockVector& profile);

// A_i pi = sum_{j in N_i} A_ij pi_j.
std::vector<double> payoff_vector(const PolymatrixGame& game,
                                  const StrategyProfile& profile, Player i);

// pi_i^T A_i pi + tau * H(pi_i).
double utility(const PolymatrixGame& game, const StrategyProfile& profile,
               Player i, double tau);

// sum_i [p_i^T A_i q + q_i^T A_i p]. Zero for zero-sum games.
double cross_sum(const PolymatrixGame& game, const StrategyProfile& p,
                 const StrategyProfile& q);

enum class ZeroSumMode { kExactPairwise, kSampled };

struct ZeroSumVerdict {
  bool pass = false;
  double max_residual = 0.0;
};

// kExactPairwise checks A_ij + A_ji^T = 0 on every edge. kSampled draws pure
// profiles uniformly and checks |sum_i u_i(s)| <= tol.
ZeroSumVerdict check_zero_sum(const PolymatrixGame& game, ZeroSumMode mode,
                              std::size_t samples = 1000, double tol = 1e-12,
                              std::uint64_t seed = 0);

// Graph description for the generator: the complete graph or an explicit
// undirected edge list.
struct GraphSpec {
  bool complete = true;
  std::vector<std::pair<Player, Player>> edges;

  static GraphSpec Complete() { return {}; }
  static GraphSpec EdgeList(std::vector<std::pair<Player, Player>> e) {
    return {false, std::move(e)};
  }
};

// Entries of each A_ij i.i.d. Uniform[-1, 1], A_ji = -A_ij^T. Edge e draws
// from make_stream(seed, kEdgePayoff, e) in row-major order.
PolymatrixGame random_zero_sum_game(std::size_t n, std::size_t action_size,
                                    const GraphSpec& graph, std::uint64_t seed);

GameStats game_stats(const PolymatrixGame& game);

// JSON document {n, action_sizes, edges: [{i, j, a_ij, a_ji}]}, matrices
// row-major, doubles in shortest round-trip form.
std::string game_to_json(const PolymatrixGame& game);
PolymatrixGame game_from_json(const std::string& text);
void save_game(const PolymatrixGame& game, const std::filesystem::path& path);
PolymatrixGame load_game(const std::filesystem::path& path);

// Hex SHA-1 of the canonical JSON in git blob framing.
std::string game_hash(const PolymatrixGame& game);

}  // namespace polyomwu
