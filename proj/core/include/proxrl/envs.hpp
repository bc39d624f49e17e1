#pragma once

#include "proxrl/mdp.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace proxrl {

/// Action encoding shared by FrozenLake and the gridworld.
enum GridAction : std::size_t { kLeft = 0, kDown = 1, kRight = 2, kUp = 3 };
inline constexpr std::size_t kNumGridActions = 4;

/// Standard 8x8 FrozenLake layout. 'S' start, 'F' frozen, 'H' hole, 'G' goal.
const std::vector<std::string>& standard_frozen_lake_8x8();

/// FrozenLake from a map. States are row * width + col. Holes and the goal are
/// absorbing with zero reward; entering the goal pays 1. Slippery moves go in
/// the intended direction or either perpendicular one with probability 1/3 each.
TabularMdp frozen_lake(const std::vector<std::string>& map, bool slippery, double gamma = 0.99);

TabularMdp frozen_lake_8x8(bool slippery, double gamma = 0.99);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

struct GridSpec {
  int width = 6;
  int height = 6;
  Cell start{0, 0};
  Cell goal{5, 5};
  std::vector<Cell> walls;
  double step_reward = -0.01;
  /// Paid instead of step_reward on the transition that enters the goal.
  double goal_reward = 1.0;
  std::size_t max_steps = 100;

  /// Throws InvalidArgument if the start/goal are bad or the goal is unreachable.
  void validate() const;
};

struct StepResult {
  Vector state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

/// Episodic interaction loop with one-hot state encodings.
class EpisodicEnv {
 public:
  virtual ~EpisodicEnv() = default;

  /// Fresh copy with the same configuration, positioned before reset().
  virtual std::unique_ptr<EpisodicEnv> clone() const = 0;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::size_t max_steps() const = 0;

  virtual Vector reset() = 0;
  /// Throws std::logic_error when called after the episode ended without reset().
  virtual StepResult step(std::size_t action) = 0;
};

class GridworldEnv final : public EpisodicEnv {
 public:
  explicit GridworldEnv(GridSpec spec, std::uint64_t seed = 0);

  std::unique_ptr<EpisodicEnv> clone() const override;
  std::size_t state_dim() const override;
  std::size_t num_actions() const override { return kNumGridActions; }
  std::size_t max_steps() const override { return spec_.max_steps; }

  Vector reset() override;
  StepResult step(std::size_t action) override;

  /// Starts a fresh episode from an arbitrary free cell.
  Vector reset_to(Cell cell);

  const GridSpec& spec() const { return spec_; }
  Cell current() const { return current_; }
  std::size_t index_of(Cell cell) const;
  Vector encode(Cell cell) const;
  bool is_wall(Cell cell) const;
  /// Cell reached by moving from `from`; blocked moves stay in place.
  Cell move(Cell from, std::size_t action) const;

 private:
  GridSpec spec_;
  std::uint64_t seed_;
  Cell current_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

struct Gridworld {
  GridworldEnv env;
  /// States 0..w*h-1 are cells, state w*h is the absorbing post-goal state.
  TabularMdp twin;
  std::size_t start_state = 0;
};

Gridworld build_gridworld(const GridSpec& spec, double gamma = 0.99, std::uint64_t seed = 0);

}  // namespace proxrl
