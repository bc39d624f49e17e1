#include "proxrl/envs.hpp"

#include "proxrl/errors.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace proxrl {

namespace {

constexpr int kRowDelta[kNumGridActions] = {0, 1, 0, -1};
constexpr int kColDelta[kNumGridActions] = {-1, 0, 1, 0};

bool in_bounds(int row, int col, int height, int width) {
  return row >= 0 && row < height && col >= 0 && col < width;
}

}  // namespace

const std::vector<std::string>& standard_frozen_lake_8x8() {
  static const std::vector<std::string> map = {"SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
                                               "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};
  return map;
}

TabularMdp frozen_lake(const std::vector<std::string>& map, bool slippery, double gamma) {
  if (map.empty() || map.front().empty()) throw InvalidArgument("FrozenLake map is empty");
  const int height = static_cast<int>(map.size());
  const int width = static_cast<int>(map.front().size());
  for (const auto& row : map) {
    if (static_cast<int>(row.size()) != width) throw InvalidArgument("FrozenLake map rows differ in length");
    for (char ch : row) {
      if (ch != 'S' && ch != 'F' && ch != 'H' && ch != 'G') {
        throw InvalidArgument(std::string("unknown FrozenLake tile '") + ch + "'");
      }
    }
  }
  const Eigen::Index ns = static_cast<Eigen::Index>(height) * width;
  std::vector<Matrix> p(kNumGridActions, Matrix::Zero(ns, ns));
  Matrix r = Matrix::Zero(ns, kNumGridActions);

  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const Eigen::Index s = static_cast<Eigen::Index>(row) * width + col;
      const char tile = map[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
      for (std::size_t a = 0; a < kNumGridActions; ++a) {
        if (tile == 'H' || tile == 'G') {
          p[a](s, s) = 1.0;
          continue;
        }
        std::vector<std::size_t> outcomes;
        if (slippery) {
          outcomes = {(a + 3) % 4, a, (a + 1) % 4};
        } else {
          outcomes = {a};
        }
        const double prob = 1.0 / static_cast<double>(outcomes.size());
        for (std::size_t dir : outcomes) {
          int nr = row + kRowDelta[dir];
          int nc = col + kColDelta[dir];
          if (!in_bounds(nr, nc, height, width)) {
            nr = row;
            nc = col;
          }
          const Eigen::Index t = static_cast<Eigen::Index>(nr) * width + nc;
          p[a](s, t) += prob;
          if (map[static_cast<std::size_t>(nr)][static_cast<std::size_t>(nc)] == 'G') {
            r(s, static_cast<Eigen::Index>(a)) += prob;
          }
        }
      }
    }
  }
  return TabularMdp(std::move(p), std::move(r), gamma);
}

TabularMdp frozen_lake_8x8(bool slippery, double gamma) {
  return frozen_lake(standard_frozen_lake_8x8(), slippery, gamma);
}

void GridSpec::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be positive");
  if (max_steps == 0) throw InvalidArgument("max_steps must be positive");
  auto inside = [&](Cell c) { return in_bounds(c.row, c.col, height, width); };
  auto walled = [&](Cell c) { return std::find(walls.begin(), walls.end(), c) != walls.end(); };
  if (!inside(start) || !inside(goal)) throw InvalidArgument("start and goal must lie inside the grid");
  if (start == goal) throw InvalidArgument("start and goal must differ");
  if (walled(start) || walled(goal)) throw InvalidArgument("start and goal cannot be walls");
  for (Cell w : walls) {
    if (!inside(w)) throw InvalidArgument("wall outside the grid");
  }
  std::vector<char> seen(static_cast<std::size_t>(width * height), 0);
  std::deque<Cell> frontier{start};
  seen[static_cast<std::size_t>(start.row * width + start.col)] = 1;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    if (c == goal) return;
    for (std::size_t a = 0; a < kNumGridActions; ++a) {
      const Cell n{c.row + kRowDelta[a], c.col + kColDelta[a]};
      if (!inside(n) || walled(n)) continue;
      char& flag = seen[static_cast<std::size_t>(n.row * width + n.col)];
      if (!flag) {
        flag = 1;
        frontier.push_back(n);
      }
    }
  }
  throw InvalidArgument("goal is not reachable from start");
}

GridworldEnv::GridworldEnv(GridSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  current_ = spec_.start;
}

std::unique_ptr<EpisodicEnv> GridworldEnv::clone() const { return std::make_unique<GridworldEnv>(spec_, seed_); }

std::size_t GridworldEnv::state_dim() const { return static_cast<std::size_t>(spec_.width * spec_.height); }

std::size_t GridworldEnv::index_of(Cell cell) const {
  return static_cast<std::size_t>(cell.row * spec_.width + cell.col);
}

Vector GridworldEnv::encode(Cell cell) const {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(state_dim()));
  x(static_cast<Eigen::Index>(index_of(cell))) = 1.0;
  return x;
}

bool GridworldEnv::is_wall(Cell cell) const {
  return std::find(spec_.walls.begin(), spec_.walls.end(), cell) != spec_.walls.end();
}

Cell GridworldEnv::move(Cell from, std::size_t action) const {
  if (action >= kNumGridActions) throw InvalidArgument("gridworld action out of range");
  const Cell to{from.row + kRowDelta[action], from.col + kColDelta[action]};
  if (!in_bounds(to.row, to.col, spec_.height, spec_.width) || is_wall(to)) return from;
  return to;
}

Vector GridworldEnv::reset() { return reset_to(spec_.start); }

Vector GridworldEnv::reset_to(Cell cell) {
  if (!in_bounds(cell.row, cell.col, spec_.height, spec_.width) || is_wall(cell) || cell == spec_.goal) {
    throw InvalidArgument("reset_to needs a free non-goal cell");
  }
  current_ = cell;
  steps_ = 0;
  done_ = false;
  return encode(current_);
}

StepResult GridworldEnv::step(std::size_t action) {
  if (done_) throw std::logic_error("GridworldEnv::step called on a finished episode; call reset()");
  current_ = move(current_, action);
  ++steps_;
  StepResult out;
  out.state = encode(current_);
  if (current_ == spec_.goal) {
    out.reward = spec_.goal_reward;
    out.terminal = true;
  } else {
    out.reward = spec_.step_reward;
    out.truncated = steps_ >= spec_.max_steps;
  }
  done_ = out.terminal || out.truncated;
  return out;
}

Gridworld build_gridworld(const GridSpec& spec, double gamma, std::uint64_t seed) {
  GridworldEnv env(spec, seed);
  const Eigen::Index cells = static_cast<Eigen::Index>(env.state_dim());
  const Eigen::Index absorbing = cells;
  std::vector<Matrix> p(kNumGridActions, Matrix::Zero(cells + 1, cells + 1));
  Matrix r = Matrix::Zero(cells + 1, kNumGridActions);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const Cell c{row, col};
      const auto s = static_cast<Eigen::Index>(env.index_of(c));
      for (std::size_t a = 0; a < kNumGridActions; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        if (c == spec.goal) {
          p[a](s, absorbing) = 1.0;
        } else if (env.is_wall(c)) {
          p[a](s, s) = 1.0;
        } else {
          const Cell n = env.move(c, a);
          p[a](s, static_cast<Eigen::Index>(env.index_of(n))) = 1.0;
          r(s, ai) = n == spec.goal ? spec.goal_reward : spec.step_reward;
        }
      }
    }
  }
  for (std::size_t a = 0; a < kNumGridActions; ++a) p[a](absorbing, absorbing) = 1.0;
  const std::size_t start_state = env.index_of(spec.start);
  return Gridworld{std::move(env), TabularMdp(std::move(p), std::move(r), gamma), start_state};
}

}  // namespace proxrl
