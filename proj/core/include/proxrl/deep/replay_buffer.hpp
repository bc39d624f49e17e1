#pragma once

#include "proxrl/mdp.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace proxrl::deep {

/// Buffered tuple <s, a, r, s'> plus episode-end flags.
struct Transition {
  Vector state;
  std::size_t action = 0;
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;   // bootstrap term dropped
  bool truncated = false;  // time limit hit; bootstrap kept
};

/// Fixed-capacity ring buffer with uniform sampling with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  /// Throws InvalidArgument if the transition is both terminal and truncated.
  void add(Transition t);
  std::vector<Transition> sample(std::size_t batch_size);
  /// Draws batch_size indices into the buffer; sample() uses the same stream.
  std::vector<std::size_t> sample_indices(std::size_t batch_size);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
  std::mt19937_64 rng_;
};

}  // namespace proxrl::deep
