#include "proxrl/deep/replay_buffer.hpp"

#include "proxrl/errors.hpp"

namespace proxrl::deep {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw InvalidArgument("replay buffer capacity must be positive");
  items_.reserve(capacity_);
}

void ReplayBuffer::add(Transition t) {
  if (t.terminal && t.truncated) throw InvalidArgument("transition cannot be both terminal and truncated");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size) {
  if (items_.empty()) throw InvalidArgument("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = pick(rng_);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size) {
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i : sample_indices(batch_size)) out.push_back(items_[i]);
  return out;
}

}  // namespace proxrl::deep
