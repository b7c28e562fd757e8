#pragma once

#include <cstddef>
#include <vector>

#include "xdrive/nn/rng.hpp"
#include "xdrive/nn/tensor.hpp"

namespace xdrive::rl {

struct Transition {
  nn::VectorF s;
  nn::VectorF a;
  float r = 0.0f;
  nn::VectorF s_next;
  bool done = false;
};

// Column-per-item minibatch.
struct Batch {
  nn::MatrixF s;
  nn::MatrixF a;
  nn::MatrixF r;     // 1 x B
  nn::MatrixF s_next;
  nn::MatrixF done;  // 1 x B, 1 for terminal
};

// Fixed-capacity FIFO ring. Sampling draws distinct items uniformly.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, nn::Index obs_dim, nn::Index action_dim, std::uint64_t seed);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  nn::Index obs_dim() const { return s_.rows(); }
  nn::Index action_dim() const { return a_.rows(); }

  // i-th oldest stored item.
  Transition at(std::size_t i) const;

  // n distinct logical indices (0 = oldest), ascending.
  std::vector<std::size_t> sample_indices(std::size_t n);
  Batch sample(std::size_t n);

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // oldest item
  nn::MatrixF s_, a_, r_, s_next_, done_;
  nn::Rng rng_;
};

}  // namespace xdrive::rl
