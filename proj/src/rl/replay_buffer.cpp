#include "xdrive/rl/replay_buffer.hpp"

#include <algorithm>
#include <unordered_set>

#include "xdrive/errors.hpp"

namespace xdrive::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, nn::Index obs_dim, nn::Index action_dim, std::uint64_t seed)
    : capacity_(capacity), rng_(seed, 0x5eb1a7ULL) {
  if (capacity == 0 || obs_dim <= 0 || action_dim <= 0) throw InvalidConfig("replay buffer needs positive sizes");
  const auto cap = static_cast<nn::Index>(capacity);
  s_ = nn::MatrixF::Zero(obs_dim, cap);
  a_ = nn::MatrixF::Zero(action_dim, cap);
  r_ = nn::MatrixF::Zero(1, cap);
  s_next_ = nn::MatrixF::Zero(obs_dim, cap);
  done_ = nn::MatrixF::Zero(1, cap);
}

void ReplayBuffer::push(const Transition& t) {
  nn::expect_rows(t.s.rows(), obs_dim(), "transition state");
  nn::expect_rows(t.s_next.rows(), obs_dim(), "transition next state");
  nn::expect_rows(t.a.rows(), action_dim(), "transition action");
  std::size_t idx;
  if (size_ < capacity_) {
    idx = slot(size_);
    ++size_;
  } else {
    idx = head_;
    head_ = (head_ + 1) % capacity_;
  }
  const auto c = static_cast<nn::Index>(idx);
  s_.col(c) = t.s;
  a_.col(c) = t.a;
  r_(0, c) = t.r;
  s_next_.col(c) = t.s_next;
  done_(0, c) = t.done ? 1.0f : 0.0f;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw InvalidArgument("replay index out of range");
  const auto c = static_cast<nn::Index>(slot(i));
  return {s_.col(c), a_.col(c), r_(0, c), s_next_.col(c), done_(0, c) != 0.0f};
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n) {
  if (n > size_) throw BufferTooSmall("replay buffer holds " + std::to_string(size_) + " items, batch needs " +
                                      std::to_string(n));
  // Floyd's algorithm: n distinct values from [0, size) with n draws.
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = size_ - n; j < size_; ++j) {
    const auto t = static_cast<std::size_t>(rng_.below(j + 1));
    const std::size_t pick = chosen.count(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Batch ReplayBuffer::sample(std::size_t n) {
  const auto idx = sample_indices(n);
  const auto b = static_cast<nn::Index>(n);
  Batch batch{nn::MatrixF(obs_dim(), b), nn::MatrixF(action_dim(), b), nn::MatrixF(1, b),
              nn::MatrixF(obs_dim(), b), nn::MatrixF(1, b)};
  for (nn::Index j = 0; j < b; ++j) {
    const auto c = static_cast<nn::Index>(slot(idx[static_cast<std::size_t>(j)]));
    batch.s.col(j) = s_.col(c);
    batch.a.col(j) = a_.col(c);
    batch.r(0, j) = r_(0, c);
    batch.s_next.col(j) = s_next_.col(c);
    batch.done(0, j) = done_(0, c);
  }
  return batch;
}

}  // namespace xdrive::rl
