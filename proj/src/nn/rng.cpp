#include "xdrive/nn/rng.hpp"

#include <cmath>
#include <numbers>

namespace xdrive::nn {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed * kGolden + mix64(stream + 1))) {}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(mix64(key_ ^ (c * kGolden)) + c);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::split(std::uint64_t stream) const {
  Rng child(0, 0);
  child.key_ = mix64(key_ ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL));
  return child;
}

}  // namespace xdrive::nn
