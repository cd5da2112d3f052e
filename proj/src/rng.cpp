#include "rds/rng.hpp"

#include <cmath>
#include <numbers>

namespace rds {
namespace {

// splitmix64 finalizer; full avalanche on a 64-bit word.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGolden)) {}

RngStream RngStream::derived(std::uint64_t seed, std::uint64_t index) {
  RngStream s(seed);
  s.key_ = mix64(s.key_ ^ mix64(index * kGolden + 0x632be59bd9b4e019ull));
  return s;
}

std::uint64_t RngStream::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double RngStream::next_uniform() {
  // 53-bit mantissa, offset by half a step to stay inside (0,1).
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void RngStream::fill_gaussian(Array& out) {
  for (Index i = 0; i < out.size(); ++i) out[i] = next_gaussian();
}

Tensor RngStream::gaussian(const Shape& shape) {
  Tensor t(shape);
  fill_gaussian(t.array());
  return t;
}

}  // namespace rds
