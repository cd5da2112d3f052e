#pragma once

#include "rds/tensor.hpp"

#include <cstdint>

namespace rds {

/// Counter-based pseudo-random stream. Each 64-bit output is a hash of
/// (key, counter), so a stream is fully determined by its seed and the
/// number of values drawn: identical seeds replay identical sequences
/// regardless of platform. Gaussian draws use Box-Muller on the uniform
/// stream; the spare value is cached, so draw order is part of the state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Independent stream for worker `index` of a run seeded with `seed`.
  static RngStream derived(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double next_uniform();

  /// Standard normal draw.
  double next_gaussian();

  void fill_gaussian(Array& out);
  Tensor gaussian(const Shape& shape);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rds
