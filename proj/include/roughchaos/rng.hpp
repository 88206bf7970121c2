#pragma once

#include <cstdint>
#include <random>

namespace roughchaos {

/// Derives an independent child seed for stream `stream` of `seed`
/// (splitmix64 finalization applied to the mixed pair).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// One seeded random stream. Every simulated object (particle, replica,
/// sample) owns its own stream, so results do not depend on worker count.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::size_t index(std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace roughchaos
