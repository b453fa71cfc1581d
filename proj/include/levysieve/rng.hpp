#pragma once

#include <cstdint>
#include <random>

namespace levysieve {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent engine seeds.
std::uint64_t mix64(std::uint64_t x);

/// Identifies one reproducible random stream. Replication r of an experiment
/// uses stream id r under the experiment's base seed.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  Engine engine() const;
};

/// Uniform on [0, 1) with 53 random bits.
double uniform01(Engine& eng);

}  // namespace levysieve
