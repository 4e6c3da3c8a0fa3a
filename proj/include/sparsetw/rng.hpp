#pragma once

#include <cstdint>
#include <random>

namespace sparsetw {

using Engine = std::mt19937_64;

/// A reproducible random stream identified by (master_seed, stream_index).
///
/// The engine seed is a counter-based hash of the pair, so draw j of a Monte
/// Carlo run depends only on (master_seed, j) and never on which worker ran it
/// or in which order.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  std::uint64_t derived_seed() const;
  Engine engine() const { return Engine(derived_seed()); }

  /// Independent sub-stream k of this stream (e.g. H0 and W of one flow sample).
  RngStream child(std::uint64_t k) const { return RngStream{derived_seed(), k}; }
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0, 1) with 53 random bits; fixed bit recipe so draws do not
/// depend on the standard library's distribution implementation.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace sparsetw
