#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pmiflow/state.hpp"

namespace pmiflow {

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(RngSeed, RngSeed) = default;
};

/// splitmix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent child seed for a numbered stream of a parent seed.
RngSeed derive_seed(RngSeed parent, std::uint64_t stream) noexcept;

std::mt19937_64 make_engine(RngSeed seed);

/// count i.i.d. N(0, I_n) vectors; identical output for identical arguments.
std::vector<StateVec> sample_standard_normal(std::size_t n, RngSeed seed,
                                             std::size_t count);

/// Map a 64-bit key to a standard normal deviate (Box-Muller on two
/// uniforms derived from the key). Pure function of the key.
double hashed_normal(std::uint64_t key) noexcept;

}  // namespace pmiflow
