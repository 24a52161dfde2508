#pragma once

#include "trunreg/types.hpp"

namespace trunreg {

/// Uniform draw on the open interval (0, 1) with 53 random bits.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng);

/// SplitMix64 finalizer; derives independent substream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace trunreg
