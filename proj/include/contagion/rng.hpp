#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace contagion {

using Rng = std::mt19937_64;

// Deterministic child seed for a named sub-stream ("graph", "treatment",
// "noise", "sampler", "init", ...). Streams with different names or indices
// are decorrelated by a splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t parent, std::string_view stream,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(parent, stream, index));
}

}  // namespace contagion
