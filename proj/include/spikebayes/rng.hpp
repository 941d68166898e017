#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spikebayes {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Seed of the named sub-stream derived from a root seed. Distinct names give
/// statistically independent generators; the mapping is stable across runs.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

inline Rng make_rng(std::uint64_t root, std::string_view name) {
    return Rng(substream_seed(root, name));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace spikebayes
