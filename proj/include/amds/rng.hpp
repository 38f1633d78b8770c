#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace amds {

/// splitmix64 step; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed fan-out scheme: one master seed drives every stochastic component.
/// component_seed(master, name, k) = splitmix64(master ^ fnv1a(name) + k).
/// Component names in use: "synth", "split", "model" (k = model index),
/// "attack" (k = attack kind id), "bootstrap", "at" (k = AT seed index),
/// "adaptive".
inline std::uint64_t component_seed(std::uint64_t master, std::string_view component,
                                    std::uint64_t counter = 0) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (char c : component) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001B3ULL;
    }
    return splitmix64(master ^ h) + counter * 0x9E3779B97F4A7C15ULL;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace amds
