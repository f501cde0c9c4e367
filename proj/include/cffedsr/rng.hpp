#pragma once

#include <cstdint>
#include <random>

namespace cffedsr {

// splitmix64 finalizer; used to derive independent stream seeds so results
// do not depend on execution order or thread count.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a) {
    return mix64(root ^ mix64(a));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return mix64(derive_seed(root, a) ^ mix64(b + 0x51ed2701ULL));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return mix64(derive_seed(root, a, b) ^ mix64(c + 0x2545f491ULL));
}

using Rng = std::mt19937_64;

}  // namespace cffedsr
