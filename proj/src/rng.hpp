#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace darkfed {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a tag path,
// e.g. derive_seed(master, {kBenignStream, client_id, round}).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t p : path)
        s = mix64(s ^ mix64(p));
    return s;
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return std::mt19937_64(derive_seed(master, path));
}

// Stream tags for the experiment-wide seed map. Each consumer of randomness
// owns one tag so streams never collide.
enum StreamTag : std::uint64_t {
    kMainDataStream = 1,
    kShadowStream = 2,
    kSamplingStream = 3,
    kBenignStream = 4,
    kShadowSplitStream = 5,
    kFlameStream = 6,
    kRflbatStream = 7,
    kPartitionStream = 8,
    kInitStream = 9,
};

} // namespace darkfed
