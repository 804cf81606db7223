#pragma once

#include <cstdint>

namespace cms {

// Counter-based generator: output t is a hash of (key, t), so streams are
// random-access and splittable. The key mixes a user seed with a stream index
// (one stream per trajectory); the mixer is the splitmix64 finalizer.
struct CounterRng {
    uint64_t key = 0;
    uint64_t counter = 0;

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    CounterRng() = default;
    CounterRng(uint64_t seed, uint64_t stream) : key(mix(mix(seed) ^ (0x6a09e667f3bcc909ULL * (stream + 1)))) {}

    uint64_t at(uint64_t t) const { return mix(key + 0x9e3779b97f4a7c15ULL * t); }
    uint64_t next() { return at(counter++); }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
};

}  // namespace cms
