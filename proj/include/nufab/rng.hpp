#pragma once

#include <cstdint>

namespace nufab {

// Counter-based generator (splitmix64 over a keyed counter). Streams keyed by
// (seed, salt) are independent and reproducible across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t salt = 0) : state_(mix(seed ^ mix(salt + 0x9e3779b97f4a7c15ull))) {}

    uint64_t next()
    {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // uniform in [0, bound)
    uint64_t below(uint64_t bound) { return bound ? next() % bound : 0; }

    bool coin() { return next() & 1; }

  private:
    static uint64_t mix(uint64_t z)
    {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    uint64_t state_;
};

} // namespace nufab
