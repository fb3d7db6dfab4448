#pragma once

#include <cstdint>
#include <random>

namespace hypb {

// Seeded RNG with a platform-independent uniform double mapping. The
// std::uniform_real_distribution output is implementation-defined, which
// would break cross-compiler reproducibility of manifests, so doubles are
// derived from raw 64-bit draws directly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Derives an independent stream seed; used to give each ensemble member
    // its own generator so results do not depend on evaluation order.
    std::uint64_t derive_seed() {
        std::uint64_t z = engine_();
        z ^= z >> 31;
        z *= 0x9e3779b97f4a7c15ull;
        z ^= z >> 29;
        return z;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace hypb
