#pragma once

#include <cstdint>

#include "sofic/common.hpp"

namespace sofic {

/// SplitMix64 step; used both as a generator and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Deterministic, platform-independent RNG. All sampling in the library goes
/// through this type; std::uniform_*_distribution is avoided on purpose since
/// its output is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // burn-in decorrelates trivially related seeds
        next();
        next();
    }

    std::uint64_t next() { return splitmix64(state_); }

    /// Uniform in [0, n) by rejection; exact (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw validation_error("Rng::below(0)");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        for (;;) {
            std::uint64_t v = next();
            if (v < limit) return v % n;
        }
    }

    /// Uniform dyadic rational in [0,1) with 53-bit resolution, as an exact Rational.
    Rational unit_rational() {
        return Rational(BigInt(next() >> 11), BigInt(std::uint64_t{1} << 53));
    }

    double unit_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    Rng child(std::uint64_t stream) { return Rng(derive_seed(state_, stream)); }

  private:
    std::uint64_t state_;
};

}  // namespace sofic
