#pragma once

#include <cstdint>

namespace fsde {

/// Identity of the counter-based normal stream. Pinned into lattice and
/// ensemble metadata so a result is reproducible from its provenance alone.
inline constexpr const char* kGeneratorId = "sm64ctr-icdf/1";

namespace rng {

/// SplitMix64 finalizer: bijective 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

/// Stateless hash of the counter tuple (seed, a, b, c). Each field is salted
/// with a distinct odd constant and absorbed through a mix64 round, so the
/// stream splits cleanly by path/step/component with no sequential state.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = seed + 0x9e3779b97f4a7c15ULL;
    h = mix64(h ^ (a * 0xd1342543de82ef95ULL));
    h = mix64(h ^ (b * 0xaf251af3b0f025b5ULL));
    h = mix64(h ^ (c * 0x2545f4914f6cdd1dULL));
    return mix64(h);
}

/// Uniform deviate in the open interval (0, 1), 53-bit resolution.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b, std::uint64_t c) {
    return (static_cast<double>(counter_bits(seed, a, b, c) >> 11) + 0.5) *
           0x1.0p-53;
}

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double inverse_normal_cdf(double p);

/// Standard normal deviate keyed by (seed, a, b, c).
inline double counter_normal(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b, std::uint64_t c) {
    return inverse_normal_cdf(counter_uniform(seed, a, b, c));
}

}  // namespace rng
}  // namespace fsde
