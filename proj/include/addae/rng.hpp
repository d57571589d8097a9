#pragma once

#include <cstdint>
#include <random>

namespace addae {

// Weight initialization must be reproducible from a seed alone, including by
// reimplementations in other languages. The generator is the standard
// mt19937_64 (fully specified by the C++ standard) and raw 64-bit draws are
// mapped to doubles explicitly instead of going through
// std::uniform_real_distribution, whose output is implementation-defined.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1): top 53 bits of the draw scaled by 2^-53.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-halfwidth, halfwidth).
    double next_symmetric(double halfwidth) { return (2.0 * next_unit() - 1.0) * halfwidth; }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// splitmix64 finalizer; combines a master seed with a small tag so that
/// sub-problems (pretraining stages, sweep cells) get decorrelated streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace addae
