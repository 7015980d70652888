#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace fdaderiv {

/// SplitMix64 finalizer; used to derive independent child seeds from a master
/// seed and an index. Streams for distinct indices are decorrelated, so
/// replicates can run on any thread and still reproduce bit-identically.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

/// Deterministic standard-normal stream on top of mt19937_64.
///
/// Box-Muller is hand-rolled (instead of std::normal_distribution) so the
/// draw sequence is pinned by this code, not by the standard library
/// implementation. One pair of uniforms yields two normals; the second is
/// cached.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_carry_) {
            have_carry_ = false;
            return carry_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        carry_ = r * std::sin(a);
        have_carry_ = true;
        return r * std::cos(a);
    }

    void fill(std::span<double> out) {
        for (double& v : out) v = next();
    }

    /// Uniform on the open interval (0,1); never returns 0, so log() is safe.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

private:
    std::mt19937_64 engine_;
    double carry_ = 0.0;
    bool have_carry_ = false;
};

} // namespace fdaderiv
