#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cmm {

// Deterministic generator. Draws are hand-rolled on top of mt19937_64 so the
// produced sequences do not depend on the standard library's distribution
// implementations (those are unspecified and differ between stdlibs).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the second value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; // (0,1)
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform in {0, ..., n-1}, n > 0. Modulo bias is irrelevant at our n.
    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 mix of a base seed and a stream id, for independent sub-streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace cmm
