#pragma once

#include <cmath>
#include <cstdint>

namespace gmclab {

// Counter-based splittable generator. Every draw is mix64(key + n*GAMMA)
// for an incrementing counter n (SplitMix64); streams are derived from
// (seed, stream id) by hashing, so replica i can be generated on any
// worker in any order with identical results.
class Rng {
public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + GOLDEN) ^ mix64(stream * GOLDEN + 0x7f4a7c15ULL))) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z += GOLDEN;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix64(key_ + (ctr_++) * GOLDEN); }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal, Box-Muller with cached spare
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - next_double();  // (0,1]
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gmclab
