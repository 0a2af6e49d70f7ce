#pragma once

#include <cmath>
#include <cstdint>

namespace camforge {

// splitmix64 finalizer; the project-wide seed mixer. std:: engines and
// distributions are implementation-defined, so every reproducible draw in
// this codebase goes through this generator instead.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (base, lane, index).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t lane, std::uint64_t index) {
    std::uint64_t s = base;
    splitmix64(s);
    s ^= 0xD1B54A32D192ED03ULL * (lane + 1);
    splitmix64(s);
    s ^= 0x8CB92BA72F3D8DD7ULL * (index + 1);
    splitmix64(s);
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1); 53-bit mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n > 0. Multiply-shift rejection-free map is
    // fine here since n is tiny compared to 2^64.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Box-Muller; consumes two uniforms per call, no cached spare.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace camforge
