#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace pibounds {

/**
 * Seedable 64-bit generator with spelled-out mappings to doubles and ranges.
 * The engine is std::mt19937_64, whose raw output sequence is fixed by the
 * standard; the mappings below avoid std::uniform_*_distribution (whose
 * algorithms are implementation-defined) so instances reproduce bit-for-bit
 * on any platform.
 */
class Rng64 {
public:
    explicit Rng64(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1): half-step offset keeps both endpoints excluded.
    double next_double_open() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Uniform integer in [0, bound), bound >= 1, rejection sampled so there
    /// is no modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t reject = (0 - bound) % bound;   // 2^64 mod bound
        while (true) {
            std::uint64_t x = engine_();
            if (x >= reject) return x % bound;
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pibounds
