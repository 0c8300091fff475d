#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, path, step, lane), so a path's noise does not depend on which
// worker simulates it or in what order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace eqpide {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Draws for one simulated path; `lane` separates the Gaussian stream from
/// the per-atom Poisson streams.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path)),
          path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

    /// Two uniforms in (0, 1) with 53-bit resolution.
    std::array<double, 2> uniforms(std::uint32_t step, std::uint32_t lane) const noexcept {
        const auto r = Philox4x32::generate({step, path_lo_, path_hi_, lane}, key_);
        return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
    }

    /// Standard normal via Box-Muller.
    double normal(std::uint32_t step) const noexcept {
        const auto u = uniforms(step, 0);
        return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
    }

    /// Poisson(mean) by inversion; intended for the small means of a time step.
    unsigned poisson(std::uint32_t step, std::uint32_t atom, double mean) const noexcept {
        if (mean <= 0.0) return 0;
        const double u = uniforms(step, 1 + atom)[0];
        double p = std::exp(-mean);
        double cdf = p;
        unsigned k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            p *= mean / k;
            cdf += p;
            if (p == 0.0) break;
        }
        return k;
    }

private:
    static double to_unit(std::uint32_t a, std::uint32_t b) noexcept {
        const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

}  // namespace eqpide
