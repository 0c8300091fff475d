#pragma once

// Finite-difference weights shared by the PIDE operator, the policy
// improvement step and the derivative fields. Central in the interior,
// second-order one-sided at the two boundary nodes.

#include <array>
#include <cstddef>
#include <span>

namespace eqpide::detail {

struct Stencil {
    std::size_t first = 0;
    std::size_t len = 0;
    std::array<double, 4> w{};
};

inline Stencil first_derivative(std::size_t i, std::size_t n, double h) {
    if (i == 0) return {0, 3, {-1.5 / h, 2.0 / h, -0.5 / h, 0.0}};
    if (i == n - 1) return {n - 3, 3, {0.5 / h, -2.0 / h, 1.5 / h, 0.0}};
    return {i - 1, 3, {-0.5 / h, 0.0, 0.5 / h, 0.0}};
}

inline Stencil second_derivative(std::size_t i, std::size_t n, double h) {
    const double h2 = h * h;
    if (n >= 4) {
        if (i == 0) return {0, 4, {2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2}};
        if (i == n - 1) return {n - 4, 4, {-1.0 / h2, 4.0 / h2, -5.0 / h2, 2.0 / h2}};
    } else {
        if (i == 0) return {0, 3, {1.0 / h2, -2.0 / h2, 1.0 / h2, 0.0}};
        if (i == n - 1) return {n - 3, 3, {1.0 / h2, -2.0 / h2, 1.0 / h2, 0.0}};
    }
    return {i - 1, 3, {1.0 / h2, -2.0 / h2, 1.0 / h2, 0.0}};
}

/// Field stored row-major as f[i * n + j], i indexing x and j indexing z.
inline double apply_x(std::span<const double> f, std::size_t n, const Stencil& s, std::size_t j) {
    double acc = 0.0;
    for (std::size_t m = 0; m < s.len; ++m) acc += s.w[m] * f[(s.first + m) * n + j];
    return acc;
}

inline double apply_z(std::span<const double> f, std::size_t n, std::size_t i, const Stencil& s) {
    double acc = 0.0;
    for (std::size_t m = 0; m < s.len; ++m) acc += s.w[m] * f[i * n + s.first + m];
    return acc;
}

inline double apply_xz(std::span<const double> f, std::size_t n, const Stencil& sx, const Stencil& sz) {
    double acc = 0.0;
    for (std::size_t a = 0; a < sx.len; ++a)
        for (std::size_t b = 0; b < sz.len; ++b) acc += sx.w[a] * sz.w[b] * f[(sx.first + a) * n + sz.first + b];
    return acc;
}

/// Three-point Lagrange weights around the node nearest to y (clamped so the
/// stencil stays on the grid); extrapolates quadratically outside.
struct Lagrange3 {
    std::size_t first = 0;
    std::array<double, 3> w{};
};

inline Lagrange3 lagrange3(double y, double lower, double h, std::size_t n) {
    const double pos = (y - lower) / h;
    long c = static_cast<long>(pos + 0.5);
    if (c < 1) c = 1;
    if (c > static_cast<long>(n) - 2) c = static_cast<long>(n) - 2;
    const double t = pos - static_cast<double>(c);
    return {static_cast<std::size_t>(c - 1), {0.5 * t * (t - 1.0), (1.0 - t) * (1.0 + t), 0.5 * t * (t + 1.0)}};
}

}  // namespace eqpide::detail
