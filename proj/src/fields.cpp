#include "eqpide/fields.hpp"

#include "stencil.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eqpide {

FieldSample AnsatzFields::sample(double s, double x, double z) const {
    const ClosedFormValues v = evaluate(sol_, s);
    FieldSample f;
    f.theta = 0.5 * v.M1 * x * x + 0.5 * v.M2 * z * z + v.M3 * x * z;
    f.theta_x = v.M1 * x + v.M3 * z;
    f.theta_z = v.M2 * z + v.M3 * x;
    f.theta_xx = v.M1;
    f.theta_zz = v.M2;
    f.theta_xz = v.M3;
    f.g = v.N1 * x + v.N2 * z;
    f.g_x = v.N1;
    f.g_z = v.N2;
    return f;
}

double AnsatzFields::theta(double s, double x, double z) const {
    const ClosedFormValues v = evaluate(sol_, s);
    return 0.5 * v.M1 * x * x + 0.5 * v.M2 * z * z + v.M3 * x * z;
}

double AnsatzFields::g(double s, double x, double z) const {
    const ClosedFormValues v = evaluate(sol_, s);
    return v.N1 * x + v.N2 * z;
}

void AnsatzFields::check_domain(double s, double x, double z) const {
    const double T = sol_.N1.horizon();
    if (!(s >= -1e-12 && s <= T + 1e-12)) throw std::domain_error("time " + std::to_string(s) + " outside [0, T]");
    if (!std::isfinite(x) || !std::isfinite(z)) throw std::domain_error("non-finite state");
}

GridFields::GridFields(const PideSolution& sol) : grid_(sol.grid()), channels_(kChannels) {
    const std::size_t n = grid_.n_space;
    const std::size_t slice = grid_.slice_size();
    const std::size_t total = (grid_.n_time + 1) * slice;
    const double h = grid_.h();
    for (auto& c : channels_) c.resize(total);

    std::vector<double> dxx(slice);
    for (std::size_t k = 0; k <= grid_.n_time; ++k) {
        const std::size_t off = k * slice;
        for (int field = 0; field < 2; ++field) {
            const auto u = field == 0 ? sol.theta_slice(k) : sol.g_slice(k);
            const std::size_t base = field == 0 ? kTheta : kG;
            for (std::size_t i = 0; i < n; ++i) {
                const auto d1x = detail::first_derivative(i, n, h);
                const auto d2x = detail::second_derivative(i, n, h);
                for (std::size_t j = 0; j < n; ++j) {
                    const auto d1z = detail::first_derivative(j, n, h);
                    const auto d2z = detail::second_derivative(j, n, h);
                    const std::size_t p = i * n + j;
                    channels_[base + 0][off + p] = u[p];
                    channels_[base + 1][off + p] = detail::apply_x(u, n, d1x, j);
                    channels_[base + 2][off + p] = detail::apply_z(u, n, i, d1z);
                    channels_[base + 3][off + p] = dxx[p] = detail::apply_x(u, n, d2x, j);
                    channels_[base + 4][off + p] = detail::apply_z(u, n, i, d2z);
                    channels_[base + 5][off + p] = detail::apply_xz(u, n, d1x, d1z);
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto d1x = detail::first_derivative(i, n, h);
                for (std::size_t j = 0; j < n; ++j) {
                    const auto d1z = detail::first_derivative(j, n, h);
                    const std::size_t p = i * n + j;
                    channels_[base + 6][off + p] = detail::apply_x(dxx, n, d1x, j);
                    channels_[base + 7][off + p] = detail::apply_z(dxx, n, i, d1z);
                }
            }
        }
    }
}

double GridFields::interpolate(Channel c, double s, double x, double z) const {
    const std::size_t n = grid_.n_space;
    const double pos = std::clamp(s / grid_.dt(), 0.0, static_cast<double>(grid_.n_time));
    const auto k = std::min(static_cast<std::size_t>(pos), grid_.n_time - 1);
    const double wt = pos - static_cast<double>(k);
    const auto lx = detail::lagrange3(x, grid_.lower, grid_.h(), n);
    const auto lz = detail::lagrange3(z, grid_.lower, grid_.h(), n);
    const auto& data = channels_[c];
    double acc[2] = {0.0, 0.0};
    for (int level = 0; level < 2; ++level) {
        const std::size_t off = (k + static_cast<std::size_t>(level)) * grid_.slice_size();
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                acc[level] += lx.w[a] * lz.w[b] * data[off + (lx.first + a) * n + lz.first + b];
    }
    return (1.0 - wt) * acc[0] + wt * acc[1];
}

FieldSample GridFields::sample(double s, double x, double z) const {
    FieldSample f;
    f.theta = interpolate(kTheta, s, x, z);
    f.theta_x = interpolate(kThetaX, s, x, z);
    f.theta_z = interpolate(kThetaZ, s, x, z);
    f.theta_xx = interpolate(kThetaXX, s, x, z);
    f.theta_zz = interpolate(kThetaZZ, s, x, z);
    f.theta_xz = interpolate(kThetaXZ, s, x, z);
    f.theta_xxx = interpolate(kThetaXXX, s, x, z);
    f.theta_xxz = interpolate(kThetaXXZ, s, x, z);
    f.g = interpolate(kG, s, x, z);
    f.g_x = interpolate(kGX, s, x, z);
    f.g_z = interpolate(kGZ, s, x, z);
    f.g_xx = interpolate(kGXX, s, x, z);
    f.g_zz = interpolate(kGZZ, s, x, z);
    f.g_xz = interpolate(kGXZ, s, x, z);
    f.g_xxx = interpolate(kGXXX, s, x, z);
    f.g_xxz = interpolate(kGXXZ, s, x, z);
    return f;
}

double GridFields::theta(double s, double x, double z) const { return interpolate(kTheta, s, x, z); }
double GridFields::g(double s, double x, double z) const { return interpolate(kG, s, x, z); }

void GridFields::check_domain(double s, double x, double z) const {
    if (!(s >= -1e-12 && s <= grid_.horizon + 1e-12))
        throw std::domain_error("time " + std::to_string(s) + " outside [0, T]");
    if (!grid_.contains(x) || !grid_.contains(z))
        throw std::domain_error("state (" + std::to_string(x) + ", " + std::to_string(z) + ") outside the grid");
}

}  // namespace eqpide
