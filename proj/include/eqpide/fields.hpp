#pragma once

// Uniform access to theta, g and their spatial derivatives, either from the
// closed-form quadratic/linear ansatz or from a finite-difference solution.

#include "eqpide/closed_form.hpp"
#include "eqpide/pide_solver.hpp"

#include <utility>
#include <vector>

namespace eqpide {

struct FieldSample {
    double theta = 0, theta_x = 0, theta_z = 0, theta_xx = 0, theta_zz = 0, theta_xz = 0, theta_xxx = 0, theta_xxz = 0;
    double g = 0, g_x = 0, g_z = 0, g_xx = 0, g_zz = 0, g_xz = 0, g_xxx = 0, g_xxz = 0;
};

class FieldSource {
public:
    virtual ~FieldSource() = default;
    virtual FieldSample sample(double s, double x, double z) const = 0;
    virtual double theta(double s, double x, double z) const = 0;
    virtual double g(double s, double x, double z) const = 0;
    /// Throws std::domain_error if (s, x, z) is outside the represented domain.
    virtual void check_domain(double s, double x, double z) const = 0;
};

class AnsatzFields final : public FieldSource {
public:
    explicit AnsatzFields(ClosedFormSolution sol) : sol_(std::move(sol)) {}

    FieldSample sample(double s, double x, double z) const override;
    double theta(double s, double x, double z) const override;
    double g(double s, double x, double z) const override;
    void check_domain(double s, double x, double z) const override;

    const ClosedFormSolution& solution() const noexcept { return sol_; }

private:
    ClosedFormSolution sol_;
};

/// Derivative fields of a PideSolution precomputed with the solver's own
/// stencils; off-node queries use biquadratic Lagrange interpolation in
/// space and linear interpolation in time.
class GridFields final : public FieldSource {
public:
    explicit GridFields(const PideSolution& sol);

    FieldSample sample(double s, double x, double z) const override;
    double theta(double s, double x, double z) const override;
    double g(double s, double x, double z) const override;
    void check_domain(double s, double x, double z) const override;

private:
    enum Channel : std::size_t {
        kTheta, kThetaX, kThetaZ, kThetaXX, kThetaZZ, kThetaXZ, kThetaXXX, kThetaXXZ,
        kG, kGX, kGZ, kGXX, kGZZ, kGXZ, kGXXX, kGXXZ, kChannels
    };
    double interpolate(Channel c, double s, double x, double z) const;

    StateGrid2D grid_;
    std::vector<std::vector<double>> channels_;
};

}  // namespace eqpide
