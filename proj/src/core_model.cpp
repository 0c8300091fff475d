#include "eqpide/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace eqpide {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid market:";
    for (const auto& s : v) {
        out += "\n  - ";
        out += s;
    }
    return out;
}

// Knots of every piecewise-linear coefficient plus a uniform sweep. Between
// knots r - r0 is linear, so the knots alone decide the sign condition; the
// sweep covers sigma^2, which is not piecewise linear.
std::vector<double> check_points(const MarketSpec& spec) {
    std::set<double> pts;
    auto add_knots = [&](const CoefficientFn& f) {
        for (std::size_t k = 0; k < f.size(); ++k) pts.insert(f.node(k));
    };
    add_knots(spec.r0);
    add_knots(spec.r);
    add_knots(spec.sigma);
    for (const auto& a : spec.jumps) add_knots(a.coefficient);
    constexpr std::size_t sweep = 1000;
    for (std::size_t k = 0; k <= sweep; ++k) pts.insert(spec.horizon * static_cast<double>(k) / sweep);
    return {pts.begin(), pts.end()};
}

}  // namespace

InvalidMarket::InvalidMarket(std::vector<std::string> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

CoefficientFn::CoefficientFn(std::vector<double> samples, double horizon)
    : samples_(std::move(samples)), horizon_(horizon) {
    if (samples_.size() < 2) throw std::invalid_argument("coefficient function needs at least 2 samples");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw std::invalid_argument("coefficient function horizon must be positive");
    for (double v : samples_)
        if (!std::isfinite(v)) throw std::invalid_argument("coefficient function sample is not finite");
}

CoefficientFn CoefficientFn::constant(double value, double horizon) {
    return CoefficientFn({value, value}, horizon);
}

double CoefficientFn::operator()(double s) const noexcept {
    const std::size_t n = samples_.size();
    if (s <= 0.0) return samples_.front();
    if (s >= horizon_) return samples_.back();
    const double pos = s / horizon_ * static_cast<double>(n - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * samples_[k] + w * samples_[k + 1];
}

CoefficientFn CoefficientFn::scaled(double factor) const {
    std::vector<double> s(samples_);
    for (double& v : s) v *= factor;
    return CoefficientFn(std::move(s), horizon_);
}

std::vector<std::string> validate(const MarketSpec& spec) {
    std::vector<std::string> out;
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    };
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) {
        out.push_back("horizon: must be positive and finite");
        return out;
    }
    for (const auto* f : {&spec.r0, &spec.r, &spec.sigma}) {
        if (f->size() < 2) {
            out.push_back("coefficients: r0, r and sigma must be set");
            return out;
        }
    }
    auto same_horizon = [&](const CoefficientFn& f) { return std::abs(f.horizon() - spec.horizon) <= 1e-12 * spec.horizon; };
    if (!same_horizon(spec.r0) || !same_horizon(spec.r) || !same_horizon(spec.sigma))
        out.push_back("coefficients: grids must span [0, horizon]");
    if (!(spec.mu >= 0.0) || !std::isfinite(spec.mu)) out.push_back("mu: must be finite and >= 0");
    if (!std::isfinite(spec.x0)) out.push_back("x0: must be finite");
    if (!(spec.ellipticity_eps > 0.0)) out.push_back("ellipticity_eps: must be positive");

    for (std::size_t i = 0; i < spec.jumps.size(); ++i) {
        const auto& a = spec.jumps[i];
        const std::string tag = "jump atom " + std::to_string(i);
        if (!(a.intensity >= 0.0) || !std::isfinite(a.intensity)) out.push_back(tag + ": intensity must be finite and >= 0");
        if (a.coefficient.size() < 2) {
            out.push_back(tag + ": coefficient not set");
            continue;
        }
        if (!same_horizon(a.coefficient)) out.push_back(tag + ": coefficient grid must span [0, horizon]");
        double worst = 0.0;
        for (double v : a.coefficient.samples()) worst = std::min(worst, v);
        if (worst < -1.0) out.push_back(tag + ": limited liability violated, coefficient " + fmt(worst) + " < -1");
    }
    if (!out.empty()) return out;

    bool rate_reported = false;
    bool ellipticity_reported = false;
    for (double s : check_points(spec)) {
        const double rho = spec.r(s) - spec.r0(s);
        if (!rate_reported && !(rho > 0.0)) {
            out.push_back("rates: r(s) > r0(s) violated at s=" + fmt(s) + " (r - r0 = " + fmt(rho) + ")");
            rate_reported = true;
        }
        double var = spec.sigma(s) * spec.sigma(s);
        for (const auto& a : spec.jumps) var += a.coefficient(s) * a.coefficient(s) * a.intensity;
        if (!ellipticity_reported && var < spec.ellipticity_eps) {
            out.push_back("ellipticity: sigma^2 + sum phi^2 nu = " + fmt(var) + " < " + fmt(spec.ellipticity_eps) +
                          " at s=" + fmt(s));
            ellipticity_reported = true;
        }
    }
    return out;
}

MarketParams::MarketParams(MarketSpec spec) : spec_(std::move(spec)) {
    auto v = validate(spec_);
    if (!v.empty()) throw InvalidMarket(std::move(v));
}

void MarketParams::check_time(double s) const {
    const double slack = 1e-12 * spec_.horizon;
    if (!(s >= -slack && s <= spec_.horizon + slack))
        throw std::domain_error("time " + std::to_string(s) + " outside [0, " + std::to_string(spec_.horizon) + "]");
}

double MarketParams::r0(double s) const { return spec_.r0(s); }
double MarketParams::sigma(double s) const { return spec_.sigma(s); }
double MarketParams::jump_coefficient(std::size_t atom, double s) const { return spec_.jumps.at(atom).coefficient(s); }

double MarketParams::excess_return(double s) const {
    check_time(s);
    return spec_.r(s) - spec_.r0(s);
}

double MarketParams::jump_variance(double s) const {
    double v = 0.0;
    for (const auto& a : spec_.jumps) {
        const double phi = a.coefficient(s);
        v += phi * phi * a.intensity;
    }
    return v;
}

double MarketParams::total_variance(double s) const {
    const double sig = spec_.sigma(s);
    return sig * sig + jump_variance(s);
}

double MarketParams::kappa(double s) const {
    check_time(s);
    return excess_return(s) / total_variance(s);
}

MarketParams MarketParams::with_mu(double mu) const {
    MarketSpec s = spec_;
    s.mu = mu;
    return MarketParams(std::move(s));
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n_steps) {
    if (n_steps == 0) throw std::invalid_argument("grid needs at least one step");
    std::vector<double> g(n_steps + 1);
    const double h = (t1 - t0) / static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k) g[k] = t0 + h * static_cast<double>(k);
    g.back() = t1;
    return g;
}

}  // namespace eqpide
