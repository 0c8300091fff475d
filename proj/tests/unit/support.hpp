#pragma once

#include "eqpide/core_model.hpp"

#include <cmath>

namespace eqpide::testing {

// r0 = 0.02, r = 0.06, sigma = 0.2, mu = 1, T = 1, x0 = 1.
inline MarketSpec e0_spec() {
    MarketSpec s;
    s.r0 = CoefficientFn::constant(0.02, 1.0);
    s.r = CoefficientFn::constant(0.06, 1.0);
    s.sigma = CoefficientFn::constant(0.2, 1.0);
    return s;
}

// e0 plus one atom with intensity 2 and jump coefficient -0.1.
inline MarketSpec e1_spec() {
    MarketSpec s = e0_spec();
    s.jumps.push_back({1.0, 2.0, CoefficientFn::constant(-0.1, 1.0)});
    return s;
}

inline MarketParams e0() { return MarketParams(e0_spec()); }
inline MarketParams e1() { return MarketParams(e1_spec()); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Reference values from tests/oracles/mv_oracle.py (adaptive DOP853, rtol 1e-13).
namespace ref_e0 {
inline constexpr double M1 = 1.0408107741923882, M2 = 0.04487533044863522, M3 = 0.041218868331264924;
inline constexpr double N1 = 1.020201340026756, N2 = 0.040402680053511816;
inline constexpr double alpha0 = 0.942858956846419;
inline constexpr double alpha[] = {0.942858956846419, 0.9566272898653154, 0.9707319452683406, 0.9851852156682673};
inline constexpr double theta011 = 0.5840619206517765, g011 = 1.0606040200802678, J01 = -1.0389825431337034;
}  // namespace ref_e0

namespace ref_e1 {
inline constexpr double M1 = 1.0408107741923884, M2 = 0.02901213051451633, M3 = 0.027479245554176523;
inline constexpr double N1 = 1.0202013400267558, N2 = 0.026935120035674387;
inline constexpr double alpha[] = {0.6366569134904535, 0.643958240825357, 0.6513912870323579, 0.6589595534828856};
inline constexpr double theta011 = 0.562390697907629, g011 = 1.0471364600624302, J01 = -1.03299314515084;
}  // namespace ref_e1

}  // namespace eqpide::testing
