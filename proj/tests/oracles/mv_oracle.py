"""Independent reference values for the mean-variance equilibrium.

Integrates the unreduced backward ODE system with scipy's adaptive
Runge-Kutta (rtol 1e-13) and cross-checks with the analytic
constant-coefficient expressions. Values printed here are frozen into
the C++ unit and acceptance tests.
"""
import numpy as np
from scipy.integrate import solve_ivp, quad


def economy(r0=0.02, r=0.06, sigma=0.2, atoms=(), mu=1.0, T=1.0):
    rho = r - r0
    stot2 = sigma**2 + sum(nu * phi**2 for nu, phi in atoms)
    return dict(r0=r0, rho=rho, sigma=sigma, stot2=stot2, kappa=rho / stot2, mu=mu, T=T)


def rhs(s, y, e):
    M1, M2, M3, N1, N2 = y
    r0, rho, st2, mu = e["r0"], e["rho"], e["stot2"], e["mu"]
    a = -(M1 + M3 - N1 * mu - N1**2 - N1 * N2) / ((M1 + M3) * st2) * rho
    return [
        -2 * r0 * M1,
        -2 * r0 * M2 - 2 * (M2 + M3) * a * rho - (M1 + M2 + 2 * M3) * a * a * st2,
        -2 * r0 * M3 - (M3 + M1) * a * rho,
        -r0 * N1,
        -r0 * N2 - (N1 + N2) * a * rho,
    ]


def solve(e, s):
    sol = solve_ivp(rhs, [e["T"], s], [1, 0, 0, 1, 0], args=(e,), rtol=1e-13, atol=1e-15, method="DOP853")
    return sol.y[:, -1]


def report(name, e):
    print(f"== {name}: kappa={e['kappa']!r} stot2={e['stot2']!r}")
    for s in (0.0, 0.25, 0.5, 0.75):
        M1, M2, M3, N1, N2 = solve(e, s)
        alpha = e["mu"] * e["kappa"] / (N1 + N2)
        theta = 0.5 * M1 + 0.5 * M2 + M3
        g = N1 + N2
        J = (M2 - N2**2 - 2 * e["mu"] * (N1 + N2)) / 2
        print(f"s={s}: M1={M1!r} M2={M2!r} M3={M3!r} N1={N1!r} N2={N2!r}")
        print(f"   alpha={alpha!r} theta(s,1,1)={theta!r} g(s,1,1)={g!r} J(s,1)={J!r}")
        print(f"   Hgap coeff 0.5*M1*stot2={0.5*M1*e['stot2']!r}  0.5*(M1+M3)*stot2={0.5*(M1+M3)*e['stot2']!r}")
    # analytic N2 for constant coefficients
    r0, T, mu, k, rho = e["r0"], e["T"], e["mu"], e["kappa"], e["rho"]
    n2 = mu * np.exp(r0 * T) * k * rho * (1 - np.exp(-r0 * T)) / r0
    print("analytic N2(0) =", repr(n2))
    # explicit quadrature formula
    inner = quad(lambda tau: np.exp(-r0 * (T - tau)) * k * rho, 0, T, epsabs=1e-15)[0]
    print("alpha*(0) via quadrature formula =", repr(mu * np.exp(-r0 * T) / (1 + mu * inner) * k))


if __name__ == "__main__":
    report("E0", economy())
    report("E1", economy(atoms=((2.0, -0.1),)))
    report("E0 mu=0", economy(mu=0.0))
