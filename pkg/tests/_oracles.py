"""Independent brute-force oracles used to freeze expected values.

Everything here deliberately avoids the library's own evaluation paths:
incomplete-beta values come from direct quadrature of the defining integral,
radial laws from integrating the density with singularity-aware weighted
quadrature (QAWS), and occupation quantities from the raw one-dimensional
integral form rather than the closed incomplete-beta form.
"""

import math

import numpy as np
from scipy import integrate, optimize


def betainc_quadrature(z, w, x):
    """I(x; z, w) by direct integration of u^(z-1) (1-u)^(w-1)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lb = math.lgamma(z) + math.lgamma(w) - math.lgamma(z + w)
    # endpoint weight (u - 0)^(z-1); the (1-u)^(w-1) factor is smooth on (0, x)
    val, err = integrate.quad(lambda u: (1.0 - u) ** (w - 1.0), 0.0, x,
                              weight="alg", wvar=(z - 1.0, 0.0),
                              epsabs=1e-13, epsrel=1e-13, limit=400)
    return val / math.exp(lb)


def radial_exit_cdf(r, alpha):
    """CDF of the unit-ball exit radius by integrating its density."""
    if r <= 1.0:
        return 0.0
    c = (2.0 / math.pi) * math.sin(math.pi * alpha / 2.0)
    # (s^2-1)^(-a/2) = (s-1)^(-a/2) (s+1)^(-a/2); left factor is the weight
    val, err = integrate.quad(lambda s: c * (s + 1.0) ** (-alpha / 2.0) / s,
                              1.0, r, weight="alg", wvar=(-alpha / 2.0, 0.0),
                              epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def radial_exit_tail(t, alpha):
    """P(exit radius > t) for t > 1, via the substitution v = 1/s."""
    c = (2.0 / math.pi) * math.sin(math.pi * alpha / 2.0)
    val, err = integrate.quad(
        lambda v: c * v ** (alpha - 1.0) * (1.0 - v * v) ** (-alpha / 2.0),
        0.0, 1.0 / t, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def radial_exit_quantile(u, alpha):
    """Brute-force root of cdf(r) = u with an expanding bracket."""
    hi = 2.0
    while radial_exit_cdf(hi, alpha) < u:
        hi *= 4.0
        if hi > 1e12:
            raise RuntimeError("quantile bracket blew up")
    return optimize.brentq(lambda r: radial_exit_cdf(r, alpha) - u,
                           1.0 + 1e-13, hi, xtol=1e-13, rtol=8.9e-16)


def sphere_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.exp(math.lgamma(d / 2.0))


def exit_density_mass(alpha, d):
    """Total mass of the d-dimensional ball-exit density, integrated in the
    substituted variable v = 1/r so both endpoint singularities are explicit
    algebraic weights."""
    cnorm = (math.pi ** -(d / 2.0 + 1.0) * math.exp(math.lgamma(d / 2.0))
             * math.sin(math.pi * alpha / 2.0)) * sphere_area(d)
    val, err = integrate.quad(lambda v: cnorm * (1.0 + v) ** (-alpha / 2.0),
                              0.0, 1.0, weight="alg",
                              wvar=(alpha - 1.0, -alpha / 2.0),
                              epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def occupation_integral_raw(rho, d, alpha):
    """The inner integral of the occupation density in its raw form."""
    upper = rho ** -2 - 1.0
    val, err = integrate.quad(lambda u: (u + 1.0) ** (-d / 2.0),
                              0.0, upper, weight="alg",
                              wvar=(alpha / 2.0 - 1.0, 0.0),
                              epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def occupation_density_raw(rho, d, alpha):
    """Expected-occupation density at radius rho from the raw integral."""
    c = (2.0 ** -alpha * math.pi ** (-d / 2.0)
         * math.exp(math.lgamma(d / 2.0) - 2.0 * math.lgamma(alpha / 2.0)))
    return c * rho ** (alpha - d) * occupation_integral_raw(rho, d, alpha)


def occupation_mass(alpha, d=2):
    """Total occupation mass of the unit ball (the expected exit time from
    the centre), from the raw density."""
    c = (2.0 ** -alpha * math.pi ** (-d / 2.0)
         * math.exp(math.lgamma(d / 2.0) - 2.0 * math.lgamma(alpha / 2.0)))

    def smooth(rho):
        # rho^(alpha-1) is split off as the quadrature weight
        return c * sphere_area(d) * occupation_integral_raw(rho, d, alpha)

    val, err = integrate.quad(smooth, 0.0, 1.0, weight="alg",
                              wvar=(alpha - 1.0, 0.0),
                              epsabs=1e-11, epsrel=1e-11, limit=400)
    return val


def source_ball_quadrature(f, center, r, alpha, tol=1e-9):
    """r^alpha * integral of f(center + r y) against the d=2 occupation
    density, via polar coordinates with the radial singularity substituted
    away (s = v^(1/alpha))."""
    inv_alpha = 1.0 / alpha

    def integrand(theta, v):
        s = v ** inv_alpha
        y = np.array([center[0] + r * s * math.cos(theta),
                      center[1] + r * s * math.sin(theta)])
        dens_over_pow = occupation_density_raw(s, 2, alpha) / s ** (alpha - 2.0)
        # area element s ds dtheta with s^(alpha-1) ds = dv / alpha
        return f(y) * dens_over_pow * inv_alpha

    val, err = integrate.dblquad(integrand, 0.0, 1.0, -math.pi, math.pi,
                                 epsabs=tol, epsrel=1e-9)
    return r ** alpha * val


def gaussian_ball_reference_origin(alpha, pole, tol=1e-10):
    """The Gaussian-data solution at the centre of the unit ball by plain
    one-dimensional weighted quadrature (data centred on the axis at |pole|).

    Only valid at x = 0, where the kernel is radial so the angular integral
    reduces to a Bessel-type average computed numerically."""
    c = math.pi ** -2 * math.sin(math.pi * alpha / 2.0)
    b = float(np.linalg.norm(pole))

    def angular(R):
        val, _ = integrate.quad(
            lambda th: math.exp(-(R * R + b * b - 2.0 * R * b * math.cos(th))),
            0.0, 2.0 * math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    def func(R):
        return c * (R + 1.0) ** (-alpha / 2.0) * angular(R) / R

    val, err = integrate.quad(func, 1.0, 14.0, weight="alg",
                              wvar=(-alpha / 2.0, 0.0),
                              epsabs=tol, epsrel=1e-10, limit=400)
    return val
