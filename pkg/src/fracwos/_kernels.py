"""Compiled scalar kernels: incomplete-beta machinery, domain queries and the
walk-on-spheres inner loops.

Everything in this module is numba-jitted, allocation-light and GIL-free so
that the per-walk loop compiles to tight machine code.  Validation and the
friendly object-based API live in the sibling modules; nothing here checks
its arguments.

Random draw contract (shared with the pure-Python walk in ``wos_engine`` so
that both produce bit-identical trajectories from the same stream): per step,
(1) if a source term is present, ``2 * n_inner`` uniforms consumed pairwise
as (radius, angle); (2) ``ndim`` standard normals for the jump direction;
(3) one uniform for the exit radius.
"""

import numpy as np
from math import cos, exp, fabs, inf, lgamma, log, log1p, nextafter, pi, sin, sqrt

from numba import njit, vectorize

# continued-fraction / Newton tuning
_CF_EPS = 3.0e-16
_FPMIN = 1.0e-300
_NEWTON_TOL = 1.0e-14
_MAX_NEWTON = 100

# boundary handling
SLACK = 1.0e-14   # interior gap below this counts as exterior
PUSH = 1.0e-12    # how far past the boundary nearest-exterior points land

# domain encodings
KIND_BALL = 0
KIND_BOX = 1
KIND_HALFSPACES = 2
KIND_UNION = 3

# exterior-data / source encodings
G_CONST = 0
G_GREEN = 1
G_GAUSS = 2
G_INDICATOR_X1 = 3

F_NONE = 0
F_CONST = 1
F_DYDA = 2

# walk termination status
STATUS_EXACT = 0
STATUS_SKIN = 1
STATUS_CAP = 2


# ---------------------------------------------------------------------------
# regularized incomplete beta and its inverse
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def betacf(a, b, x):
    """Lentz continued fraction for I(x; a, b); needs x < (a+1)/(a+b+2)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _CF_EPS:
            break
    return h


@njit(cache=True, nogil=True)
def betainc(a, b, x):
    """Regularized incomplete beta I(x; a, b) for a, b > 0, x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(lgamma(a + b) - lgamma(a) - lgamma(b)
                + a * log(x) + b * log1p(-x))
    # symmetry switch keeps the continued fraction in its convergent regime
    if x < (a + 1.0) / (a + b + 2.0):
        return front * betacf(a, b, x) / a
    return 1.0 - front * betacf(b, a, 1.0 - x) / b


@njit(cache=True, nogil=True)
def betaincinv(a, b, q):
    """Inverse of ``betainc`` in x: safeguarded Newton on the q-residual.

    Bisection fallback on [0, 1]; the returned double is polished to the
    representable value with the smallest residual, which matters near x = 1
    when b is small (the attainable values of I jump there).
    """
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    lbeta = lgamma(a + b) - lgamma(a) - lgamma(b)
    # starting guess: A&S 26.5.22 for both shapes >= 1, corner power laws
    # otherwise
    if a >= 1.0 and b >= 1.0:
        pp = q if q < 0.5 else 1.0 - q
        t = sqrt(-2.0 * log(pp))
        x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if q < 0.5:
            x = -x
        al = (x * x - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        ww = (x * sqrt(al + h) / h
              - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0))
              * (al + 5.0 / 6.0 - 2.0 / (3.0 * h)))
        x = a / (a + b * exp(2.0 * ww))
    else:
        lna = log(a / (a + b))
        lnb = log(b / (a + b))
        t = exp(a * lna) / a
        u = exp(b * lnb) / b
        ww = t + u
        if q < t / ww:
            x = (a * ww * q) ** (1.0 / a)
        else:
            x = 1.0 - (b * ww * (1.0 - q)) ** (1.0 / b)
    lo = 0.0
    hi = 1.0
    if x <= lo or x >= hi:
        x = 0.5
    for _ in range(_MAX_NEWTON):
        f = betainc(a, b, x) - q
        if fabs(f) < _NEWTON_TOL:
            break
        if f > 0.0:
            hi = x
        else:
            lo = x
        xn = -1.0
        if 0.0 < x < 1.0:
            ldens = (a - 1.0) * log(x) + (b - 1.0) * log1p(-x) + lbeta
            if ldens < 700.0:
                dens = exp(ldens)
                if dens > 0.0:
                    xn = x - f / dens
        if xn <= lo or xn >= hi or xn != xn:
            xn = 0.5 * (lo + hi)
        if xn == x:
            break
        x = xn
    # polish to the best representable neighbour
    best = x
    rbest = fabs(betainc(a, b, x) - q)
    xd = nextafter(x, 0.0)
    rd = fabs(betainc(a, b, xd) - q)
    if rd < rbest:
        best = xd
        rbest = rd
    xu = nextafter(x, 2.0)
    if xu <= 1.0:
        ru = fabs(betainc(a, b, xu) - q)
        if ru < rbest:
            best = xu
    return best


@vectorize(["f8(f8,f8,f8)"], cache=True, nopython=True)
def betainc_v(a, b, x):
    return betainc(a, b, x)


@vectorize(["f8(f8,f8,f8)"], cache=True, nopython=True)
def betaincinv_v(a, b, q):
    return betaincinv(a, b, q)


# ---------------------------------------------------------------------------
# exit-radius sampling for the unit ball
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def unit_exit_radius(u, alpha):
    """Exit-radius quantile at level u in [0, 1) for the unit ball.

    u is nudged away from 0 (keeps the jump strictly past the sphere) and the
    inverse-beta output away from underflow (keeps the radius finite); both
    clamps act below the resolution of float64 uniforms.
    """
    if u < 2.220446049250313e-16:
        u = 2.220446049250313e-16
    x = betaincinv(0.5 * alpha, 1.0 - 0.5 * alpha, 1.0 - u)
    if x < 1.0e-300:
        x = 1.0e-300
    # overshoots below one ulp would collapse the radius onto the sphere
    # (likely at alpha near 2); nudge so exits stay strictly outside
    if x > 1.0 - 2.220446049250313e-16:
        x = 1.0 - 2.220446049250313e-16
    return x ** -0.5


@vectorize(["f8(f8,f8)"], cache=True, nopython=True)
def unit_exit_radius_v(u, alpha):
    return unit_exit_radius(u, alpha)


# ---------------------------------------------------------------------------
# domain queries
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def interior_gap(kind, data, ndim, x):
    """Clearance from x to the domain's complement (positive means inside).

    Exact distance for balls, boxes and half-space intersections; for a union
    of balls it is the best single-ball clearance, a valid lower bound.
    """
    if kind == KIND_BALL:
        s = 0.0
        for j in range(ndim):
            d = x[j] - data[0, j]
            s += d * d
        return data[0, ndim] - sqrt(s)
    if kind == KIND_BOX:
        g = inf
        for j in range(ndim):
            a = x[j] - data[0, j]
            if a < g:
                g = a
            b = data[1, j] - x[j]
            if b < g:
                g = b
        return g
    if kind == KIND_HALFSPACES:
        g = inf
        for i in range(data.shape[0]):
            s = data[i, ndim]
            for j in range(ndim):
                s -= data[i, j] * x[j]
            if s < g:
                g = s
        return g
    g = -inf
    for i in range(data.shape[0]):
        s = 0.0
        for j in range(ndim):
            d = x[j] - data[i, j]
            s += d * d
        v = data[i, ndim] - sqrt(s)
        if v > g:
            g = v
    return g


@njit(cache=True, nogil=True)
def _union_ray_exit(data, ndim, x, u):
    """Distance along unit ray u from x to the first point outside all balls."""
    t = 0.0
    for _ in range(4 * data.shape[0] + 8):
        extended = False
        for i in range(data.shape[0]):
            # is x + (t + PUSH) u strictly inside ball i?
            s = 0.0
            beta = 0.0
            for j in range(ndim):
                d = x[j] + (t + PUSH) * u[j] - data[i, j]
                s += d * d
                beta += u[j] * (x[j] - data[i, j])
            if sqrt(s) < data[i, ndim] - SLACK:
                gam = 0.0
                for j in range(ndim):
                    d = x[j] - data[i, j]
                    gam += d * d
                gam -= data[i, ndim] * data[i, ndim]
                disc = beta * beta - gam
                if disc > 0.0:
                    ti = -beta + sqrt(disc)
                    if ti > t:
                        t = ti
                        extended = True
        if not extended:
            break
    return t


@njit(cache=True, nogil=True)
def push_exterior(kind, data, ndim, x, out):
    """Write into ``out`` a point just outside the domain nearest to x."""
    if kind == KIND_BALL:
        s = 0.0
        for j in range(ndim):
            d = x[j] - data[0, j]
            s += d * d
        s = sqrt(s)
        if s < _FPMIN:
            for j in range(ndim):
                out[j] = data[0, j]
            out[0] += data[0, ndim] + PUSH
            return
        f = (data[0, ndim] + PUSH) / s
        for j in range(ndim):
            out[j] = data[0, j] + f * (x[j] - data[0, j])
        return
    if kind == KIND_BOX:
        jbest = 0
        lowside = True
        g = inf
        for j in range(ndim):
            a = x[j] - data[0, j]
            if a < g:
                g = a
                jbest = j
                lowside = True
            b = data[1, j] - x[j]
            if b < g:
                g = b
                jbest = j
                lowside = False
        for j in range(ndim):
            out[j] = x[j]
        if lowside:
            out[jbest] = data[0, jbest] - PUSH
        else:
            out[jbest] = data[1, jbest] + PUSH
        return
    if kind == KIND_HALFSPACES:
        ibest = 0
        g = inf
        for i in range(data.shape[0]):
            s = data[i, ndim]
            for j in range(ndim):
                s -= data[i, j] * x[j]
            if s < g:
                g = s
                ibest = i
        for j in range(ndim):
            out[j] = x[j] + (g + PUSH) * data[ibest, j]
        return
    # union of balls: march radially out of the ball with the best clearance,
    # continuing along the ray until clear of every ball
    ibest = 0
    g = -inf
    for i in range(data.shape[0]):
        s = 0.0
        for j in range(ndim):
            d = x[j] - data[i, j]
            s += d * d
        v = data[i, ndim] - sqrt(s)
        if v > g:
            g = v
            ibest = i
    s = 0.0
    for j in range(ndim):
        d = x[j] - data[ibest, j]
        s += d * d
    s = sqrt(s)
    if s < _FPMIN:
        for j in range(ndim):
            out[j] = 0.0
        out[0] = 1.0
    else:
        for j in range(ndim):
            out[j] = (x[j] - data[ibest, j]) / s
    t = _union_ray_exit(data, ndim, x, out)
    for j in range(ndim):
        out[j] = x[j] + (t + PUSH) * out[j]


# ---------------------------------------------------------------------------
# built-in exterior data and source terms
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def eval_exterior(gk, gp, y, alpha, ndim):
    if gk == G_CONST:
        return gp[0]
    if gk == G_GREEN:
        s = 0.0
        for j in range(ndim):
            d = y[j] - gp[j]
            s += d * d
        return s ** (0.5 * (alpha - ndim))
    if gk == G_GAUSS:
        s = 0.0
        for j in range(ndim):
            d = y[j] - gp[j]
            s += d * d
        return exp(-s)
    if gk == G_INDICATOR_X1:
        return 1.0 if y[0] < gp[0] else 0.0
    return 0.0


@njit(cache=True, nogil=True)
def eval_source(fk, fp, y0, y1, alpha):
    if fk == F_CONST:
        return fp[0]
    if fk == F_DYDA:
        # fp[0] carries the precomputed gamma-factor coefficient
        return fp[0] * (1.0 - (1.0 + 0.5 * alpha) * (y0 * y0 + y1 * y1))
    return 0.0


# ---------------------------------------------------------------------------
# walk-on-spheres loops
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def source_term(x, r, alpha, fk, fp, n_inner, kappa, a2, gen):
    """One ball's occupation-measure source estimate, control-variate form.

    Returns a2 * r**alpha * (kappa * f(x) + mean of the weighted centred
    differences over n_inner (radius, angle) draws); exact when f is constant.
    """
    fc = eval_source(fk, fp, x[0], x[1], alpha)
    zshape = 1.0 - 0.5 * alpha
    wshape = 0.5 * alpha
    inv_alpha = 1.0 / alpha
    acc = 0.0
    for _ in range(n_inner):
        rr = gen.random() ** inv_alpha
        th = -pi + 2.0 * pi * gen.random()
        wgt = 1.0 - betainc(zshape, wshape, rr * rr)
        fv = eval_source(fk, fp, x[0] + r * rr * cos(th),
                         x[1] + r * rr * sin(th), alpha)
        acc += wgt * (fv - fc)
    return a2 * r ** alpha * (kappa * fc + acc / n_inner)


@njit(cache=True, nogil=True)
def walk_chi(kind, data, ndim, x0, alpha, gk, gp, fk, fp,
             eps_skin, n_inner, kappa, a2, step_cap, gen):
    """Run one walk from x0; returns (chi, steps, status).

    chi is the exterior payoff plus the accumulated source contributions;
    status 2 marks a walk aborted at step_cap (chi is then NaN).
    """
    x = x0.copy()
    w = np.empty(ndim)
    src = 0.0
    steps = 0
    while True:
        gap = interior_gap(kind, data, ndim, x)
        if gap <= SLACK:
            return eval_exterior(gk, gp, x, alpha, ndim) + src, steps, STATUS_EXACT
        if eps_skin > 0.0 and gap < eps_skin:
            push_exterior(kind, data, ndim, x, w)
            return eval_exterior(gk, gp, w, alpha, ndim) + src, steps, STATUS_SKIN
        if steps >= step_cap:
            return np.nan, steps, STATUS_CAP
        if fk != F_NONE:
            src += source_term(x, gap, alpha, fk, fp, n_inner, kappa, a2, gen)
        s = 0.0
        for j in range(ndim):
            w[j] = gen.standard_normal()
            s += w[j] * w[j]
        s = sqrt(s)
        if s == 0.0:
            w[0] = 1.0
            s = 1.0
        rad = gap * unit_exit_radius(gen.random(), alpha)
        for j in range(ndim):
            x[j] += rad * w[j] / s
        steps += 1
