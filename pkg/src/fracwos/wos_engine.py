"""The walk-on-spheres core: single-walk execution with exact or skin-layer
termination, the exterior payoff, the occupation-measure source increment,
and the phase-space path simulator.

Stable walks exit the domain by a jump after an almost surely finite number
of steps, so the default is exact termination (eps_skin = 0); a positive
eps_skin truncates walks whose inscribed radius falls below it, trading an
O(eps) payoff bias for fewer steps on awkward domains.

This module mirrors, draw for draw, the compiled loop in ``_kernels`` (see
the draw contract there); running both against the same stream produces the
same trajectory.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .geometry import Domain
from .stable_sampler import RngStream, StableParams, kappa_const

__all__ = [
    "Termination",
    "WalkResult",
    "PathRecord",
    "StepCapExceeded",
    "run_walk",
    "dirichlet_payoff",
    "source_increment",
    "chi_sample",
    "simulate_path",
]


class Termination(enum.Enum):
    EXACT_EXIT = "exact_exit"
    EPS_SKIN = "eps_skin"


class StepCapExceeded(RuntimeError):
    """A walk hit its step cap before leaving the domain (diagnostic only;
    such walks count toward no estimate)."""

    def __init__(self, steps, point):
        super().__init__(f"walk aborted after {steps} steps at {point.tolist()}")
        self.steps = steps
        self.point = point


@dataclass
class WalkResult:
    """One trajectory: the ball centres and radii, where it stopped, and the
    accumulated source contributions (zero when there is no source term)."""

    centers: np.ndarray
    radii: np.ndarray
    exit_point: np.ndarray
    steps: int
    termination: Termination
    source_acc: float


@dataclass
class PathRecord:
    """A fixed-step phase-space path: points visited and the per-step ball
    radius used to generate it."""

    points: np.ndarray
    jump_flags: np.ndarray
    tolerance: float


def run_walk(domain: Domain, params: StableParams, x0,
             g: Optional[Callable] = None, f: Optional[Callable] = None,
             eps_skin: float = 0.0, n_inner: int = 1000,
             rng: Optional[RngStream] = None,
             step_cap: int = 10 ** 6) -> WalkResult:
    """Run a single walk from x0 until it leaves the domain (or enters the
    eps_skin layer), accumulating the source estimate at every centre.

    g is unused here (payoffs are evaluated by ``dirichlet_payoff``) but
    accepted so call sites can pass the full problem data in one place.
    """
    if rng is None:
        raise ValueError("run_walk requires an RngStream")
    if f is not None and params.dim != 2:
        raise ValueError("source terms are supported in d = 2 only")
    x = np.asarray(x0, dtype=np.float64).copy()
    if not domain.contains(x):
        raise ValueError(f"walk must start inside the domain, got {x.tolist()}")
    gen = rng.generator
    alpha = params.alpha
    centers = []
    radii = []
    src = 0.0
    steps = 0
    while True:
        gap = domain.interior_gap(x)
        if gap <= _kernels.SLACK:
            term = Termination.EXACT_EXIT
            break
        if eps_skin > 0.0 and gap < eps_skin:
            term = Termination.EPS_SKIN
            break
        if steps >= step_cap:
            raise StepCapExceeded(steps, x)
        if f is not None:
            src += source_increment(x, gap, f, alpha, n_inner, rng)
        centers.append(x.copy())
        radii.append(gap)
        w = gen.standard_normal(params.dim)
        s = math.sqrt(float(w @ w))
        if s == 0.0:
            w[0] = 1.0
            s = 1.0
        rad = gap * float(_kernels.unit_exit_radius(gen.random(), alpha))
        x = x + rad * w / s
        steps += 1
    return WalkResult(
        centers=np.array(centers).reshape(steps, params.dim),
        radii=np.array(radii),
        exit_point=x,
        steps=steps,
        termination=term,
        source_acc=src,
    )


def dirichlet_payoff(walk: WalkResult, g: Callable, domain: Domain) -> float:
    """Exterior payoff of a finished walk.

    Exact exits evaluate g at the exit point; skin-terminated walks stopped
    just inside, so g is evaluated at the nearest exterior point instead,
    which introduces an O(eps) bias for Lipschitz g (documented, not
    corrected)."""
    if walk.termination is Termination.EXACT_EXIT:
        return float(g(walk.exit_point))
    return float(g(domain.nearest_exterior(walk.exit_point)))


def source_increment(rho, r: float, f: Callable, alpha: float,
                     n_inner: int, rng: RngStream) -> float:
    """Single-ball source contribution r^alpha V(0, f(rho + r .)) estimated
    from n_inner (radius, angle) draws with the constant part split off as a
    control variate; exact (zero inner variance) for constant f."""
    if n_inner < 1:
        raise ValueError("n_inner must be a positive integer")
    rho = np.asarray(rho, dtype=np.float64)
    draws = rng.generator.random(2 * n_inner)
    fc = float(f(rho))
    z = 1.0 - 0.5 * alpha
    w = 0.5 * alpha
    inv_alpha = 1.0 / alpha
    acc = 0.0
    for k in range(n_inner):
        rr = draws[2 * k] ** inv_alpha
        th = -math.pi + 2.0 * math.pi * draws[2 * k + 1]
        wgt = 1.0 - float(_kernels.betainc(z, w, rr * rr))
        y = np.array([rho[0] + r * rr * math.cos(th),
                      rho[1] + r * rr * math.sin(th)])
        acc += wgt * (float(f(y)) - fc)
    a2 = 2.0 ** (1.0 - alpha) / alpha * math.exp(-2.0 * math.lgamma(alpha / 2.0)) \
        * math.exp(math.lgamma(1.0 - alpha / 2.0) + math.lgamma(alpha / 2.0))
    return a2 * r ** alpha * (kappa_const(alpha) * fc + acc / n_inner)


def chi_sample(problem, x0, rng: RngStream) -> float:
    """One unbiased sample of the solution at x0: exterior payoff plus the
    accumulated source contributions of a single walk."""
    params = problem.params
    g = problem.g.as_callable(params)
    f = problem.f.as_callable(params) if problem.f is not None else None
    walk = run_walk(problem.domain, params, x0, g=g, f=f,
                    eps_skin=problem.eps_skin, n_inner=problem.n_inner,
                    rng=rng, step_cap=problem.step_cap)
    return dirichlet_payoff(walk, g, problem.domain) + walk.source_acc


def simulate_path(x0, params: StableParams, tol: float, step_cap: int,
                  rng: RngStream) -> PathRecord:
    """Phase-space path of the process: step_cap i.i.d. ball exits of radius
    tol appended to x0.  Exact in the law of visited points; carries no time
    parametrisation."""
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if step_cap < 0:
        raise ValueError("step_cap must be nonnegative")
    x0 = np.asarray(x0, dtype=np.float64)
    d = params.dim
    points = np.empty((step_cap + 1, d))
    points[0] = x0
    if step_cap:
        gen = rng.generator
        w = gen.standard_normal((step_cap, d))
        norms = np.linalg.norm(w, axis=1)
        norms[norms == 0.0] = 1.0
        radii = _kernels.unit_exit_radius_v(gen.random(step_cap), params.alpha)
        steps = (tol * radii / norms)[:, None] * w
        points[1:] = x0 + np.cumsum(steps, axis=0)
    return PathRecord(points=points,
                      jump_flags=np.ones(step_cap, dtype=bool),
                      tolerance=tol)
