"""Problem descriptors and reference solutions for the ball verification
problems: the free-space kernel solution, the Gaussian-data Poisson-kernel
quadrature, and the polynomial source problem with known exact solution.

Reference values are computed at runtime by adaptive quadrature (with
singularity-removing substitutions) and cached; nothing is hardcoded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from . import _kernels
from .geometry import Domain
from .stable_sampler import StableParams

__all__ = [
    "ExteriorData",
    "SourceData",
    "ProblemSpec",
    "green_reference",
    "ball_poisson_reference",
    "dyda_exact",
    "dyda_source",
    "dyda_coefficient",
]


@dataclass(frozen=True)
class ExteriorData:
    """Descriptor for the exterior data g: a builtin closed form with its
    parameters, or an arbitrary callable (which forfeits the compiled path)."""

    kind: str
    params: tuple = ()
    func: Optional[Callable] = None

    @classmethod
    def constant(cls, c: float) -> "ExteriorData":
        return cls("constant", (float(c),))

    @classmethod
    def green(cls, pole) -> "ExteriorData":
        return cls("green", tuple(float(v) for v in pole))

    @classmethod
    def gaussian(cls, pole) -> "ExteriorData":
        return cls("gaussian", tuple(float(v) for v in pole))

    @classmethod
    def indicator_x1_below(cls, threshold: float) -> "ExteriorData":
        return cls("indicator_x1", (float(threshold),))

    @classmethod
    def custom(cls, func: Callable) -> "ExteriorData":
        return cls("custom", (), func)

    @property
    def is_builtin(self) -> bool:
        return self.kind != "custom"

    def kernel_code(self, params: StableParams):
        if self.kind == "constant":
            return _kernels.G_CONST, np.array(self.params)
        if self.kind == "green":
            return _kernels.G_GREEN, np.array(self.params)
        if self.kind == "gaussian":
            return _kernels.G_GAUSS, np.array(self.params)
        if self.kind == "indicator_x1":
            return _kernels.G_INDICATOR_X1, np.array(self.params)
        raise ValueError(f"no compiled form for exterior data {self.kind!r}")

    def as_callable(self, params: StableParams) -> Callable:
        if self.kind == "constant":
            c = self.params[0]
            return lambda y: c
        if self.kind == "green":
            pole = np.array(self.params)
            return lambda y: green_reference(y, pole, params)
        if self.kind == "gaussian":
            pole = np.array(self.params)
            return lambda y: math.exp(-float(np.sum((np.asarray(y) - pole) ** 2)))
        if self.kind == "indicator_x1":
            thr = self.params[0]
            return lambda y: 1.0 if y[0] < thr else 0.0
        return self.func

    def config(self):
        if self.kind == "constant":
            return {"constant": self.params[0]}
        if self.kind in ("green", "gaussian"):
            return {self.kind: {"pole": list(self.params)}}
        if self.kind == "indicator_x1":
            return {"indicator_x1": {"threshold": self.params[0]}}
        raise ValueError(f"exterior data {self.kind!r} has no config form")

    @classmethod
    def from_config(cls, spec) -> "ExteriorData":
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        if len(spec) != 1:
            raise ValueError(f"exterior data spec must name one form: {spec!r}")
        kind, body = next(iter(spec.items()))
        if kind == "constant":
            return cls.constant(body)
        if kind == "green":
            return cls.green(body["pole"])
        if kind == "gaussian":
            return cls.gaussian(body["pole"])
        if kind == "indicator_x1":
            return cls.indicator_x1_below(body["threshold"])
        raise ValueError(f"unknown exterior data kind {kind!r}")


@dataclass(frozen=True)
class SourceData:
    """Descriptor for the source term f (d = 2 problems only)."""

    kind: str
    params: tuple = ()
    func: Optional[Callable] = None

    @classmethod
    def constant(cls, c: float) -> "SourceData":
        return cls("constant", (float(c),))

    @classmethod
    def dyda(cls) -> "SourceData":
        return cls("dyda")

    @classmethod
    def custom(cls, func: Callable) -> "SourceData":
        return cls("custom", (), func)

    @property
    def is_builtin(self) -> bool:
        return self.kind != "custom"

    def kernel_code(self, params: StableParams):
        if self.kind == "constant":
            return _kernels.F_CONST, np.array(self.params)
        if self.kind == "dyda":
            return _kernels.F_DYDA, np.array([dyda_coefficient(params.alpha)])
        raise ValueError(f"no compiled form for source {self.kind!r}")

    def as_callable(self, params: StableParams) -> Callable:
        if self.kind == "constant":
            c = self.params[0]
            return lambda y: c
        if self.kind == "dyda":
            a = params.alpha
            return lambda y: dyda_source(y, a)
        return self.func

    def config(self):
        if self.kind == "constant":
            return {"constant": self.params[0]}
        if self.kind == "dyda":
            return {"dyda": {}}
        raise ValueError(f"source {self.kind!r} has no config form")

    @classmethod
    def from_config(cls, spec) -> "SourceData":
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        if len(spec) != 1:
            raise ValueError(f"source spec must name one form: {spec!r}")
        kind, body = next(iter(spec.items()))
        if kind == "constant":
            return cls.constant(body)
        if kind == "dyda":
            return cls.dyda()
        raise ValueError(f"unknown source kind {kind!r}")


@dataclass
class ProblemSpec:
    """A fully specified solve: domain, process parameters, data, evaluation
    points and sampling policy."""

    domain: Domain
    params: StableParams
    g: ExteriorData
    f: Optional[SourceData] = None
    eval_points: Sequence = ()
    tol: Optional[float] = None
    n_samples: Optional[int] = None
    seed: int = 0
    eps_skin: float = 0.0
    n_inner: int = 1000
    g_square_integrable: bool = True
    step_cap: int = 10 ** 6

    def __post_init__(self):
        if self.domain.dim != self.params.dim:
            raise ValueError("domain and process dimensions disagree")
        if self.f is not None and self.params.dim != 2:
            raise ValueError("source terms are supported in d = 2 only")
        if (self.tol is None) == (self.n_samples is None):
            raise ValueError("exactly one of tol and n_samples must be set")
        if self.eps_skin < 0.0:
            raise ValueError("eps_skin must be nonnegative")
        if self.n_inner < 1:
            raise ValueError("n_inner must be a positive integer")
        self.eval_points = [np.asarray(p, dtype=np.float64)
                            for p in self.eval_points]
        for p in self.eval_points:
            if not self.domain.contains(p):
                raise ValueError(f"evaluation point {p.tolist()} is not interior")


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------

def green_reference(x, y, params: StableParams) -> float:
    """Free-space kernel |x - y|^(alpha - d), normalisation constant 1.

    The solve-and-compare loop is linear in the data, so the unknown
    physical constant cancels as long as data and reference share it.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    s = float(np.sum((x - y) ** 2))
    if s == 0.0:
        raise ValueError("kernel is singular at x == y")
    return s ** (0.5 * (params.alpha - params.dim))


_poisson_cache: dict = {}


def ball_poisson_reference(x, y0, params: StableParams,
                           quad_tol: float = 1e-8) -> float:
    """Solution of the d=2 exterior-Gaussian problem on the unit ball at x,
    by adaptive quadrature of the Poisson-kernel integral.

    The data is exp(-|z - y0|^2) on the ball's complement.  The edge
    singularity (|z|^2 - 1)^(-alpha/2) is removed by substituting
    |z| = cosh(s)."""
    x = np.asarray(x, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    if params.dim != 2:
        raise ValueError("the Poisson-kernel reference is d = 2 only")
    xsq = float(x @ x)
    if xsq >= 1.0:
        raise ValueError("evaluation point must be inside the unit ball")
    key = (tuple(x), tuple(y0), params.alpha, quad_tol)
    hit = _poisson_cache.get(key)
    if hit is not None:
        return hit

    a = params.alpha
    front = math.pi ** -2 * math.sin(math.pi * a / 2.0) * (1.0 - xsq) ** (a / 2.0)
    s_max = math.acosh(max(3.0, float(np.linalg.norm(y0)) + 9.0))

    def integrand(theta, s):
        R = math.cosh(s)
        z0 = R * math.cos(theta)
        z1 = R * math.sin(theta)
        dx0 = z0 - x[0]
        dx1 = z1 - x[1]
        dy0 = z0 - y0[0]
        dy1 = z1 - y0[1]
        return (math.sinh(s) ** (1.0 - a) * R
                * math.exp(-(dy0 * dy0 + dy1 * dy1))
                / (dx0 * dx0 + dx1 * dx1))

    val, err = integrate.dblquad(integrand, 0.0, s_max, 0.0, 2.0 * math.pi,
                                 epsabs=quad_tol / max(front, 1e-300),
                                 epsrel=1e-10)
    if front * err > quad_tol:
        raise RuntimeError(
            f"quadrature error {front * err:.2e} above tolerance {quad_tol:.2e}")
    out = front * val
    _poisson_cache[key] = out
    return out


def dyda_coefficient(alpha: float) -> float:
    """Gamma-factor coefficient 2^a Gamma(2 + a/2) Gamma(1 + a/2)."""
    return 2.0 ** alpha * math.exp(math.lgamma(2.0 + alpha / 2.0)
                                   + math.lgamma(1.0 + alpha / 2.0))


def dyda_exact(x, alpha: float) -> float:
    """Exact solution max(0, 1 - |x|^2)^(1 + alpha/2) of the polynomial
    source problem on the unit ball with zero exterior data."""
    x = np.asarray(x, dtype=np.float64)
    return max(0.0, 1.0 - float(x @ x)) ** (1.0 + alpha / 2.0)


def dyda_source(x, alpha: float) -> float:
    """The matching source term, radial and sign-changing inside the ball."""
    x = np.asarray(x, dtype=np.float64)
    return dyda_coefficient(alpha) * (1.0 - (1.0 + alpha / 2.0) * float(x @ x))
