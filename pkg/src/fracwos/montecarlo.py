"""Estimator driving: fixed-budget and adaptive-tolerance aggregation with
streaming moments, deterministic per-sample random streams, step-count
statistics, and the geometric parameter that bounds step counts on convex
domains.

Reproducibility contract: sample i always draws from the stream keyed
(seed, i), and partial moments are accumulated over fixed-size index chunks
merged in index order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate

from . import _kernels
from .geometry import Domain
from .stable_sampler import StableParams, RngStream, philox_generator, \
    kappa_const, sample_exit_unit_ball
from .wos_engine import StepCapExceeded, run_walk, dirichlet_payoff
from .reference import ProblemSpec

__all__ = [
    "Estimate",
    "StepHistogram",
    "ToleranceNotReached",
    "estimate_fixed",
    "estimate_adaptive",
    "step_statistics",
    "geometric_parameter",
]

# samples per accumulation chunk; fixed so that chunk boundaries (and hence
# the merge tree) never depend on the worker count
_CHUNK = 2048


class ToleranceNotReached(RuntimeError):
    """Raised when a budget ran out first; carries the partial result."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class Estimate:
    """Streaming Monte Carlo aggregate with unbiased sample variance."""

    mean: float
    var: float
    n: int
    std_error: float
    stop_reason: str = "fixed"
    n_aborted: int = 0
    wall_seconds: Optional[float] = None

    @classmethod
    def from_moments(cls, n, mean, m2, **kw) -> "Estimate":
        if n < 1:
            raise ValueError("an estimate needs at least one sample")
        var = m2 / (n - 1) if n > 1 else 0.0
        return cls(mean=mean, var=var, n=n,
                   std_error=math.sqrt(var / n), **kw)

    def merge(self, other: "Estimate") -> "Estimate":
        """Combine two disjoint-sample estimates (pairwise moment merge)."""
        n, mean, m2 = _merge_moments(
            self.n, self.mean, self.var * (self.n - 1),
            other.n, other.mean, other.var * (other.n - 1))
        return Estimate.from_moments(
            n, mean, m2, stop_reason="merged",
            n_aborted=self.n_aborted + other.n_aborted)

    def to_record(self, include_timing: bool = True) -> dict:
        rec = {"mean": self.mean, "var": self.var, "n": self.n,
               "std_error": self.std_error, "stop_reason": self.stop_reason,
               "n_aborted": self.n_aborted}
        if include_timing:
            rec["wall_seconds"] = self.wall_seconds
        return rec


def _merge_moments(n1, mean1, m21, n2, mean2, m22):
    if n1 == 0:
        return n2, mean2, m22
    if n2 == 0:
        return n1, mean1, m21
    n = n1 + n2
    delta = mean2 - mean1
    mean = mean1 + delta * n2 / n
    m2 = m21 + m22 + delta * delta * n1 * n2 / n
    return n, mean, m2


@dataclass
class StepHistogram:
    """Empirical step-count distribution of a batch of walks."""

    counts: dict
    runs: int
    mean_steps: float
    n_aborted: int = 0
    _ns: np.ndarray = field(init=False, repr=False)
    _tail: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ns = np.array(sorted(self.counts), dtype=np.int64)
        cnt = np.array([self.counts[n] for n in ns], dtype=np.int64)
        # tail[i] = P(N > ns[i])
        self._ns = ns
        self._tail = (self.runs - np.cumsum(cnt)) / self.runs

    def tail(self, n: int) -> float:
        """Empirical probability that a walk takes more than n steps."""
        i = np.searchsorted(self._ns, n, side="right") - 1
        if i < 0:
            return 1.0
        return float(self._tail[i])

    def rows(self):
        """(step count, occurrences, tail) triples in increasing step order."""
        return [(int(n), int(self.counts[int(n)]), float(t))
                for n, t in zip(self._ns, self._tail)]


# ---------------------------------------------------------------------------
# per-sample walk evaluation
# ---------------------------------------------------------------------------

def _compiled_value_fn(problem: ProblemSpec, x0):
    """Per-sample chi through the compiled loop (builtin data only)."""
    params = problem.params
    dom = problem.domain
    gk, gp = problem.g.kernel_code(params)
    if problem.f is None:
        fk, fp = _kernels.F_NONE, np.zeros(1)
        kappa = 0.0
    else:
        fk, fp = problem.f.kernel_code(params)
        kappa = kappa_const(params.alpha)
    a2 = params.source_norm_2d
    x0 = np.asarray(x0, dtype=np.float64)

    def value(seed, i):
        gen = philox_generator(seed, i)
        chi, steps, status = _kernels.walk_chi(
            dom.kind, dom.data, dom.dim, x0, params.alpha, gk, gp, fk, fp,
            problem.eps_skin, problem.n_inner, kappa, a2, problem.step_cap,
            gen)
        return chi, status == _kernels.STATUS_CAP

    return value


def _python_value_fn(problem: ProblemSpec, x0):
    """Fallback for callable data: same walk, interpreted."""
    params = problem.params
    g = problem.g.as_callable(params)
    f = problem.f.as_callable(params) if problem.f is not None else None
    x0 = np.asarray(x0, dtype=np.float64)

    def value(seed, i):
        rng = RngStream(seed, i)
        try:
            walk = run_walk(problem.domain, params, x0, g=g, f=f,
                            eps_skin=problem.eps_skin,
                            n_inner=problem.n_inner, rng=rng,
                            step_cap=problem.step_cap)
        except StepCapExceeded:
            return math.nan, True
        return dirichlet_payoff(walk, g, problem.domain) + walk.source_acc, False

    return value


def _value_fn(problem: ProblemSpec, x0):
    if problem.g.is_builtin and (problem.f is None or problem.f.is_builtin):
        return _compiled_value_fn(problem, x0)
    return _python_value_fn(problem, x0)


def _span_moments(value, seed, start, stop):
    n = 0
    mean = 0.0
    m2 = 0.0
    aborted = 0
    for i in range(start, stop):
        v, bad = value(seed, i)
        if bad:
            aborted += 1
            continue
        n += 1
        d = v - mean
        mean += d / n
        m2 += d * (v - mean)
    return n, mean, m2, aborted


def _accumulate_range(value, seed, start, stop, workers):
    """Moments over sample indices [start, stop), chunked deterministically."""
    spans = [(s, min(s + _CHUNK, stop)) for s in range(start, stop, _CHUNK)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda sp: _span_moments(value, seed, sp[0], sp[1]), spans))
    else:
        parts = [_span_moments(value, seed, s, e) for s, e in spans]
    n = 0
    mean = 0.0
    m2 = 0.0
    aborted = 0
    for pn, pmean, pm2, pab in parts:
        n, mean, m2 = _merge_moments(n, mean, m2, pn, pmean, pm2)
        aborted += pab
    return n, mean, m2, aborted


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def estimate_fixed(problem: ProblemSpec, x0, n_samples: int,
                   seed: Optional[int] = None, workers: int = 1) -> Estimate:
    """Mean of n_samples independent walk payoffs from x0.

    Sample i draws from stream (seed, i), so the result is invariant to the
    worker count.  Walks aborted at the step cap are excluded and counted."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    seed = problem.seed if seed is None else seed
    value = _value_fn(problem, x0)
    t0 = time.perf_counter()
    n, mean, m2, aborted = _accumulate_range(value, seed, 0, n_samples, workers)
    if n < 2:
        raise StepCapExceeded(problem.step_cap, np.asarray(x0, dtype=np.float64))
    return Estimate.from_moments(n, mean, m2, stop_reason="fixed",
                                 n_aborted=aborted,
                                 wall_seconds=time.perf_counter() - t0)


def estimate_adaptive(problem: ProblemSpec, x0, tol: float,
                      batch: int = 10_000, n_min: int = 10_000,
                      n_max: int = 100_000_000, seed: Optional[int] = None,
                      workers: int = 1) -> Estimate:
    """Add batches of walks until the standard error drops below tol (after
    at least n_min samples) or n_max is reached, whichever fires first.

    Raises ToleranceNotReached (carrying the partial estimate) at n_max."""
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if n_min < 2:
        raise ValueError("n_min must be at least 2")
    seed = problem.seed if seed is None else seed
    value = _value_fn(problem, x0)
    t0 = time.perf_counter()
    n = 0
    mean = 0.0
    m2 = 0.0
    aborted = 0
    drawn = 0
    while True:
        target = min(drawn + batch, n_max)
        bn, bmean, bm2, bab = _accumulate_range(value, seed, drawn, target,
                                                workers)
        n, mean, m2 = _merge_moments(n, mean, m2, bn, bmean, bm2)
        aborted += bab
        drawn = target
        if n >= max(n_min, 2):
            se = math.sqrt(m2 / (n - 1) / n)
            if se < tol:
                return Estimate.from_moments(
                    n, mean, m2, stop_reason="tolerance", n_aborted=aborted,
                    wall_seconds=time.perf_counter() - t0)
        if drawn >= n_max:
            partial = Estimate.from_moments(
                n, mean, m2, stop_reason="n_max", n_aborted=aborted,
                wall_seconds=time.perf_counter() - t0)
            raise ToleranceNotReached(
                f"std_error {partial.std_error:.3e} still above {tol:.3e} "
                f"after {n} samples", partial)


def step_statistics(domain: Domain, params: StableParams, x0,
                    runs: int, eps_skin: float = 0.0,
                    seed: int = 0) -> StepHistogram:
    """Step counts of `runs` independent walks (payoff-free)."""
    if runs < 1:
        raise ValueError("runs must be positive")
    x0 = np.asarray(x0, dtype=np.float64)
    if not domain.contains(x0):
        raise ValueError("walks must start inside the domain")
    gp = np.zeros(1)
    fp = np.zeros(1)
    counts: dict = {}
    total = 0
    aborted = 0
    for i in range(runs):
        gen = philox_generator(seed, i)
        _, steps, status = _kernels.walk_chi(
            domain.kind, domain.data, domain.dim, x0, params.alpha,
            _kernels.G_CONST, gp, _kernels.F_NONE, fp, eps_skin, 1, 0.0,
            params.source_norm_2d, 10 ** 6, gen)
        if status == _kernels.STATUS_CAP:
            aborted += 1
            continue
        steps = int(steps)
        counts[steps] = counts.get(steps, 0) + 1
        total += steps
    n_ok = runs - aborted
    if n_ok == 0:
        raise StepCapExceeded(10 ** 6, x0)
    return StepHistogram(counts=counts, runs=n_ok, mean_steps=total / n_ok,
                         n_aborted=aborted)


def geometric_parameter(params: StableParams, method: str = "quadrature",
                        tol: float = 1e-4, seed: int = 0,
                        n_max: int = 100_000_000) -> float:
    """Probability that a unit-ball exit jump also clears the tangent
    half-space; the geometric step-count parameter for convex domains.

    Two independent routes: 'quadrature' integrates the exit density over
    the half-space {y1 < -1} (d = 2 only); 'montecarlo' takes the exit-draw
    fraction with first coordinate below -1 until its standard error is
    under tol."""
    if method == "quadrature":
        if params.dim != 2:
            raise ValueError("the quadrature route is implemented for d = 2")
        a = params.alpha
        front = 2.0 * math.pi ** -2 * math.sin(math.pi * a / 2.0)

        def integrand(t, theta):
            return t ** (a - 1.0) * (1.0 - t * t) ** (-a / 2.0)

        val, err = integrate.dblquad(
            integrand, 0.5 * math.pi, math.pi,
            0.0, lambda theta: -math.cos(theta),
            epsabs=0.25 * tol / front, epsrel=1e-9)
        if front * err > tol:
            raise ToleranceNotReached(
                f"quadrature error {front * err:.2e} above {tol:.2e}")
        return front * val
    if method == "montecarlo":
        rng = RngStream(seed, 0)
        chunk = 1 << 20
        hits = 0
        n = 0
        while n < n_max:
            draws = sample_exit_unit_ball(params, rng, size=chunk)
            hits += int(np.count_nonzero(draws[:, 0] < -1.0))
            n += chunk
            p = hits / n
            if math.sqrt(max(p * (1.0 - p), 1e-12) / n) < tol:
                return p
        raise ToleranceNotReached(
            f"standard error still above {tol:.2e} after {n} draws")
    raise ValueError(f"unknown method {method!r}")
