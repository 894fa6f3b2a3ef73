"""Domain oracles for the walk: membership, inscribed-ball radius, convexity
metadata and nearest-exterior projection.

Four shapes are supported: balls, axis-aligned boxes, intersections of
half-spaces and unions of balls.  Membership is a strict interior test with a
1e-14 slack counted as exterior, so exactly-on-boundary points classify as
outside; exits land on the boundary with probability zero, so the convention
only resolves floating-point ties.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels

__all__ = [
    "Domain",
    "Ball",
    "Box",
    "HalfSpaceIntersection",
    "UnionOfBalls",
    "swiss_cheese",
    "parse_domain",
]


class Domain:
    """Immutable geometric oracle; all queries are pure."""

    kind: int
    convex: bool

    def __init__(self, kind, data, dim, convex, bounding_radius):
        self.kind = kind
        self._data = np.ascontiguousarray(data, dtype=np.float64)
        self._data.setflags(write=False)
        self.dim = int(dim)
        self.convex = bool(convex)
        self.bounding_radius = float(bounding_radius)
        if self.dim < 2:
            raise ValueError(f"domains require dim >= 2, got {self.dim}")

    # kernel-facing encoding
    @property
    def data(self) -> np.ndarray:
        return self._data

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point in R^{self.dim}, got shape {x.shape}")
        return x

    def interior_gap(self, x) -> float:
        """Clearance to the complement; positive inside, exact except for
        unions of balls where it is the best single-ball clearance."""
        return float(_kernels.interior_gap(self.kind, self._data, self.dim,
                                           self._point(x)))

    def contains(self, x) -> bool:
        """True iff x lies in the open domain (boundary counts as exterior)."""
        return self.interior_gap(x) > _kernels.SLACK

    def inscribed_radius(self, x) -> float:
        """Radius of a ball about x guaranteed to stay inside the domain."""
        gap = self.interior_gap(x)
        if gap <= _kernels.SLACK:
            raise ValueError("inscribed_radius requires an interior point")
        return gap

    def nearest_exterior(self, x) -> np.ndarray:
        """A point just past the boundary, close to the nearest one to x."""
        x = self._point(x)
        if _kernels.interior_gap(self.kind, self._data, self.dim, x) <= _kernels.SLACK:
            raise ValueError("nearest_exterior requires an interior point")
        out = np.empty(self.dim)
        _kernels.push_exterior(self.kind, self._data, self.dim, x, out)
        return out

    def config(self) -> dict:
        raise NotImplementedError


class Ball(Domain):
    def __init__(self, center, radius):
        center = np.atleast_1d(np.asarray(center, dtype=np.float64))
        if not radius > 0.0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        data = np.concatenate([center, [radius]])[None, :]
        super().__init__(_kernels.KIND_BALL, data, center.size, True, radius)
        self.center = center
        self.radius = float(radius)

    def config(self):
        return {"ball": {"center": self.center.tolist(), "radius": self.radius}}


class Box(Domain):
    def __init__(self, mincorner, maxcorner):
        lo = np.atleast_1d(np.asarray(mincorner, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(maxcorner, dtype=np.float64))
        if lo.shape != hi.shape or not np.all(hi > lo):
            raise ValueError("box needs max corner strictly above min corner")
        data = np.stack([lo, hi])
        super().__init__(_kernels.KIND_BOX, data, lo.size, True,
                         0.5 * float(np.linalg.norm(hi - lo)))
        self.mincorner = lo
        self.maxcorner = hi

    def config(self):
        return {"box": {"min": self.mincorner.tolist(), "max": self.maxcorner.tolist()}}


class HalfSpaceIntersection(Domain):
    """Intersection of half-spaces {x : n.x < b}; normals need not be unit."""

    def __init__(self, halfspaces, bounding_radius=math.inf):
        rows = []
        for normal, offset in halfspaces:
            n = np.atleast_1d(np.asarray(normal, dtype=np.float64))
            norm = np.linalg.norm(n)
            if norm == 0.0:
                raise ValueError("half-space normal must be nonzero")
            rows.append(np.concatenate([n / norm, [offset / norm]]))
        if not rows:
            raise ValueError("need at least one half-space")
        data = np.stack(rows)
        super().__init__(_kernels.KIND_HALFSPACES, data, data.shape[1] - 1,
                         True, bounding_radius)
        self.halfspaces = [(row[:-1].copy(), float(row[-1])) for row in data]

    def config(self):
        return {"halfspaces": [{"normal": n.tolist(), "offset": b}
                               for n, b in self.halfspaces],
                "bounding_radius": self.bounding_radius}


class UnionOfBalls(Domain):
    def __init__(self, centers, radii):
        centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64),
                                centers.shape[0]).copy()
        if not np.all(radii > 0.0):
            raise ValueError("all ball radii must be positive")
        data = np.hstack([centers, radii[:, None]])
        span = np.linalg.norm(centers - centers.mean(axis=0), axis=1) + radii
        super().__init__(_kernels.KIND_UNION, data, centers.shape[1], False,
                         float(span.max()))
        self.centers = centers
        self.radii = radii

    def config(self):
        if np.all(self.radii == self.radii[0]):
            return {"union_of_balls": {"centers": self.centers.tolist(),
                                       "radius": float(self.radii[0])}}
        return {"union_of_balls": {"centers": self.centers.tolist(),
                                   "radii": self.radii.tolist()}}


def swiss_cheese(radius: float = 1.0, extent: int = 10) -> UnionOfBalls:
    """Grid-of-balls test domain: balls at integer points (i, j) with
    |i|, |j| <= extent.  radius=1.0 overlaps neighbouring balls into one
    blob; radius=0.5 makes them touch, leaving a disconnected domain."""
    rng = range(-extent, extent + 1)
    centers = [(float(i), float(j)) for i in rng for j in rng]
    return UnionOfBalls(centers, radius)


def parse_domain(spec: dict) -> Domain:
    """Build a Domain from its JSON-compatible description."""
    if not isinstance(spec, dict) or len([k for k in spec
                                          if k != "bounding_radius"]) != 1:
        raise ValueError(f"domain spec must name exactly one shape, got {spec!r}")
    if "ball" in spec:
        b = spec["ball"]
        return Ball(b["center"], b["radius"])
    if "box" in spec:
        b = spec["box"]
        return Box(b["min"], b["max"])
    if "halfspaces" in spec:
        hs = [(h["normal"], h["offset"]) for h in spec["halfspaces"]]
        return HalfSpaceIntersection(hs, spec.get("bounding_radius", math.inf))
    if "union_of_balls" in spec:
        u = spec["union_of_balls"]
        radii = u["radius"] if "radius" in u else u["radii"]
        return UnionOfBalls(u["centers"], radii)
    if "swiss_cheese" in spec:
        u = spec["swiss_cheese"]
        return swiss_cheese(u.get("radius", 1.0), u.get("extent", 10))
    raise ValueError(f"unknown domain shape in {spec!r}")
