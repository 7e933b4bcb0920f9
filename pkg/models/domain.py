"""
Constraint-set descriptors for the primal domain K and its image K'
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from errors import ConfigurationError


class Domain(ABC):
    """Closed convex subset of R^d confined to the nonnegative orthant or a box"""

    kind = "abstract"
    dimension: int

    @abstractmethod
    def contains(self, X, tol=0.0):
        """Boolean membership for a batch of shape (n, d) or a single point"""

    @abstractmethod
    def center(self):
        """Canonical interior starting point"""

    @abstractmethod
    def lower_bounds(self):
        """Coordinatewise lower bound vector"""

    @abstractmethod
    def bounding_box(self):
        """(lo, hi) vectors enclosing the domain"""

    @abstractmethod
    def extreme_points(self):
        """Array (m, d) of vertices or other extremal points"""

    @abstractmethod
    def linear_range(self, a):
        """Interval enclosing {a.x : x in domain}; exact unless documented otherwise"""

    @abstractmethod
    def sample_interior(self, rng, n, margin):
        """n points at relative distance >= margin from every constraint"""

    def membership(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,) or not np.all(np.isfinite(x)):
            return False
        return bool(self.contains(x[None, :], tol)[0])

    def diameter(self):
        """Euclidean diameter over the extreme points"""
        pts = self.extreme_points()
        diffs = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt(np.max(np.sum(diffs * diffs, axis=-1))))

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension}

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "kind")
        return f'<Domain {self.kind}({params})>'


@dataclass(frozen=True, repr=False)
class SmoothedSimplex(Domain):
    """Filled simplex {x >= eps_min, sum x <= 1}"""

    dimension: int
    eps_min: float = 0.0
    kind = "smoothed-simplex"

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("Domain dimension must be at least 1")
        if self.eps_min < 0 or self.dimension * self.eps_min >= 1.0:
            raise ConfigurationError(
                f"Smoothed simplex is empty: d * eps_min = {self.dimension * self.eps_min} >= 1"
            )

    @property
    def budget(self):
        """Mass left above the floor"""
        return 1.0 - self.dimension * self.eps_min

    def contains(self, X, tol=0.0):
        X = np.atleast_2d(X)
        return np.all(X >= self.eps_min - tol, axis=1) & (np.sum(X, axis=1) <= 1.0 + tol)

    def center(self):
        return np.full(self.dimension, max(1.0 / (2 * self.dimension), self.eps_min))

    def lower_bounds(self):
        return np.full(self.dimension, self.eps_min)

    def bounding_box(self):
        top = self.eps_min + self.budget
        return self.lower_bounds(), np.full(self.dimension, top)

    def extreme_points(self):
        base = self.lower_bounds()
        return np.vstack([base, base + self.budget * np.eye(self.dimension)])

    def linear_range(self, a):
        values = self.extreme_points() @ np.asarray(a, dtype=float)
        return float(np.min(values)), float(np.max(values))

    def sample_interior(self, rng, n, margin):
        d = self.dimension
        z = rng.dirichlet(np.ones(d + 1), size=n)
        z = margin / (d + 1) + (1.0 - margin) * z
        return self.eps_min + self.budget * z[:, :d]

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension, "eps_min": self.eps_min}


@dataclass(frozen=True, repr=False)
class Box(Domain):
    """Axis-aligned box lo <= x <= hi"""

    lo: tuple
    hi: tuple
    kind = "box"

    def __post_init__(self):
        lo, hi = np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise ConfigurationError("Box bounds must be equal-length vectors")
        if not np.all(lo < hi):
            raise ConfigurationError("Box needs lo < hi componentwise")
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))

    @classmethod
    def uniform(cls, dimension, lo, hi):
        return cls(lo=(float(lo),) * dimension, hi=(float(hi),) * dimension)

    @property
    def dimension(self):
        return len(self.lo)

    def contains(self, X, tol=0.0):
        X = np.atleast_2d(X)
        lo, hi = self.bounding_box()
        return np.all((X >= lo - tol) & (X <= hi + tol), axis=1)

    def center(self):
        lo, hi = self.bounding_box()
        return 0.5 * (lo + hi)

    def lower_bounds(self):
        return np.array(self.lo)

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def extreme_points(self):
        lo, hi = self.bounding_box()
        if self.dimension <= 12:
            corners = product(*zip(lo, hi))
            return np.array(list(corners), dtype=float)
        # Opposite corners plus single-coordinate flips
        flips = np.where(np.eye(self.dimension, dtype=bool), hi, lo)
        return np.vstack([lo, hi, flips])

    def linear_range(self, a):
        a = np.asarray(a, dtype=float)
        lo, hi = self.bounding_box()
        return float(np.sum(np.minimum(a * lo, a * hi))), float(np.sum(np.maximum(a * lo, a * hi)))

    def diameter(self):
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def sample_interior(self, rng, n, margin):
        lo, hi = self.bounding_box()
        unit = margin + (1.0 - 2.0 * margin) * rng.random((n, self.dimension))
        return lo + (hi - lo) * unit

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension, "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True, repr=False)
class PositiveLpBall(Domain):
    """{x >= floor, ||x||_p <= radius} for p >= 1"""

    dimension: int
    p: float = 2.0
    radius: float = 1.0
    floor: float = 0.0
    kind = "positive-lp-ball"

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("Domain dimension must be at least 1")
        if self.p < 1 or not np.isfinite(self.p):
            raise ConfigurationError(f"Positive lp ball needs finite p >= 1, got {self.p}")
        if self.radius <= 0:
            raise ConfigurationError("Positive lp ball needs radius > 0")
        if self.floor < 0 or self.floor_norm >= self.radius:
            raise ConfigurationError(
                f"Positive lp ball is empty: floor norm {self.floor_norm} >= radius {self.radius}"
            )

    @property
    def floor_norm(self):
        return self.floor * self.dimension ** (1.0 / self.p)

    def norm(self, X):
        return np.sum(np.power(np.abs(X), self.p), axis=-1) ** (1.0 / self.p)

    def contains(self, X, tol=0.0):
        X = np.atleast_2d(X)
        return np.all(X >= self.floor - tol, axis=1) & (self.norm(X) <= self.radius + tol)

    def center(self):
        value = 0.5 * self.radius * self.dimension ** (-1.0 / self.p)
        return np.full(self.dimension, max(value, self.floor))

    def lower_bounds(self):
        return np.full(self.dimension, self.floor)

    def axis_extent(self):
        """Largest single coordinate with the others at the floor"""
        rest = (self.dimension - 1) * self.floor ** self.p
        return (self.radius ** self.p - rest) ** (1.0 / self.p)

    def bounding_box(self):
        return self.lower_bounds(), np.full(self.dimension, self.axis_extent())

    def extreme_points(self):
        base = self.lower_bounds()
        axes = np.tile(base, (self.dimension, 1))
        np.fill_diagonal(axes, self.axis_extent())
        diagonal = np.full(self.dimension, self.radius * self.dimension ** (-1.0 / self.p))
        return np.vstack([base, axes, diagonal])

    def linear_range(self, a):
        """Exact for floor = 0; an enclosing interval otherwise"""
        a = np.asarray(a, dtype=float)
        if self.p == 1.0:
            dual = lambda v: float(np.max(v)) if v.size else 0.0
        else:
            q = self.p / (self.p - 1.0)
            dual = lambda v: float(np.sum(np.power(v, q)) ** (1.0 / q))
        hi = self.radius * dual(np.maximum(a, 0.0))
        lo = -self.radius * dual(np.maximum(-a, 0.0))
        if self.floor > 0:
            at_floor = self.floor * float(np.sum(a))
            if np.all(a >= 0):
                lo = at_floor
            if np.all(a <= 0):
                hi = at_floor
        return lo, hi

    def diameter(self):
        """
        Upper bound on the Euclidean diameter

        Attained by r e_1, r e_2 when p <= 2 and there is no floor; otherwise
        sqrt(2) r d^{1/2 - 1/p} can exceed the true diameter.
        """
        # Two nonnegative points have ||x - y||^2 <= ||x||^2 + ||y||^2
        widest = self.radius * self.dimension ** max(0.0, 0.5 - 1.0 / self.p)
        return float(np.sqrt(2.0) * widest)

    def sample_interior(self, rng, n, margin):
        d, p = self.dimension, self.p
        free = self.radius - self.floor_norm
        offset = self.floor + margin * free * d ** (-1.0 / p)
        reach = (1.0 - margin) * (self.radius - offset * d ** (1.0 / p))
        # Generalized-Gamma direction, uniform radial law inside the lp ball
        g = np.power(rng.gamma(1.0 / p, 1.0, size=(n, d)), 1.0 / p)
        direction = g / self.norm(g)[:, None]
        rho = reach * np.power(rng.random(n), 1.0 / d)
        return offset + rho[:, None] * direction

    def to_dict(self):
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "p": self.p,
            "radius": self.radius,
            "floor": self.floor,
        }


@dataclass
class ProjectionResult:
    """Projected point with KKT diagnostics"""

    point: np.ndarray
    multiplier: float = 0.0
    iterations: int = 0
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "multiplier": self.multiplier,
            "iterations": self.iterations,
            "residual": self.residual,
        }

    def __repr__(self):
        return f'<ProjectionResult multiplier={self.multiplier:.3g} iterations={self.iterations}>'


def make_domain(kind, dimension, eps_min=0.0, p=2.0, radius=1.0, floor=0.0, lo=None, hi=None):
    """Build a domain from its wire description"""
    if kind in ("smoothed-simplex", "simplex"):
        return SmoothedSimplex(dimension=dimension, eps_min=eps_min)
    if kind == "box":
        lo = eps_min if lo is None else lo
        hi = 1.0 if hi is None else hi
        return Box.uniform(dimension, lo, hi)
    if kind in ("positive-lp-ball", "lp-ball"):
        return PositiveLpBall(dimension=dimension, p=p, radius=radius, floor=floor)
    raise ConfigurationError(f"Unknown domain kind: {kind}")
