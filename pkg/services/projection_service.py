import logging

import numpy as np
from scipy.optimize import brentq

from config import Config
from errors import ConfigurationError, NumericalFailure
from models.domain import Box, PositiveLpBall, ProjectionResult, SmoothedSimplex
from models.regularizer import Euclidean
from models.reparam import Exponential, Identity, Power, QuarterSquare
from utils.decorators import numerical_guard
from utils.validators import as_point

logger = logging.getLogger(__name__)

# brentq accepts rtol no smaller than 4 * machine epsilon
_BRENT_RTOL = 4 * np.finfo(float).eps


def project_simplex(v, z=1.0):
    """
    Euclidean projection of v onto {w >= 0, sum(w) = z} by sorting.

    Returns:
        tuple: (projection, threshold theta)
    """
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(v.size) + 1
    cond = u - cssv / ind > 0
    rho = ind[cond][-1]
    theta = cssv[cond][-1] / float(rho)
    return np.maximum(v - theta, 0.0), float(theta)


class ProjectionService:
    @staticmethod
    def membership(domain, x, tol=None):
        """
        Check whether x satisfies every constraint of the domain

        Args:
            domain: Domain
            x: Point
            tol: Slack allowed on each constraint

        Returns:
            bool: True iff x is a member within tol
        """
        tol = Config.MEMBERSHIP_TOL if tol is None else tol
        return domain.membership(x, tol)

    @staticmethod
    def domain_center(domain):
        return domain.center()

    @staticmethod
    @numerical_guard("euclid_project")
    def euclid_project(domain, v):
        """
        Euclidean projection onto the domain

        Args:
            domain: Domain
            v: Arbitrary finite vector

        Returns:
            ProjectionResult: argmin ||x - v|| with KKT diagnostics
        """
        v = as_point(v, dimension=domain.dimension, name="v")
        if domain.membership(v, 0.0):
            return ProjectionResult(point=v.copy())

        if isinstance(domain, Box):
            lo, hi = domain.bounding_box()
            return ProjectionResult(point=np.clip(v, lo, hi))

        if isinstance(domain, SmoothedSimplex):
            eps = domain.eps_min
            w = v - eps
            z = np.maximum(w, 0.0)
            multiplier = 0.0
            if np.sum(z) > domain.budget:
                z, multiplier = project_simplex(w, domain.budget)
            x = eps + z
            residual = abs(float(np.sum(x)) - 1.0) if multiplier > 0 else 0.0
            return ProjectionService._checked(domain, ProjectionResult(x, multiplier, 1, residual))

        if isinstance(domain, PositiveLpBall) and domain.p == 2.0 and domain.floor == 0.0:
            z = np.maximum(v, 0.0)
            norm = float(np.linalg.norm(z))
            if norm <= domain.radius:
                return ProjectionResult(point=z)
            x = z * (domain.radius / norm)
            residual = abs(float(np.linalg.norm(x)) - domain.radius)
            return ProjectionService._checked(
                domain, ProjectionResult(x, norm / domain.radius - 1.0, 1, residual)
            )

        return ProjectionService._separable_kkt(Euclidean(), domain, v)

    @staticmethod
    @numerical_guard("bregman_project")
    def bregman_project(reg, domain, y):
        """
        Bregman projection argmin_{x in K} D_R(x || y)

        Args:
            reg: Separable regularizer
            domain: Domain
            y: Point, strictly positive where the regularizer requires it

        Returns:
            ProjectionResult: projected point with the active multiplier
        """
        if isinstance(reg, Euclidean):
            return ProjectionService.euclid_project(domain, y)

        y = as_point(y, dimension=domain.dimension, name="y")
        reg.check_admissible(y, "y")
        if domain.membership(y, 0.0):
            return ProjectionResult(point=y.copy())

        if isinstance(domain, Box):
            # D_R is separable, so each coordinate is clamped independently
            lo, hi = domain.bounding_box()
            return ProjectionResult(point=np.clip(y, lo, hi))

        return ProjectionService._separable_kkt(reg, domain, y)

    @staticmethod
    def _separable_kkt(reg, domain, y):
        """
        Solve the KKT system of a separable projection with one coupling constraint.

        Coordinates follow x_i(lam) = max(lo_i, solution of the stationarity
        condition at multiplier lam); lam is the root of the monotone
        constraint residual, bracketed by doubling and refined by brentq.
        """
        if isinstance(domain, SmoothedSimplex):
            target = reg.link(y)
            lo = domain.lower_bounds()

            def coords(lam):
                return np.maximum(lo, reg.link_inverse_clamped(target - lam))

            def residual(lam):
                return float(np.sum(coords(lam))) - 1.0

        elif isinstance(domain, PositiveLpBall):
            floor, p, radius = domain.floor, domain.p, domain.radius

            def coords(lam):
                return np.maximum(floor, ProjectionService._norm_stationary_point(reg, y, lam, p))

            def residual(lam):
                return float(np.sum(np.power(coords(lam), p))) - radius ** p

        else:
            raise ConfigurationError(f"No projection solver for {domain!r}")

        if residual(0.0) <= 0:
            x = coords(0.0)
            return ProjectionService._checked(domain, ProjectionResult(x, 0.0, 1, 0.0))

        upper, doublings = 1.0, 0
        while residual(upper) > 0:
            upper *= 2.0
            doublings += 1
            if doublings > Config.BISECTION_MAX_ITER:
                raise NumericalFailure(
                    "Could not bracket the projection multiplier",
                    {"domain": domain.to_dict(), "upper": upper},
                )

        try:
            lam, info = brentq(
                residual, 0.0, upper,
                xtol=1e-15, rtol=_BRENT_RTOL,
                maxiter=Config.BISECTION_MAX_ITER,
                full_output=True, disp=False,
            )
        except ValueError as e:
            raise NumericalFailure(f"Projection bracket failure: {e}", {"domain": domain.to_dict()}) from e

        if not info.converged:
            raise NumericalFailure(
                "Projection multiplier search did not converge",
                {"domain": domain.to_dict(), "iterations": info.iterations, "flag": info.flag},
            )

        x = coords(lam)
        if isinstance(domain, PositiveLpBall):
            slack = abs(float(domain.norm(x)) - domain.radius)
        else:
            slack = abs(float(np.sum(x)) - 1.0)
        result = ProjectionResult(x, float(lam), doublings + info.function_calls, slack)
        return ProjectionService._checked(domain, result)

    @staticmethod
    def _norm_stationary_point(reg, y, lam, p):
        """
        Per-coordinate root of link(x) + lam * p * x^{p-1} = link(y) on [0, y].

        Closed forms for p = 1 and the Euclidean p = 2 case, vectorized
        bisection otherwise.
        """
        target = reg.link(y)
        if lam == 0.0:
            return np.asarray(y, dtype=float)
        if p == 1.0:
            return reg.link_inverse_clamped(target - lam)
        if isinstance(reg, Euclidean) and p == 2.0:
            return np.maximum(y, 0.0) / (1.0 + 2.0 * lam)

        lo = np.zeros_like(y)
        hi = np.maximum(y, 0.0)
        width = 1e-16 * max(1.0, float(np.max(hi)))
        for _ in range(Config.BISECTION_MAX_ITER):
            mid = 0.5 * (lo + hi)
            safe = np.where(mid > 0, mid, 1.0)
            value = np.where(mid > 0, reg.link(safe) + lam * p * np.power(safe, p - 1.0) - target, -1.0)
            above = value > 0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
            if np.max(hi - lo) <= width:
                break
        return 0.5 * (lo + hi)

    @staticmethod
    def _checked(domain, result):
        if result.residual > Config.PROJECTION_TOL or not domain.membership(result.point, Config.MEMBERSHIP_TOL):
            raise NumericalFailure(
                f"Projection onto {domain.kind} missed the constraint",
                {"residual": result.residual, "point": result.point.tolist()},
            )
        return result

    @staticmethod
    def map_domain(q, primal):
        """
        Exact image K' = q^{-1}(K) for the supported (q, K) combinations

        Args:
            q: Reparameterization
            primal: Domain K

        Returns:
            Domain: K'
        """
        if isinstance(q, Identity):
            return primal

        if isinstance(q, Exponential):
            if isinstance(primal, Box):
                lo, hi = primal.bounding_box()
                if np.any(lo <= 0):
                    raise ConfigurationError("exponential map needs a box with lo > 0")
                return Box(lo=tuple(np.log(lo)), hi=tuple(np.log(hi)))
            raise ConfigurationError(f"exponential map does not support {primal.kind}")

        if isinstance(q, (QuarterSquare, Power)):
            tau = 1.0 if isinstance(q, QuarterSquare) else q.tau
            k = 2.0 / (2.0 - tau)

            if isinstance(primal, Box):
                lo, hi = primal.bounding_box()
                if np.any(lo < 0):
                    raise ConfigurationError(f"{q.kind} map needs a nonnegative box")
                return Box(lo=tuple(q.inverse(lo)), hi=tuple(q.inverse(hi)))

            if isinstance(primal, SmoothedSimplex):
                # The filled simplex is the floored positive l1 ball of radius 1
                floor = k * primal.eps_min ** (1.0 / k)
                return PositiveLpBall(dimension=primal.dimension, p=k, radius=k, floor=floor)

            if isinstance(primal, PositiveLpBall):
                if primal.p <= 1.0 - tau / 2.0:
                    raise ConfigurationError(
                        f"Image of the l{primal.p} ball under {q.kind} is not convex",
                        {"p": primal.p, "tau": tau},
                    )
                return PositiveLpBall(
                    dimension=primal.dimension,
                    p=primal.p * k,
                    radius=k * primal.radius ** (1.0 / k),
                    floor=k * primal.floor ** (1.0 / k),
                )

        raise ConfigurationError(f"Unsupported combination: {q.kind} on {primal.kind}")

    @staticmethod
    def grid_points(domain, resolution=None, max_points=None):
        """
        Feasible points of a regular grid over the domain's bounding box

        Args:
            domain: Domain
            resolution: Grid spacing; coarsened when the grid would exceed max_points
            max_points: Cap on the number of grid nodes

        Returns:
            tuple: (array of feasible points, spacing actually used)
        """
        resolution = Config.GRID_RESOLUTION if resolution is None else resolution
        max_points = Config.GRID_MAX_POINTS if max_points is None else max_points
        lo, hi = domain.bounding_box()
        d = domain.dimension

        span = float(np.max(hi - lo))
        per_axis = max_points ** (1.0 / d)
        if span / resolution + 1 > per_axis:
            resolution = span / (per_axis - 1)
            logger.info(f"Grid coarsened to spacing {resolution:.3g} for d={d}")

        axes = []
        for a, b in zip(lo, hi):
            n = int(np.floor((b - a) / resolution + 1e-9)) + 1
            axis = a + resolution * np.arange(n)
            if b - axis[-1] > 1e-12:
                axis = np.append(axis, b)
            axes.append(axis)

        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return mesh[domain.contains(mesh, 1e-12)], resolution
