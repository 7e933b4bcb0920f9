import logging

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from config import Config
from errors import ConfigurationError, NumericalFailure, RejectedInputError
from models.regularizer import make_regularizer
from models.reparam import make_reparam
from models.scalar_map import ReconstructedLink, ScalarMap
from schemas import DiffeomorphismReport, ReconstructionReport
from utils.decorators import numerical_guard

logger = logging.getLogger(__name__)

INTERPOLATION_RULES = ("hermite", "pchip")

# Geometric refinement kicks in below this |q'(C)|
_STEEP_DERIVATIVE = 0.1


def _scalar(value):
    return float(np.asarray(value, dtype=float))


class ReconstructService:
    @staticmethod
    def scalar_map(kind, lower, upper, constant=0.0, tau=None):
        """Build a ScalarMap for a named reparameterization on [lower, upper]"""
        if not upper > lower:
            raise RejectedInputError(f"Empty interval [{lower}, {upper}]")
        return ScalarMap.from_reparam(make_reparam(kind, tau), lower, upper, constant)

    @staticmethod
    def check_diffeomorphism(scalar_map, samples=1000):
        """
        Check that q' keeps one sign and stays away from zero on [C, U]

        Args:
            scalar_map: ScalarMap
            samples: Number of uniform evaluation points (>= 2)

        Returns:
            DiffeomorphismReport: min |q'|, sign (0 on a sign change) and verdict
        """
        if samples < 2:
            raise RejectedInputError("check_diffeomorphism needs at least 2 samples")
        u = np.linspace(scalar_map.lower, scalar_map.upper, int(samples))
        derivative = np.asarray(scalar_map.derivative(u), dtype=float)
        signs = np.unique(np.sign(derivative))
        sign = int(signs[0]) if signs.size == 1 else 0
        min_abs = float(np.min(np.abs(derivative)))
        return DiffeomorphismReport(
            min_abs_derivative=min_abs,
            sign=sign,
            passed=bool(sign != 0 and min_abs >= Config.DIFFEO_MARGIN),
        )

    @staticmethod
    def _knots(scalar_map, h_max):
        lower, upper = scalar_map.lower, scalar_map.upper
        n = int(np.ceil((upper - lower) / h_max))
        grid = np.linspace(lower, upper, n + 1)

        # 1/q' is steep near C when q'(C) is small
        if abs(_scalar(scalar_map.derivative(lower))) < _STEEP_DERIVATIVE:
            first = grid[1] - grid[0]
            extra = first * 0.5 ** np.arange(1, 40)
            extra = extra[extra > 1e-12 * (upper - lower)]
            grid = np.union1d(grid, lower + extra)
        return grid

    @staticmethod
    @numerical_guard("reconstruct_link")
    def reconstruct_link(scalar_map, h_max=None, rule="hermite"):
        """
        Tabulate R~'(u) = q'(u) (int_C^u dv / q'(v) + c) by variation of constants

        Each grid interval is integrated with adaptive Gauss-Kronrod quadrature
        and the pieces are accumulated. Knot slopes come from differentiating the
        formula, R~'' = q'' (I + c) + 1.

        Args:
            scalar_map: ScalarMap passing check_diffeomorphism
            h_max: Maximum grid spacing
            rule: 'hermite' (cubic Hermite through values and slopes) or 'pchip'

        Returns:
            ReconstructedLink: Knots, values, slopes and interpolant
        """
        h_max = Config.H_MAX if h_max is None else float(h_max)
        if not h_max > 0:
            raise RejectedInputError("h_max must be positive")
        if rule not in INTERPOLATION_RULES:
            raise ConfigurationError(f"Unknown interpolation rule: {rule}")

        check = ReconstructService.check_diffeomorphism(scalar_map)
        if not check.passed:
            raise ConfigurationError(
                f"{scalar_map.name} is not a diffeomorphism on [{scalar_map.lower:g}, {scalar_map.upper:g}]",
                check.model_dump(),
            )

        grid = ReconstructService._knots(scalar_map, h_max)

        def integrand(v):
            return 1.0 / _scalar(scalar_map.derivative(v))

        pieces = np.empty(grid.size - 1)
        for i, (a, b) in enumerate(zip(grid[:-1], grid[1:])):
            result = quad(integrand, a, b, epsabs=Config.QUAD_TOL, full_output=1)
            if len(result) > 3:
                raise NumericalFailure(
                    f"Quadrature did not converge on [{a:g}, {b:g}]: {result[3]}",
                    {"interval": [float(a), float(b)], "error": float(result[1])},
                )
            pieces[i] = result[0]

        integral = np.concatenate(([0.0], np.cumsum(pieces)))
        shifted = integral + scalar_map.constant
        values = np.asarray(scalar_map.derivative(grid), dtype=float) * shifted
        slopes = np.asarray(scalar_map.second_derivative(grid), dtype=float) * shifted + 1.0

        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))):
            raise NumericalFailure("Reconstructed link has non-finite values", {"map": scalar_map.name})

        if rule == "pchip":
            interpolant = PchipInterpolator(grid, values)
        else:
            interpolant = CubicHermiteSpline(grid, values, slopes)

        logger.debug(f"Reconstructed {scalar_map!r} on {grid.size} knots ({rule})")
        return ReconstructedLink(grid=grid, values=values, slopes=slopes, rule=rule, interpolant=interpolant)

    @staticmethod
    def ode_residual(scalar_map, link, u):
        """
        |q' R~'' - q'' R~' - q'| at u, with R~'' from the interpolant

        Args:
            scalar_map: ScalarMap the link was built from
            link: ReconstructedLink
            u: Point (or array of points) inside the grid

        Returns:
            float or np.ndarray: Residual
        """
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr < link.grid[0]) or np.any(u_arr > link.grid[-1]):
            raise RejectedInputError("ode_residual needs points inside the reconstruction grid")
        dq = np.asarray(scalar_map.derivative(u_arr), dtype=float)
        d2q = np.asarray(scalar_map.second_derivative(u_arr), dtype=float)
        residual = np.abs(dq * link.derivative(u_arr) - d2q * link(u_arr) - dq)
        return float(residual) if residual.ndim == 0 else residual

    @staticmethod
    def corrupt_link(link):
        """Negative control: R~' + u^2, whose ODE residual no longer vanishes"""
        values = link.values + link.grid ** 2
        slopes = link.slopes + 2.0 * link.grid
        return ReconstructedLink(
            grid=link.grid,
            values=values,
            slopes=slopes,
            rule="corrupted",
            interpolant=CubicHermiteSpline(link.grid, values, slopes),
        )

    @staticmethod
    def _preimage(scalar_map, x):
        if scalar_map.inverse is not None:
            return np.asarray(scalar_map.inverse(x), dtype=float)

        def solve(target):
            return brentq(lambda v: _scalar(scalar_map.forward(v)) - target, scalar_map.lower, scalar_map.upper)

        return np.vectorize(solve)(np.asarray(x, dtype=float))

    @staticmethod
    def reconstructed_hessian(scalar_map, x):
        """
        Hessian 1/q'(q^{-1}(x))^2 the reconstructed regularizer carries at x

        Raises:
            RejectedInputError: x outside q([C, U])
        """
        x_arr = np.asarray(x, dtype=float)
        lo, hi = scalar_map.image()
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(x_arr < lo - slack) or np.any(x_arr > hi + slack):
            raise RejectedInputError(
                f"x outside the image [{lo:g}, {hi:g}] of {scalar_map.name}",
                {"x": x_arr.tolist()},
            )
        u = ReconstructService._preimage(scalar_map, np.clip(x_arr, lo, hi))
        hessian = 1.0 / np.asarray(scalar_map.derivative(u), dtype=float) ** 2
        return float(hessian) if hessian.ndim == 0 else hessian

    @staticmethod
    def link_hessian(scalar_map, link, u):
        """Hessian read off the tabulated link: (R~'' q' - R~' q'') / q'^3"""
        u_arr = np.asarray(u, dtype=float)
        dq = np.asarray(scalar_map.derivative(u_arr), dtype=float)
        d2q = np.asarray(scalar_map.second_derivative(u_arr), dtype=float)
        hessian = (link.derivative(u_arr) * dq - link(u_arr) * d2q) / dq ** 3
        return float(hessian) if hessian.ndim == 0 else hessian

    @staticmethod
    def certify_reconstruction(scalar_map, known=None, h_max=None, rule="hermite", samples=200, tau=None):
        """
        Reconstruct the link and certify the ODE and Hessian identities

        Args:
            scalar_map: ScalarMap
            known: Optional Regularizer (or its wire name) to compare Hessians with
            h_max: Maximum grid spacing
            rule: Interpolation rule
            samples: Hessian comparison points
            tau: Tempering parameter when known is given by name

        Returns:
            tuple: (ReconstructionReport, ReconstructedLink)
        """
        if isinstance(known, str):
            known = make_regularizer(known, tau)

        link = ReconstructService.reconstruct_link(scalar_map, h_max, rule)
        grid = link.grid
        sweep = np.concatenate((grid[1:-1], 0.5 * (grid[:-1] + grid[1:])))
        max_residual = float(np.max(ReconstructService.ode_residual(scalar_map, link, sweep)))

        u = np.linspace(scalar_map.lower, scalar_map.upper, int(samples))
        x = np.asarray(scalar_map.forward(u), dtype=float)
        hessian = ReconstructService.reconstructed_hessian(scalar_map, x)
        from_link = ReconstructService.link_hessian(scalar_map, link, u)
        link_mismatch = float(np.max(np.abs(from_link - hessian) / np.abs(hessian)))

        hessian_mismatch = None
        if known is not None:
            reference = known.hessian_diag(x)
            hessian_mismatch = float(np.max(np.abs(hessian - reference) / np.abs(reference)))

        floor = float(np.min(hessian))
        passed = (
            max_residual <= Config.ODE_RESIDUAL_MAX
            and (hessian_mismatch is None or hessian_mismatch <= Config.HESSIAN_MISMATCH_MAX)
            and floor > 0
        )
        report = ReconstructionReport(
            map=scalar_map.name,
            interval=[scalar_map.lower, scalar_map.upper],
            knots=int(grid.size),
            max_ode_residual=max_residual,
            max_hessian_mismatch=hessian_mismatch,
            max_link_hessian_mismatch=link_mismatch,
            strong_convexity_floor=floor,
            passed=bool(passed),
        )
        logger.info(
            f"Reconstruction of {scalar_map.name}: residual {max_residual:.2e}, "
            f"floor {floor:.4g} ({'pass' if passed else 'FAIL'})"
        )
        return report, link
