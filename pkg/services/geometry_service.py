import logging

import numpy as np

from config import Config
from errors import ConfigurationError, RejectedInputError
from models.domain import Box, PositiveLpBall, SmoothedSimplex
from models.geometry_pair import GeometryPair
from models.regularizer import Euclidean, LogBarrier, NegativeEntropy, Tempered
from models.reparam import Exponential, Identity, Power, QuarterSquare
from schemas import VerificationReport
from utils.decorators import numerical_guard
from utils.rng import stream
from utils.validators import as_point, require_member

logger = logging.getLogger(__name__)

PAIR_NAMES = ("eg", "logbarrier", "tempered", "euclid")


class GeometryService:
    @staticmethod
    @numerical_guard("bregman_divergence")
    def bregman_divergence(reg, x, y):
        """
        Bregman divergence D_R(x || y)

        Args:
            reg: Regularizer
            x: First point
            y: Reference point

        Returns:
            float: R(x) - R(y) - <grad R(y), x - y>, clipped at 0
        """
        x = as_point(x, name="x")
        y = as_point(y, dimension=x.size, name="y")
        reg.check_admissible(x, "x")
        reg.check_admissible(y, "y")
        return max(float(reg.bregman(x, y)), 0.0)

    @staticmethod
    def reparam_forward(q, u, domain=None):
        """
        Map u in K' to x = q(u)

        Args:
            q: Reparameterization
            u: Point in K'
            domain: Optional K' to check membership against

        Returns:
            np.ndarray: q(u)
        """
        u = as_point(u, name="u")
        if domain is not None:
            require_member(domain, u, Config.MEMBERSHIP_TOL, "u")
        return q.forward(u)

    @staticmethod
    def reparam_inverse(q, x):
        """Map x in K back to u = q^{-1}(x); the nonnegative root for power maps"""
        return q.inverse(as_point(x))

    @staticmethod
    def chain_gradient(q, u, grad_f_at_x):
        """
        Gradient of u -> f(q(u)) from the gradient of f at q(u)

        Args:
            q: Reparameterization
            u: Point in K'
            grad_f_at_x: grad f evaluated at q(u)

        Returns:
            np.ndarray: J_q(u)^T grad f, a diagonal multiply
        """
        u = as_point(u, name="u")
        grad = as_point(grad_f_at_x, dimension=u.size, name="grad_f_at_x")
        return q.jacobian_diag(u) * grad

    @staticmethod
    @numerical_guard("link_apply")
    def link_apply(reg, x):
        x = as_point(x)
        reg.check_admissible(x)
        return reg.link(x)

    @staticmethod
    @numerical_guard("link_invert")
    def link_invert(reg, g):
        return reg.link_inverse(as_point(g, name="g"))

    @staticmethod
    def assumption1_deviation(pair, U):
        """
        Per-point sup-norm gap between [Hess R(q(u))]^{-1} and J_q(u) J_q(u)^T

        Args:
            pair: GeometryPair
            U: Array (n, d) of points in K'

        Returns:
            np.ndarray: Deviation for each row
        """
        U = np.atleast_2d(np.asarray(U, dtype=float))
        X = pair.reparam.forward(U)
        inverse_hessian = 1.0 / pair.regularizer.hessian_diag(X)
        J = pair.reparam.jacobian_diag(U)
        return np.max(np.abs(inverse_hessian - J * J), axis=1)

    @staticmethod
    @numerical_guard("verify_assumption1")
    def verify_assumption1(pair, num_samples=1000, tol=None, seed=None):
        """
        Check the Jacobian/Hessian identity on interior samples of K'

        Args:
            pair: GeometryPair
            num_samples: Number of samples
            tol: Pass threshold on the max deviation
            seed: Sampling seed

        Returns:
            VerificationReport: max deviation, worst point and verdict
        """
        if num_samples < 1:
            raise RejectedInputError("num_samples must be at least 1")
        tol = Config.GEOMETRY_TOL if tol is None else tol
        seed = Config.DEFAULT_SEED if seed is None else seed

        rng = stream(seed, 1)
        U = pair.reparam_domain.sample_interior(rng, num_samples, Config.SAMPLE_MARGIN)
        if not np.all(np.isfinite(U)) or not np.all(pair.reparam_domain.contains(U)):
            raise ConfigurationError(
                f"Interior sampler failed on {pair.reparam_domain!r}",
                {"pair": pair.name},
            )

        deviations = GeometryService.assumption1_deviation(pair, U)
        worst = int(np.argmax(deviations))
        report = VerificationReport(
            pair=pair.name,
            num_samples=num_samples,
            max_deviation=float(deviations[worst]),
            worst_point=U[worst].tolist(),
            tolerance=tol,
            passed=bool(deviations[worst] <= tol),
        )
        logger.info(
            f"Assumption 1 check for {pair.name}: max deviation {report.max_deviation:.3e} "
            f"({'pass' if report.passed else 'FAIL'})"
        )
        return report

    @staticmethod
    def domain_map_mismatches(pair, num_samples=500, seed=None, tol=None):
        """
        Count sampled u where membership in K' disagrees with membership of q(u) in K

        Samples come from a box 10% wider than the bounding box of K', so both
        outcomes occur.
        """
        tol = Config.MEMBERSHIP_TOL if tol is None else tol
        rng = stream(Config.DEFAULT_SEED if seed is None else seed, 2)
        lo, hi = pair.reparam_domain.bounding_box()
        pad = 0.1 * (hi - lo)
        U = lo - pad + (hi - lo + 2 * pad) * rng.random((num_samples, pair.dimension))
        if pair.reparam.kind in ("quarter-square", "power"):
            U = np.abs(U)
        in_image = pair.reparam_domain.contains(U, tol)
        in_primal = pair.primal_domain.contains(pair.reparam.forward(U), tol)
        return int(np.sum(in_image != in_primal))

    @staticmethod
    def build_pair(name, dimension=None, eps_min=None, tau=None, p=None, radius=1.0, primal_domain=None):
        """
        Build one of the built-in geometry pairs

        Args:
            name: 'eg', 'logbarrier', 'tempered' or 'euclid'
            dimension: Number of coordinates
            eps_min: Simplex smoothing / box lower end
            tau: Tempering parameter for the tempered pair
            p: Norm index for the tempered pair's ball
            radius: Radius of the tempered pair's ball
            primal_domain: Optional override for K

        Returns:
            GeometryPair: (R, q, K, K') with K' = q^{-1}(K)
        """
        from services.projection_service import ProjectionService

        d = Config.DIMENSION if dimension is None else int(dimension)
        eps = Config.EPS_MIN if eps_min is None else float(eps_min)

        if name == "eg":
            reg, q = NegativeEntropy(), QuarterSquare()
            primal = primal_domain or SmoothedSimplex(dimension=d, eps_min=eps)
        elif name == "logbarrier":
            if eps <= 0 and primal_domain is None:
                raise ConfigurationError("logbarrier pair needs eps_min > 0")
            reg, q = LogBarrier(), Exponential()
            primal = primal_domain or Box.uniform(d, eps, 1.0)
        elif name == "tempered":
            tau = Config.TAU if tau is None else float(tau)
            p = Config.LP_NORM if p is None else float(p)
            reg, q = Tempered(tau=tau), Power(tau=tau)
            primal = primal_domain or PositiveLpBall(dimension=d, p=p, radius=radius)
        elif name == "euclid":
            reg, q = Euclidean(), Identity()
            primal = primal_domain or SmoothedSimplex(dimension=d, eps_min=eps)
        else:
            raise ConfigurationError(f"Unknown geometry pair: {name}")

        image = ProjectionService.map_domain(q, primal)
        pair = GeometryPair(
            name=name,
            regularizer=reg,
            reparam=q,
            primal_domain=primal,
            reparam_domain=image,
        )
        logger.debug(f"Built {pair!r} with K' = {image!r}")
        return pair
