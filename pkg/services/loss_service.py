import logging

import numpy as np

from config import Config
from errors import ConfigurationError, RejectedInputError
from models.loss import AggregateLoss, LinearLoss, LossSequence, QuadraticLoss, ReparameterizedLoss
from utils.rng import stream
from utils.validators import as_point, require_member

logger = logging.getLogger(__name__)

SEQUENCE_KINDS = ("random-linear", "alternating-linear", "fixed-quadratic", "zero")

# CLI loss names to generator kinds
LOSS_ALIASES = {
    "linear": "random-linear",
    "alternating": "alternating-linear",
    "quadratic": "fixed-quadratic",
    "zero": "zero",
}


class LossService:
    @staticmethod
    def loss_value(oracle, x, domain=None):
        """
        Value of a loss oracle

        Args:
            oracle: LossOracle
            x: Point in the oracle's domain
            domain: Optional domain to check membership against

        Returns:
            float: f(x)
        """
        x = as_point(x)
        if domain is not None:
            require_member(domain, x, Config.MEMBERSHIP_TOL)
        return oracle.value(x)

    @staticmethod
    def loss_grad(oracle, x, domain=None):
        x = as_point(x)
        if domain is not None:
            require_member(domain, x, Config.MEMBERSHIP_TOL)
        return oracle.gradient(x)

    @staticmethod
    def reparameterize(oracle, reparam):
        return ReparameterizedLoss(inner=oracle, reparam=reparam)

    @staticmethod
    def quadratic_for_domain(a, b, domain, grad_bound):
        """
        Quadratic (a.x - b)^2 rescaled so its gradient norm is at most grad_bound on the domain

        The gradient is 2 (a.x - b) a, so its largest norm follows exactly from
        the range of a.x over the domain. Scaling (a, b) by s scales gradients by s^2.
        """
        a = np.asarray(a, dtype=float)
        lo, hi = domain.linear_range(a)
        gmax = 2.0 * np.linalg.norm(a) * max(abs(lo - b), abs(hi - b))
        if gmax > grad_bound:
            scale = np.sqrt(grad_bound / gmax)
            a, b = a * scale, b * scale
            logger.debug(f"Quadratic rescaled by {scale:.4f} to respect G_F={grad_bound}")
        return QuadraticLoss(a=a, b=float(b))

    @staticmethod
    def make_sequence(kind, dimension, horizon, grad_bound=None, seed=0, domain=None, c0=None, a=None, b=None):
        """
        Materialize a loss sequence f_1..f_T

        Args:
            kind: 'random-linear', 'alternating-linear', 'fixed-quadratic' or 'zero'
            dimension: Dimension d
            horizon: Number of rounds T
            grad_bound: Gradient bound G_F
            seed: Generator seed
            domain: Domain K, required for quadratics
            c0: Base vector of the alternating sequence (default G_F e_1)
            a, b: Quadratic coefficients (default ones(d), 0.6)

        Returns:
            LossSequence: Replayable sequence
        """
        kind = LOSS_ALIASES.get(kind, kind)
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound
        if kind not in SEQUENCE_KINDS:
            raise ConfigurationError(f"Unknown loss sequence kind: {kind}")
        if horizon < 1 or not grad_bound > 0:
            raise ConfigurationError("Loss sequence needs T >= 1 and G_F > 0")

        if kind == "random-linear":
            rng = stream(seed, 10)
            directions = rng.standard_normal((horizon, dimension))
            directions *= grad_bound / np.linalg.norm(directions, axis=1, keepdims=True)
            oracles = tuple(LinearLoss(c=row) for row in directions)

        elif kind == "alternating-linear":
            if c0 is None:
                c0 = np.zeros(dimension)
                c0[0] = grad_bound
            c0 = as_point(c0, dimension=dimension, name="c0")
            if np.linalg.norm(c0) > grad_bound * (1 + 1e-12):
                raise ConfigurationError("Alternating base vector exceeds the gradient bound")
            plus, minus = LinearLoss(c=c0), LinearLoss(c=-c0)
            oracles = tuple(minus if t % 2 else plus for t in range(1, horizon + 1))

        elif kind == "fixed-quadratic":
            if domain is None:
                raise ConfigurationError("fixed-quadratic losses need the domain for G_F scaling")
            a = np.ones(dimension) if a is None else as_point(a, dimension=dimension, name="a")
            b = Config.QUADRATIC_OFFSET if b is None else float(b)
            oracle = LossService.quadratic_for_domain(a, b, domain, grad_bound)
            oracles = (oracle,) * horizon

        else:
            zero = LinearLoss(c=np.zeros(dimension))
            oracles = (zero,) * horizon

        return LossSequence(kind=kind, horizon=horizon, grad_bound=grad_bound, seed=seed, oracles=oracles)

    @staticmethod
    def grad_check(oracle, x, h=1e-6):
        """
        Compare the analytic gradient with central differences

        Args:
            oracle: LossOracle
            x: Interior point
            h: Difference step

        Returns:
            float: max_i |analytic_i - numeric_i| / (1 + |analytic_i|)
        """
        x = as_point(x)
        if not h > 0:
            raise RejectedInputError("Finite-difference step must be positive")
        analytic = oracle.gradient(x)
        shifts = h * np.eye(x.size)
        numeric = (oracle.value_batch(x + shifts) - oracle.value_batch(x - shifts)) / (2.0 * h)
        return float(np.max(np.abs(analytic - numeric) / (1.0 + np.abs(analytic))))

    @staticmethod
    def aggregate(sequence):
        """
        Closed form of sum_t f_t for linear and quadratic oracles

        Returns:
            AggregateLoss: F(x) = x'Qx + l'x + const
        """
        d = None
        quadratic = linear = None
        constant = 0.0
        # Count repeats by identity so fixed sequences cost O(1) per distinct oracle
        counts = {}
        for oracle in sequence.oracles:
            key = id(oracle)
            if key in counts:
                counts[key][1] += 1
            else:
                counts[key] = [oracle, 1]

        for oracle, count in counts.values():
            if d is None:
                d = oracle.parameters()[0].size
                quadratic, linear = np.zeros((d, d)), np.zeros(d)
            if isinstance(oracle, LinearLoss):
                linear += count * oracle.c
            elif isinstance(oracle, QuadraticLoss):
                quadratic += count * np.outer(oracle.a, oracle.a)
                linear -= count * 2.0 * oracle.b * oracle.a
                constant += count * oracle.b ** 2
            else:
                raise RejectedInputError(f"Cannot aggregate {oracle.kind} losses in closed form")
        return AggregateLoss(quadratic=quadratic, linear=linear, constant=constant)
