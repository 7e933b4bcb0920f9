import logging
from dataclasses import replace

import numpy as np

from config import Config
from errors import ConfigurationError, NumericalFailure, RejectedInputError, RunAborted
from models.learner_state import OgdState, OmdState
from models.regularizer import NegativeEntropy
from models.trace import RunTrace, StepRecord
from services.projection_service import ProjectionService
from utils.decorators import numerical_guard
from utils.rng import stream, uniform_ball
from utils.validators import as_point, require_member

logger = logging.getLogger(__name__)

LEARNER_KINDS = ("omd", "eg", "ogd")


def _pull_toward(domain, anchor, point, iterations=60):
    """Largest step from a feasible anchor toward point that stays in the domain"""
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if domain.membership(anchor + mid * (point - anchor), 0.0):
            lo = mid
        else:
            hi = mid
    return anchor + lo * (point - anchor)


def _nudge_inward(pair, x):
    """Move coordinates off the boundary where log-based links blow up"""
    reg, domain = pair.regularizer, pair.primal_domain
    if not reg.requires_positive or np.all(x > 0):
        return x
    mask = x <= 0
    nudged = np.where(mask, Config.EPS_MIN / 10.0, x)
    if not domain.membership(nudged, 0.0):
        nudged = _pull_toward(domain, domain.center(), nudged)
    logger.warning(f"Iterate nudged inward on coordinates {np.flatnonzero(mask).tolist()}")
    return nudged


class LearnerService:
    @staticmethod
    @numerical_guard("omd_step")
    def omd_step(state, grad):
        """
        One online mirror descent step

        Args:
            state: OmdState at round t
            grad: Loss gradient at x_t

        Returns:
            tuple: (next OmdState, unprojected y_{t+1}, ProjectionResult)
        """
        pair = state.pair
        reg = pair.regularizer
        grad = as_point(grad, dimension=pair.dimension, name="grad")

        dual = reg.link(state.x) - state.eta * grad
        if not np.all(reg.in_link_range(dual)):
            raise NumericalFailure(
                f"Mirror step left the range of the {reg.kind} link; use a smaller eta",
                {"eta": state.eta, "t": state.t},
            )
        y = reg.link_inverse(dual)
        if reg.requires_positive and np.any(y <= 0):
            raise NumericalFailure(
                f"Mirror step underflowed to the boundary; use a smaller eta",
                {"eta": state.eta, "t": state.t},
            )

        projection = ProjectionService.bregman_project(reg, pair.primal_domain, y)
        x_next = _nudge_inward(pair, projection.point)
        return state.advance(x_next), y, projection

    @staticmethod
    @numerical_guard("omd_step_proximal")
    def omd_step_proximal(state, grad):
        """
        Proximal form of the OMD step, solved directly

        Minimizes grad.(x - x_t) + D_R(x || x_t) / eta over K by projected
        gradient descent, halving the inner step whenever the local Lipschitz
        test fails, until the step norm drops below Config.PROX_TOL.

        Args:
            state: OmdState at round t
            grad: Loss gradient at x_t

        Returns:
            tuple: (minimizer, inner iterations)
        """
        pair = state.pair
        reg, domain, eta = pair.regularizer, pair.primal_domain, state.eta
        grad = as_point(grad, dimension=pair.dimension, name="grad")
        x = state.x.copy()
        anchor = reg.link(x)

        # Separable constraints admit a diagonally scaled step
        scaling = 1.0 / reg.hessian_diag(x) if domain.kind == "box" else np.ones_like(x)

        def objective_grad(z):
            return grad + (reg.link(z) - anchor) / eta

        def project(z):
            z = ProjectionService.euclid_project(domain, z).point
            if reg.requires_positive:
                z = np.maximum(z, Config.PROX_FLOOR)
            return z

        s = eta / float(np.max(reg.hessian_diag(x) * scaling))
        g = objective_grad(x)
        for iteration in range(1, Config.PROX_MAX_ITER + 1):
            while True:
                x_new = project(x - s * scaling * g)
                step = x_new - x
                step_norm = float(np.linalg.norm(step))
                if step_norm == 0.0:
                    return x_new, iteration
                g_new = objective_grad(x_new)
                if s * float(np.linalg.norm((g_new - g) * scaling)) <= step_norm:
                    break
                s *= 0.5
                if s < 1e-300:
                    raise NumericalFailure("Proximal inner step collapsed", {"t": state.t})

            if float(np.max(np.abs(step))) <= Config.PROX_TOL:
                return x_new, iteration
            x, g = x_new, g_new
            s *= 2.0

        raise NumericalFailure(
            "Proximal solver stalled",
            {"iterations": Config.PROX_MAX_ITER, "last_step": float(np.max(np.abs(step)))},
        )

    @staticmethod
    @numerical_guard("ogd_step")
    def ogd_step(state, grad_tilde):
        """
        One projected gradient step on K'

        Args:
            state: OgdState at round t
            grad_tilde: Gradient of f_t(q(u)) at u_t

        Returns:
            tuple: (next OgdState, unprojected v_{t+1}, ProjectionResult)
        """
        pair = state.pair
        grad_tilde = as_point(grad_tilde, dimension=pair.dimension, name="grad_tilde")
        v = state.u - state.eta * grad_tilde
        projection = ProjectionService.euclid_project(pair.reparam_domain, v)
        return state.advance(projection.point), v, projection

    @staticmethod
    @numerical_guard("eg_step")
    def eg_step(x, grad, eta, domain):
        """
        Exponentiated gradient: x * exp(-eta grad), then the entropic projection

        Args:
            x: Strictly positive point
            grad: Loss gradient at x
            eta: Step size (0 returns x)
            domain: Domain K

        Returns:
            np.ndarray: Next iterate
        """
        x = as_point(x, dimension=domain.dimension)
        if np.any(x <= 0):
            raise RejectedInputError("EG needs a strictly positive iterate")
        grad = as_point(grad, dimension=domain.dimension, name="grad")
        if eta == 0:
            return x.copy()
        y = x * np.exp(-eta * grad)
        return ProjectionService.bregman_project(NegativeEntropy(), domain, y).point

    @staticmethod
    def sample_perturbation(spec, eta, dimension, rng, grad=None):
        """
        Draw r_t with ||r_t|| <= C(eta)

        Args:
            spec: PerturbationSpec
            eta: Step size
            dimension: d
            rng: Generator for the uniform mode
            grad: Current loss gradient for the adversarial mode

        Returns:
            np.ndarray: Perturbation vector
        """
        magnitude = spec.magnitude(eta)
        if magnitude == 0.0:
            return np.zeros(dimension)
        if spec.mode == "adversarial":
            norm = 0.0 if grad is None else float(np.linalg.norm(grad))
            if norm == 0.0:
                return np.zeros(dimension)
            return magnitude * np.asarray(grad, dtype=float) / norm
        return uniform_ball(rng, dimension, magnitude)

    @staticmethod
    def perturbed_omd_step(state, grad, r, magnitude, resample=None):
        """
        OMD step followed by the additive perturbation r

        If x + r leaves K, r is redrawn (up to Config.PERTURB_RESAMPLES times
        when a resampler is given) and then halved until the point is feasible.

        Args:
            state: OmdState at round t
            grad: Loss gradient at x_t
            r: Perturbation with ||r|| <= magnitude
            magnitude: C(eta)
            resample: Optional callable returning a fresh r

        Returns:
            tuple: (next OmdState, realized ||r||, ProjectionResult)
        """
        r = as_point(r, dimension=state.pair.dimension, name="r")
        if np.linalg.norm(r) > magnitude * (1.0 + 1e-12):
            raise RejectedInputError(
                "Perturbation exceeds its magnitude bound",
                {"norm": float(np.linalg.norm(r)), "bound": magnitude},
            )

        next_state, _, projection = LearnerService.omd_step(state, grad)
        if not np.any(r):
            return next_state, 0.0, projection

        domain = state.pair.primal_domain
        base = next_state.x
        candidate = base + r
        attempts = 0
        while resample is not None and attempts < Config.PERTURB_RESAMPLES and not domain.membership(candidate, 0.0):
            r = resample()
            candidate = base + r
            attempts += 1

        halvings = 0
        while not domain.membership(candidate, 0.0):
            halvings += 1
            if halvings > 60:
                r = np.zeros_like(r)
                candidate = base
                break
            r = 0.5 * r
            candidate = base + r
        if halvings:
            logger.debug(f"Perturbation halved {halvings} times at t={state.t}")

        candidate = _nudge_inward(state.pair, candidate)
        return replace(next_state, x=candidate), float(np.linalg.norm(r)), projection

    @staticmethod
    def coupled_step_distance(pair, x_t, grad_at_x, eta):
        """
        One-step gap between OMD and reparameterized OGD started at the same primal point

        Args:
            pair: GeometryPair
            x_t: Interior point of K
            grad_at_x: Loss gradient at x_t
            eta: Step size

        Returns:
            float: ||x_{t+1} - q(u_{t+1})||_2 with u_t = q^{-1}(x_t)
        """
        x = as_point(x_t, dimension=pair.dimension, name="x_t")
        require_member(pair.primal_domain, x, Config.MEMBERSHIP_TOL, "x_t")
        if eta == 0:
            return 0.0
        if eta < 0:
            raise RejectedInputError("Step size must be nonnegative")

        u = pair.reparam.inverse(x)
        omd_next, _, _ = LearnerService.omd_step(OmdState(x=x, pair=pair, eta=eta), grad_at_x)
        grad_tilde = pair.reparam.jacobian_diag(u) * as_point(grad_at_x, dimension=pair.dimension)
        ogd_next, _, _ = LearnerService.ogd_step(OgdState(u=u, pair=pair, eta=eta), grad_tilde)
        return float(np.linalg.norm(omd_next.x - pair.reparam.forward(ogd_next.u)))

    @staticmethod
    def initial_point(pair, init="center"):
        """
        Starting point x_1

        Args:
            pair: GeometryPair
            init: 'center' or 'link-zero' (projection of the point where grad R vanishes)

        Returns:
            np.ndarray: x_1 in K
        """
        domain = pair.primal_domain
        if init == "center":
            return ProjectionService.domain_center(domain)
        if init == "link-zero":
            reg = pair.regularizer
            zero = np.zeros(domain.dimension)
            if not np.all(reg.in_link_range(zero)):
                raise ConfigurationError(f"{reg.kind} has no point with vanishing gradient")
            return ProjectionService.bregman_project(reg, domain, reg.link_inverse(zero)).point
        raise ConfigurationError(f"Unknown initialization: {init}")

    @staticmethod
    def run_learner(kind, pair, losses, eta, T=None, perturbation=None, init="center"):
        """
        Play the online protocol for T rounds

        Args:
            kind: 'omd', 'eg' or 'ogd'
            pair: GeometryPair
            losses: LossSequence
            eta: Constant step size
            T: Number of rounds (default: the sequence horizon)
            perturbation: Optional PerturbationSpec (OMD only)
            init: Initialization rule

        Returns:
            RunTrace: One record per round, losses evaluated at the primal iterate
        """
        if kind not in LEARNER_KINDS:
            raise RejectedInputError(f"Unknown learner kind: {kind}")
        if not eta > 0:
            raise RejectedInputError(f"Step size must be positive, got {eta}")
        T = losses.horizon if T is None else int(T)
        if T < 1 or T > len(losses):
            raise RejectedInputError(f"T must lie in [1, {len(losses)}], got {T}")

        perturbed = perturbation is not None and perturbation.rule != "zero"
        if perturbed and kind != "omd":
            raise RejectedInputError("Perturbations apply to the omd learner only")

        d = pair.dimension
        domain = pair.primal_domain
        x1 = LearnerService.initial_point(pair, init)
        trace = RunTrace(
            pair=pair.name,
            learner=kind,
            eta=float(eta),
            horizon=T,
            seed=losses.seed,
            dimension=d,
            loss_fingerprint=losses.fingerprint,
            perturbation=perturbation.to_dict() if perturbation is not None else None,
        )

        if kind == "ogd":
            state = OgdState(u=pair.reparam.inverse(x1), pair=pair, eta=eta)
        else:
            state = OmdState(x=x1, pair=pair, eta=eta)

        rng = stream(perturbation.seed, 20) if perturbed else None
        magnitude = perturbation.magnitude(eta) if perturbed else 0.0
        shrunk = 0

        logger.info(f"Running {kind} on {pair.name}: T={T}, eta={eta:.4g}, loss={losses.kind}")
        for t in range(1, T + 1):
            try:
                oracle = losses[t]
                x = state.x
                loss = oracle.value(x)
                grad = oracle.gradient(x)
                perturb_norm = 0.0
                u = None

                if kind == "ogd":
                    u = state.u.copy()
                    grad_tilde = pair.reparam.jacobian_diag(state.u) * grad
                    state, _, projection = LearnerService.ogd_step(state, grad_tilde)
                elif kind == "eg":
                    x_next = LearnerService.eg_step(x, grad, eta, domain)
                    state, projection = state.advance(x_next), None
                elif perturbed:
                    r = LearnerService.sample_perturbation(perturbation, eta, d, rng, grad)
                    resample = None
                    if perturbation.mode == "uniform":
                        resample = lambda: LearnerService.sample_perturbation(perturbation, eta, d, rng)
                    state, perturb_norm, projection = LearnerService.perturbed_omd_step(
                        state, grad, r, magnitude, resample
                    )
                    if perturb_norm < float(np.linalg.norm(r)):
                        shrunk += 1
                else:
                    state, _, projection = LearnerService.omd_step(state, grad)

                diagnostics = {}
                if projection is not None:
                    diagnostics = {
                        "multiplier": projection.multiplier,
                        "iterations": projection.iterations,
                        "residual": projection.residual,
                    }
                trace.append(StepRecord(
                    t=t,
                    x=np.array(x, dtype=float),
                    loss=float(loss),
                    grad_norm=float(np.linalg.norm(grad)),
                    perturb_norm=perturb_norm,
                    u=u,
                    projection=diagnostics,
                ))
            except (NumericalFailure, RejectedInputError) as e:
                logger.error(f"{kind} run on {pair.name} aborted at step {t}: {e.message}")
                raise RunAborted(
                    f"Run aborted at step {t}: {e.message}",
                    trace=trace,
                    step=t,
                    diagnostics=e.diagnostics,
                ) from e

        if shrunk:
            logger.warning(f"Perturbation shrunk to stay feasible in {shrunk} of {T} rounds")
        return trace
