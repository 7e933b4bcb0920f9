import logging

import numpy as np

from config import Config
from errors import ConfigurationError, NumericalFailure, RejectedInputError
from models.learner_state import OmdState, PerturbationSpec
from models.loss import LinearLoss
from schemas import (
    ClosenessRow,
    ClosenessSweepResult,
    ComparatorReport,
    ConstantsReport,
    FigureResult,
    FlowCheckResult,
    FlowRow,
    GeometryCheckResponse,
    PerturbationBound,
    PerturbationRow,
    PerturbationRuleResult,
    PerturbationSweepResult,
    RegretReport,
    RegretSweepResult,
    RegretSweepRow,
    RunSummary,
    SlopeFit,
)
from services.geometry_service import GeometryService
from services.learner_service import LearnerService
from services.loss_service import LossService
from services.projection_service import ProjectionService
from utils.decorators import logged, numerical_guard
from utils.rng import derive_seed, stream, uniform_sphere
from utils.validators import require_count

logger = logging.getLogger(__name__)

ETA_RULES = ("theorem", "sqrt", "fixed")
# Pairs played on the smoothed simplex
SIMPLEX_PAIRS = ("eg", "euclid")

# Grid evaluation batch size
_GRID_CHUNK = 200_000


class ExperimentService:
    # ------------------------------------------------------------------
    # Comparator and regret
    # ------------------------------------------------------------------

    @staticmethod
    def _gradient_mapping(domain, total, x):
        """||x - P_K(x - grad F(x))||, zero exactly at constrained minimizers"""
        step = ProjectionService.euclid_project(domain, x - total.gradient(x)).point
        return float(np.linalg.norm(x - step))

    @staticmethod
    def _polish(domain, total, x, max_iter=None):
        """Projected gradient with backtracking on the averaged loss"""
        max_iter = Config.COMPARATOR_POLISH_ITER if max_iter is None else max_iter
        target = 1e-2 * Config.CERTIFICATE_TOL
        s = 1.0
        value, grad = total.value(x), total.gradient(x)
        iterations = 0
        for iterations in range(1, max_iter + 1):
            while True:
                x_new = ProjectionService.euclid_project(domain, x - s * grad).point
                step = x_new - x
                if not np.any(step):
                    return x, iterations
                value_new = total.value(x_new)
                model = value + float(grad @ step) + float(step @ step) / (2.0 * s)
                if value_new <= model + 1e-15 * (1.0 + abs(value)):
                    break
                s *= 0.5
            x, value, grad = x_new, value_new, total.gradient(x_new)
            if ExperimentService._gradient_mapping(domain, total, x) <= target:
                break
            s *= 1.5
        return x, iterations

    @staticmethod
    @logged
    def compute_comparator(losses, pair):
        """
        Offline minimizer of sum_t f_t over K

        Long-horizon OMD on the averaged loss (step c / sqrt(s)) gives a warm
        start, projected gradient polishes it, and the gradient-mapping norm
        certifies the result. For d <= 3 a grid over K cross-checks the value
        and the lower of the two wins.

        Args:
            losses: LossSequence
            pair: GeometryPair whose primal domain is K

        Returns:
            ComparatorReport: point, summed value, certificate
        """
        domain = pair.primal_domain
        T = len(losses)
        total = LossService.aggregate(losses)
        average = total.scaled(1.0 / T)

        x = domain.center()
        extremes = domain.extreme_points()
        grad_scale = float(np.max(np.linalg.norm(average.gradient_batch(extremes), axis=1)))
        iterations = 0

        if grad_scale > 0:
            c = domain.diameter() / grad_scale
            budget = min(Config.COMPARATOR_OMD_FACTOR * T, Config.COMPARATOR_OMD_CAP)
            try:
                for s in range(1, budget + 1):
                    grad = average.gradient(x)
                    if not np.any(grad):
                        break
                    state = OmdState(x=x, pair=pair, eta=c / np.sqrt(s))
                    x = LearnerService.omd_step(state, grad)[0].x
                    iterations = s
                    if s % 50 == 0 and ExperimentService._gradient_mapping(domain, average, x) <= Config.CERTIFICATE_TOL:
                        break
            except NumericalFailure as e:
                logger.warning(f"Comparator warm start stopped early: {e.message}")

            x, polish_iterations = ExperimentService._polish(domain, average, x)
            iterations += polish_iterations

        value = float(total.value(x))
        grid_value = grid_spacing = None
        if domain.dimension <= 3:
            points, grid_spacing = ProjectionService.grid_points(domain)
            values = np.concatenate([
                total.value_batch(points[i:i + _GRID_CHUNK]) for i in range(0, len(points), _GRID_CHUNK)
            ])
            best = int(np.argmin(values))
            grid_value = float(values[best])
            if grid_value < value - 1e-12 * (1.0 + abs(value)):
                candidate, extra = ExperimentService._polish(domain, average, points[best].copy())
                iterations += extra
                candidate_value = float(total.value(candidate))
                if candidate_value < value:
                    logger.info(f"Grid start improved the comparator by {value - candidate_value:.3e}")
                    x, value = candidate, candidate_value

        certificate = ExperimentService._gradient_mapping(domain, average, x)
        certified = certificate <= Config.CERTIFICATE_TOL
        if not certified:
            logger.warning(f"Comparator not certified: gradient mapping {certificate:.3e}")

        return ComparatorReport(
            point=x.tolist(),
            value=value,
            certificate=certificate,
            certified=certified,
            loss_fingerprint=losses.fingerprint,
            iterations=iterations,
            grid_value=grid_value,
            grid_spacing=grid_spacing,
        )

    @staticmethod
    def regret_of_trace(trace, comparator):
        """
        Regret = sum of recorded losses - comparator value

        Raises:
            RejectedInputError: trace and comparator were built on different losses
        """
        if trace.loss_fingerprint != comparator.loss_fingerprint:
            raise RejectedInputError(
                "Trace and comparator use different loss sequences",
                {"trace": trace.loss_fingerprint, "comparator": comparator.loss_fingerprint},
            )
        cumulative = float(np.sum(trace.losses))
        return RegretReport(
            cumulative_loss=cumulative,
            comparator_value=comparator.value,
            comparator_point=comparator.point,
            certificate=comparator.certificate,
            certified=comparator.certified,
            regret=cumulative - comparator.value,
        )

    # ------------------------------------------------------------------
    # Constants and step sizes
    # ------------------------------------------------------------------

    @staticmethod
    def step_size_theorem(T, D, G, G_F):
        """eta = T^{-2/3} D^{2/3} G^{-10/3} / G_F"""
        if not (T > 0 and D > 0 and G_F > 0):
            raise RejectedInputError("T, D and G_F must be positive")
        if not G > 1:
            raise RejectedInputError(f"G must exceed 1, got {G}")
        return T ** (-2.0 / 3.0) * D ** (2.0 / 3.0) * G ** (-10.0 / 3.0) / G_F

    @staticmethod
    def theorem_envelope(T, D, G, G_F):
        """Loose regret envelope 10 T^{2/3} D^{1/3} G^{10/3} G_F"""
        return 10.0 * T ** (2.0 / 3.0) * D ** (1.0 / 3.0) * G ** (10.0 / 3.0) * G_F

    @staticmethod
    def perturbation_bound(C, T, eta, D, G, G_F):
        """
        Regret bound C T G / eta + D / eta + eta G^2 T / 2 of the perturbed learner

        Returns:
            PerturbationBound: with G and with the G_F substitution
        """
        if not eta > 0 or T < 1 or C < 0:
            raise RejectedInputError("perturbation_bound needs eta > 0, T >= 1, C >= 0")

        def bound(g):
            return C * T * g / eta + D / eta + eta * g * g * T / 2.0

        return PerturbationBound(C=C, T=int(T), eta=eta, bound_with_G=bound(G), bound_with_G_F=bound(G_F))

    @staticmethod
    def eps_schedule(T, exponent=None, dimension=None):
        """
        Smoothing eps_min = T^{-exponent}

        With a dimension, the result must leave a non-empty smoothed simplex,
        i.e. eps_min < 1/d. Small exponents fail this at desk-scale T
        (T^{-1/23} is about 0.74 at T = 1000).
        """
        exponent = Config.EPS_EXPONENT if exponent is None else exponent
        if T < 1 or not 0 < exponent < 1:
            raise ConfigurationError(f"eps schedule needs T >= 1 and exponent in (0, 1), got {exponent}")
        eps = float(T) ** (-exponent)
        if dimension is not None and eps * dimension >= 1.0:
            needed = np.log(dimension) / np.log(T) if T > 1 else float("inf")
            raise ConfigurationError(
                f"eps_min = T^-{exponent:.4g} = {eps:.4g} must stay below 1/d = {1.0 / dimension:.4g}; "
                f"at T={T} the exponent has to exceed {needed:.4g}",
                {"T": T, "exponent": exponent, "eps_min": eps, "d": dimension},
            )
        return eps

    @staticmethod
    def _observed_grad_bound(losses, points):
        seen, largest = set(), 0.0
        for oracle in losses.oracles:
            if id(oracle) in seen:
                continue
            seen.add(id(oracle))
            if isinstance(oracle, LinearLoss):
                largest = max(largest, float(np.linalg.norm(oracle.c)))
            else:
                largest = max(largest, float(np.max(np.linalg.norm(oracle.gradient_batch(points), axis=1))))
        return largest

    @staticmethod
    def estimate_constants(pair, losses=None, samples=1000, seed=None):
        """
        Empirical constants over interior samples

        G_F is the largest loss gradient, D the largest Bregman divergence
        between sampled and extreme points, and the G components are the sup
        norms of q', (q^{-1})', (q^{-1})'', R' and R'''. G is their maximum,
        floored at Config.THEOREM_G_FLOOR.

        Returns:
            ConstantsReport
        """
        if samples < 100:
            raise RejectedInputError("estimate_constants needs at least 100 samples")
        seed = Config.DEFAULT_SEED if seed is None else seed
        domain, reg, q = pair.primal_domain, pair.regularizer, pair.reparam

        rng = stream(seed, 30)
        X = domain.sample_interior(rng, int(samples), Config.SAMPLE_MARGIN)
        U = q.inverse(X)
        extremes = domain.extreme_points()

        if losses is None:
            grad_bound = Config.GRAD_BOUND
        else:
            grad_bound = ExperimentService._observed_grad_bound(losses, np.vstack([X, extremes]))

        points = np.vstack([X[:200], extremes])
        if reg.requires_positive:
            points = points[np.all(points > 0, axis=1)]
        divergences = reg.bregman(points[:, None, :], points[None, :, :])
        D = float(np.max(divergences))

        components = {
            "dq": float(np.max(np.abs(q.jacobian_diag(U)))),
            "dq_inverse": float(np.max(np.abs(q.inverse_derivative(X)))),
            "d2q_inverse": float(np.max(np.abs(q.inverse_second_derivative(X)))),
            "link": float(np.max(np.abs(reg.link(X)))),
            "third_derivative": float(np.max(np.abs(reg.third_derivative(X)))),
        }
        G = max(max(components.values()), Config.THEOREM_G_FLOOR)
        return ConstantsReport(pair=pair.name, samples=int(samples), G_F=grad_bound, D=D, G=G, **components)

    @staticmethod
    def resolve_eta(rule, T, pair=None, losses=None, eta=None, learner="omd"):
        """
        Step size for a run of length T

        Args:
            rule: 'theorem', 'sqrt', 'fixed' or None (theorem for ogd, sqrt otherwise)
            T: Horizon
            pair, losses: Needed by the theorem rule
            eta: Explicit value ('auto' or None lets the rule decide)
            learner: Learner kind, used for the default rule

        Returns:
            float: eta > 0
        """
        if eta is not None and eta != "auto":
            eta = float(eta)
            if not eta > 0:
                raise ConfigurationError(f"eta must be positive, got {eta}")
            return eta

        rule = rule or ("theorem" if learner == "ogd" else "sqrt")
        if rule not in ETA_RULES:
            raise ConfigurationError(f"Unknown eta rule: {rule}")
        if rule == "sqrt":
            return Config.SQRT_ETA_SCALE / np.sqrt(T)
        if rule == "fixed":
            raise ConfigurationError("eta rule 'fixed' needs an explicit eta")

        constants = ExperimentService.estimate_constants(pair, losses)
        return ExperimentService.step_size_theorem(T, constants.D, constants.G, constants.G_F)

    @staticmethod
    def fit_slope(xs, ys):
        """
        Least-squares slope of log y against log x

        Returns:
            SlopeFit or None: None when fewer than 3 points or an ordinate is
            not above Config.SLOPE_ORDINATE_FLOOR
        """
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.size != ys.size:
            raise RejectedInputError("Abscissae and ordinates differ in length")
        if xs.size < 3 or np.any(ys <= Config.SLOPE_ORDINATE_FLOOR):
            return None
        if np.any(xs <= 0):
            raise RejectedInputError("Abscissae must be positive")
        if np.unique(xs).size != xs.size:
            raise RejectedInputError("Abscissae must be distinct")

        lx, ly = np.log(xs), np.log(ys)
        slope, intercept = np.polyfit(lx, ly, 1)
        residual = ly - (slope * lx + intercept)
        return SlopeFit(
            points=np.column_stack([lx, ly]).tolist(),
            slope=float(slope),
            intercept=float(intercept),
            residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        )

    # ------------------------------------------------------------------
    # Single runs
    # ------------------------------------------------------------------

    @staticmethod
    def pair_from_config(config, T=None):
        """GeometryPair for a RunConfig, with eps_min from the schedule when enabled"""
        eps_min = config.eps_min
        if config.eps_exponent is not None:
            eps_min = ExperimentService.eps_schedule(
                config.T if T is None else T,
                config.eps_exponent,
                config.d if config.pair in SIMPLEX_PAIRS else None,
            )
        return GeometryService.build_pair(config.pair, config.d, eps_min, config.tau, config.p)

    @staticmethod
    def run_experiment(config):
        """
        One learner run with its comparator and regret

        Returns:
            tuple: (RunSummary, RunTrace)
        """
        pair = ExperimentService.pair_from_config(config)
        losses = LossService.make_sequence(
            config.loss, config.d, config.T, config.grad_bound, config.seed, pair.primal_domain
        )
        eta = ExperimentService.resolve_eta(config.eta_rule, config.T, pair, losses, config.eta, config.learner)
        perturbation = None
        if config.perturb_rule != "zero":
            perturbation = PerturbationSpec(
                rule=config.perturb_rule,
                kappa=config.kappa,
                mode=config.perturb_mode,
                seed=derive_seed(config.seed, 7),
            )

        trace = LearnerService.run_learner(
            config.learner, pair, losses, eta, perturbation=perturbation, init=config.init
        )
        comparator = ExperimentService.compute_comparator(losses, pair)
        regret = ExperimentService.regret_of_trace(trace, comparator)
        logger.info(f"{config.learner} on {pair.name}: regret {regret.regret:.6g} at T={config.T}")
        return RunSummary(metadata=trace.metadata(), regret=regret), trace

    @staticmethod
    def check_geometry(pairs, num_samples=1000, seed=None):
        """
        Jacobian/Hessian identity and domain-map agreement for several pairs

        Args:
            pairs: GeometryPairs to check

        Returns:
            GeometryCheckResponse
        """
        reports, mismatches = [], 0
        for pair in pairs:
            reports.append(GeometryService.verify_assumption1(pair, num_samples, seed=seed))
            mismatches += GeometryService.domain_map_mismatches(pair, seed=seed)
        passed = all(r.passed for r in reports) and mismatches == 0
        return GeometryCheckResponse(reports=reports, domain_map_mismatches=mismatches, passed=passed)

    # ------------------------------------------------------------------
    # Sweeps
    # ------------------------------------------------------------------

    @staticmethod
    def _check_horizons(horizons):
        horizons = [require_count(T, 1, "horizon") for T in horizons]
        if len(horizons) < 3:
            raise RejectedInputError("A sweep needs at least 3 horizons")
        if len(set(horizons)) != len(horizons):
            raise RejectedInputError("Sweep horizons must be distinct")
        return horizons

    @staticmethod
    @logged
    def regret_sweep(pair, learner, loss, horizons, eta_rule=None, eta=None, reps=None, seed=None,
                     grad_bound=None, pair_for_horizon=None):
        """
        Mean regret per horizon over independent seeds, with a log-log slope fit

        Args:
            pair: GeometryPair
            learner: 'omd', 'eg' or 'ogd'
            loss: Loss generator name
            horizons: At least 3 horizons
            eta_rule: 'theorem', 'sqrt' or 'fixed'
            eta: Explicit step size for the fixed rule
            reps: Seeds per horizon
            seed: Base seed
            grad_bound: G_F
            pair_for_horizon: Optional callable T -> GeometryPair (smoothing schedule)

        Returns:
            RegretSweepResult

        Raises:
            NumericalFailure: a comparator was not certified
        """
        horizons = ExperimentService._check_horizons(horizons)
        reps = Config.DEFAULT_REPS if reps is None else require_count(reps, 1, "reps")
        seed = Config.DEFAULT_SEED if seed is None else seed
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound

        rows, means, breaches = [], [], []
        rule = eta_rule or ("theorem" if learner == "ogd" else "sqrt")
        for T in horizons:
            cell_pair = pair_for_horizon(T) if pair_for_horizon is not None else pair
            regrets = []
            for rep in range(reps):
                cell_seed = derive_seed(seed, T, rep)
                losses = LossService.make_sequence(loss, cell_pair.dimension, T, grad_bound, cell_seed,
                                                   cell_pair.primal_domain)
                step = ExperimentService.resolve_eta(rule, T, cell_pair, losses, eta, learner)
                trace = LearnerService.run_learner(learner, cell_pair, losses, step)
                comparator = ExperimentService.compute_comparator(losses, cell_pair)
                if not comparator.certified:
                    raise NumericalFailure(
                        f"Comparator not certified at T={T}, rep={rep}",
                        {"certificate": comparator.certificate},
                    )
                report = ExperimentService.regret_of_trace(trace, comparator)
                regrets.append(report.regret)
                rows.append(RegretSweepRow(
                    T=T, eta=step, seed=cell_seed, regret=report.regret,
                    comparator=comparator.value, certificate=comparator.certificate,
                ))
            mean = float(np.mean(regrets))
            means.append([float(T), mean])
            logger.info(f"T={T}: mean regret {mean:.6g} over {reps} seeds")

            if rule == "theorem":
                constants = ExperimentService.estimate_constants(cell_pair, losses)
                envelope = ExperimentService.theorem_envelope(T, constants.D, constants.G, constants.G_F)
                if mean > envelope:
                    breaches.append(T)
                    logger.warning(f"Mean regret {mean:.4g} exceeds the theorem envelope {envelope:.4g} at T={T}")

        fit = ExperimentService.fit_slope([m[0] for m in means], [m[1] for m in means])
        if fit is None:
            logger.info("Slope fit skipped: nonpositive mean regret")
        return RegretSweepResult(
            pair=pair.name, learner=learner, loss=loss, eta_rule=rule,
            rows=rows, mean_regret=means, fit=fit, envelope_breaches=breaches,
        )

    @staticmethod
    @logged
    def closeness_sweep(pair, etas, trials=50, seed=None, grad_bound=None):
        """
        Max coupled one-step distance per step size, with a log-log slope fit

        Starts are interior samples of K and gradients are uniform on the
        G_F-sphere; the same starts are reused for every eta.

        Returns:
            ClosenessSweepResult
        """
        etas = [float(e) for e in etas]
        if any(e <= 0 for e in etas):
            raise RejectedInputError("Step sizes must be positive")
        if len(etas) < 3:
            raise RejectedInputError("closeness needs at least 3 step sizes")
        if np.log10(max(etas) / min(etas)) < 1.5 - 1e-12:
            raise RejectedInputError("Step sizes must span at least 1.5 decades")
        trials = require_count(trials, 1, "trials")
        seed = Config.DEFAULT_SEED if seed is None else seed
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound

        starts, grads = [], []
        for trial in range(trials):
            rng = stream(seed, 40, trial)
            starts.append(pair.primal_domain.sample_interior(rng, 1, Config.SAMPLE_MARGIN)[0])
            grads.append(uniform_sphere(rng, pair.dimension, grad_bound))

        rows = []
        for eta in etas:
            distance = max(
                LearnerService.coupled_step_distance(pair, x, g, eta) for x, g in zip(starts, grads)
            )
            rows.append(ClosenessRow(eta=eta, max_distance=distance))
            logger.debug(f"eta={eta:g}: max coupled distance {distance:.3e}")

        fit = ExperimentService.fit_slope([r.eta for r in rows], [r.max_distance for r in rows])
        return ClosenessSweepResult(pair=pair.name, trials=trials, rows=rows, fit=fit)

    @staticmethod
    @logged
    def perturbation_sweep(pair, loss="quadratic", horizons=None, rules=None, kappa=None, mode="adversarial",
                           reps=None, seed=None, grad_bound=None):
        """
        Regret of perturbed OMD at eta = c T^{-1/2} for each magnitude rule

        Each row also carries the analytic bound divided by T.

        Returns:
            PerturbationSweepResult
        """
        horizons = ExperimentService._check_horizons(horizons or [300, 1000, 3000, 10000])
        rules = list(rules or ["eta", "eta^1.5", "eta^2"])
        kappa = Config.PERTURB_SCALE if kappa is None else kappa
        reps = Config.DEFAULT_REPS if reps is None else require_count(reps, 1, "reps")
        seed = Config.DEFAULT_SEED if seed is None else seed
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound

        cells = {}
        for T in horizons:
            for rep in range(reps):
                cell_seed = derive_seed(seed, T, rep)
                losses = LossService.make_sequence(loss, pair.dimension, T, grad_bound, cell_seed,
                                                   pair.primal_domain)
                comparator = ExperimentService.compute_comparator(losses, pair)
                if not comparator.certified:
                    raise NumericalFailure(
                        f"Comparator not certified at T={T}, rep={rep}",
                        {"certificate": comparator.certificate},
                    )
                cells[(T, rep)] = (cell_seed, losses, comparator)
            constants = ExperimentService.estimate_constants(pair, cells[(T, 0)][1])
            cells[T] = constants

        rows, results = [], []
        for rule in rules:
            means, bounds = [], []
            for T in horizons:
                eta = Config.SQRT_ETA_SCALE / np.sqrt(T)
                constants = cells[T]
                regrets = []
                for rep in range(reps):
                    cell_seed, losses, comparator = cells[(T, rep)]
                    spec = PerturbationSpec(rule=rule, kappa=kappa, mode=mode, seed=derive_seed(cell_seed, 7))
                    trace = LearnerService.run_learner("omd", pair, losses, eta, perturbation=spec)
                    regret = ExperimentService.regret_of_trace(trace, comparator).regret
                    regrets.append(regret)
                    bound = ExperimentService.perturbation_bound(
                        spec.magnitude(eta), T, eta, constants.D, constants.G, constants.G_F
                    )
                    rows.append(PerturbationRow(
                        rule=rule, T=T, eta=eta, C=spec.magnitude(eta), seed=cell_seed, regret=regret,
                        mean_perturb_norm=float(np.mean([r.perturb_norm for r in trace.records])),
                        bound_over_T=bound.bound_with_G / T,
                    ))
                bounds.append(bound)
                means.append([float(T), float(np.mean(regrets))])

            fit = ExperimentService.fit_slope([m[0] for m in means], [m[1] for m in means])
            results.append(PerturbationRuleResult(rule=rule, mean_regret=means, bounds=bounds, fit=fit))
            if fit is not None:
                logger.info(f"Perturbation rule {rule}: regret slope {fit.slope:.3f}")

        return PerturbationSweepResult(pair=pair.name, loss=loss, mode=mode, kappa=kappa, rows=rows, rules=results)

    # ------------------------------------------------------------------
    # Flow equivalence and tracking figure
    # ------------------------------------------------------------------

    @staticmethod
    def _interior(domain, reg, x):
        return domain.membership(x, 0.0) and (not reg.requires_positive or np.all(x > 0))

    @staticmethod
    @numerical_guard("flow_check")
    def flow_check(pair, loss="quadratic", tau_end=1.0, steps=(1e-2, 5e-3, 2.5e-3), grad_bound=None):
        """
        Euler discretizations of the mirror flow and the reparameterized gradient flow

        Both start at the center of K, run without projections to tau_end, and
        the largest gap ||x_k - q(u_k)|| along the path is reported per step h.

        Raises:
            ConfigurationError: a trajectory left the interior of K
        """
        steps = [float(h) for h in steps]
        if len(steps) < 3:
            raise RejectedInputError("flow_check needs at least 3 step sizes")
        if any(h <= 0 for h in steps) or any(b >= a for a, b in zip(steps, steps[1:])):
            raise RejectedInputError("Step sizes must be positive and strictly decreasing")
        if tau_end < 0:
            raise RejectedInputError("tau_end must be nonnegative")
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound

        domain, reg, q = pair.primal_domain, pair.regularizer, pair.reparam
        oracle = LossService.make_sequence(loss, pair.dimension, 1, grad_bound, 0, domain)[1]
        x0 = domain.center()

        rows = []
        for h in steps:
            n = int(round(tau_end / h))
            x, u = x0.copy(), q.inverse(x0)
            deviation = 0.0
            for _ in range(n):
                x = reg.link_inverse(reg.link(x) - h * oracle.gradient(x))
                u = u - h * q.jacobian_diag(u) * oracle.gradient(q.forward(u))
                x_from_u = q.forward(u)
                mirror_inside = ExperimentService._interior(domain, reg, x)
                if not (mirror_inside and ExperimentService._interior(domain, reg, x_from_u)):
                    raise ConfigurationError(
                        "Flow left the interior of the domain; use a smaller tau_end",
                        {"h": h, "tau_end": tau_end, "mirror_inside": bool(mirror_inside)},
                    )
                deviation = max(deviation, float(np.linalg.norm(x - x_from_u)))
            rows.append(FlowRow(h=h, steps=n, max_deviation=deviation))

        ratios = [
            (b.max_deviation / a.max_deviation) if a.max_deviation > 0 else None
            for a, b in zip(rows, rows[1:])
        ]
        logger.info(f"Flow check on {pair.name}: ratios {ratios}")
        return FlowCheckResult(pair=pair.name, tau_end=tau_end, rows=rows, ratios=ratios)

    @staticmethod
    def figure_eg_tracking(pair, eta=0.05, T=200, follower="ogd", grad_bound=None):
        """
        Free-running EG and a follower from the center of K on a fixed quadratic

        Args:
            pair: The 'eg' GeometryPair
            eta: Shared step size
            T: Rounds
            follower: 'ogd' (reparameterized gradient descent) or 'eg'

        Returns:
            tuple: (FigureResult, CSV header, CSV rows for t = 0..T)
        """
        if pair.name != "eg":
            raise ConfigurationError("The tracking figure needs the eg pair")
        if follower not in ("ogd", "eg"):
            raise ConfigurationError(f"Unknown follower: {follower}")
        T = require_count(T, 1, "T")
        if not eta > 0:
            raise RejectedInputError("eta must be positive")
        grad_bound = Config.GRAD_BOUND if grad_bound is None else grad_bound

        domain, q = pair.primal_domain, pair.reparam
        oracle = LossService.make_sequence("quadratic", pair.dimension, 1, grad_bound, 0, domain)[1]

        x_eg = domain.center()
        u = q.inverse(x_eg)
        x_follow = x_eg.copy()

        d = pair.dimension
        prefix = "replay" if follower == "eg" else follower
        header = ["t"] + [f"eg_{i}" for i in range(d)] + [f"{prefix}_{i}" for i in range(d)] + ["distance"]
        rows = [[0, *x_eg.tolist(), *x_follow.tolist(), 0.0]]
        for t in range(1, T + 1):
            grad_eg = oracle.gradient(x_eg)
            grad_follow = oracle.gradient(x_follow)
            x_eg = LearnerService.eg_step(x_eg, grad_eg, eta, domain)
            if follower == "ogd":
                v = u - eta * q.jacobian_diag(u) * grad_follow
                u = ProjectionService.euclid_project(pair.reparam_domain, v).point
                x_follow = q.forward(u)
            else:
                x_follow = LearnerService.eg_step(x_follow, grad_follow, eta, domain)
            rows.append([t, *x_eg.tolist(), *x_follow.tolist(), float(np.linalg.norm(x_eg - x_follow))])

        max_distance = max(row[-1] for row in rows)
        result = FigureResult(
            follower=follower, eta=eta, T=T, max_distance=max_distance, diameter=domain.diameter()
        )
        return result, header, rows

