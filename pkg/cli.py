"""
Command-line entry point for the mirror-reparam experiments

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 acceptance check failed.
"""

import argparse
import logging
import math
import os
import sys

from config import Config, load_run_config
from errors import AcceptanceFailure, ConfigurationError, ExperimentError, RunAborted

logger = logging.getLogger("cli")

# RunConfig fields settable from the command line
RUN_FLAGS = (
    ("--pair", str), ("--learner", str), ("--tau", float), ("--p", float), ("--d", int),
    ("--eps-min", float), ("--eps-exponent", float), ("--loss", str), ("--T", int), ("--eta", str),
    ("--eta-rule", str), ("--seed", int), ("--reps", int), ("--grad-bound", float),
    ("--horizons", str), ("--etas", str), ("--trials", int), ("--samples", int), ("--rules", str),
    ("--perturb-rule", str), ("--perturb-mode", str), ("--kappa", float), ("--tau-end", float),
    ("--steps", str), ("--init", str), ("--h-max", float), ("--interp", str), ("--follower", str),
    ("--out", str),
)

COMMAND_DEFAULTS = {
    "perturb-sweep": {"loss": "quadratic", "perturb_mode": "adversarial"},
    "flow-check": {"loss": "quadratic"},
    "figure-eg": {"pair": "eg", "loss": "quadratic", "d": 2, "T": 200, "eta": 0.05},
}

GEOMETRY_TAUS = (0.25, 0.5, 0.75)


class ExperimentArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1 like any configuration error"""

    def error(self, message):
        raise ConfigurationError(f"{self.prog}: {message}")


def _configure_logging(level):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _add_run_flags(parser):
    parser.add_argument("--config", help="Plain-text key = value file; flags override it")
    parser.add_argument("--log-level", default=None, help="Logging level (default: Config.LOG_LEVEL)")
    for flag, kind in RUN_FLAGS:
        parser.add_argument(flag, type=kind, default=None, dest=flag[2:].replace("-", "_"))


def _load(args):
    overrides = {flag[2:].replace("-", "_"): getattr(args, flag[2:].replace("-", "_")) for flag, _ in RUN_FLAGS}
    return load_run_config(args.config, overrides, COMMAND_DEFAULTS.get(args.command))


def _out(config, name):
    return os.path.join(config.out, name)


def _emit(model):
    print(model.model_dump_json(indent=2))


def _accept(condition, message, diagnostics=None):
    if not condition:
        raise AcceptanceFailure(message, diagnostics)
    logger.info(f"Acceptance passed: {message}")


def _in_window(value, lo, hi):
    return value is not None and lo <= value <= hi


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_check_geometry(args, config):
    from services.experiment_service import ExperimentService
    from services.geometry_service import GeometryService
    from services.report_service import ReportService

    if args.all:
        pairs = [GeometryService.build_pair("eg", config.d, config.eps_min)]
        pairs.append(GeometryService.build_pair("logbarrier", config.d, config.eps_min))
        pairs += [GeometryService.build_pair("tempered", config.d, tau=tau, p=2.0) for tau in GEOMETRY_TAUS]
        pairs.append(GeometryService.build_pair("euclid", config.d, config.eps_min))
    else:
        pairs = [ExperimentService.pair_from_config(config)]

    report = ExperimentService.check_geometry(pairs, config.samples, config.seed)
    ReportService.write_json(_out(config, "check_geometry.json"), report)
    _emit(report)
    _accept(report.passed, "geometry identity holds on every pair",
            {"deviations": [r.max_deviation for r in report.reports]})


def cmd_run(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    stem = f"trace_{config.pair}_{config.learner}_seed{config.seed}"
    try:
        summary, trace = ExperimentService.run_experiment(config)
    except RunAborted as e:
        if e.trace is not None and e.trace.records:
            ReportService.write_trace(e.trace, _out(config, stem + "_partial.csv"))
        raise
    summary.csv_path = ReportService.write_trace(trace, _out(config, stem + ".csv"))
    ReportService.write_json(_out(config, stem + ".json"), summary)
    _emit(summary)


def cmd_closeness(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    result = ExperimentService.closeness_sweep(pair, config.etas, config.trials, config.seed, config.grad_bound)
    path = ReportService.write_closeness(result, _out(config, f"closeness_{config.pair}.csv"))
    ReportService.write_json(_out(config, f"closeness_{config.pair}.json"), result)
    if result.fit is not None:
        ReportService.plot_csv(path, log=True)
    _emit(result)

    if result.fit is None:
        _accept(all(r.max_distance <= 1e-12 for r in result.rows), "learners coincide at every eta")
    else:
        _accept(
            _in_window(result.fit.slope, Config.CLOSENESS_SLOPE_MIN, Config.CLOSENESS_SLOPE_MAX)
            and result.fit.residual_rms <= Config.CLOSENESS_RMS_MAX,
            f"closeness slope in [{Config.CLOSENESS_SLOPE_MIN}, {Config.CLOSENESS_SLOPE_MAX}]",
            {"slope": result.fit.slope, "residual_rms": result.fit.residual_rms},
        )


def cmd_regret_sweep(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    pair_for_horizon = None
    if config.eps_exponent is not None:
        pair_for_horizon = lambda T: ExperimentService.pair_from_config(config, T)

    result = ExperimentService.regret_sweep(
        pair, config.learner, config.loss, config.horizons, config.eta_rule, config.eta,
        config.reps, config.seed, config.grad_bound, pair_for_horizon,
    )
    stem = f"regret_{config.pair}_{config.learner}"
    ReportService.write_regret_sweep(result, _out(config, stem + ".csv"))
    ReportService.write_json(_out(config, stem + ".json"), result)
    ReportService.plot_lines(
        _out(config, stem + ".svg"),
        [m[0] for m in result.mean_regret],
        {"mean regret": [max(m[1], Config.SLOPE_ORDINATE_FLOOR) for m in result.mean_regret]},
        "T", "regret", log=True,
    )
    _emit(result)

    if result.fit is None:
        return
    slope = result.fit.slope
    if result.eta_rule == "theorem":
        _accept(slope <= Config.REGRET_SLOPE_MAX, f"regret slope <= {Config.REGRET_SLOPE_MAX}", {"slope": slope})
    elif result.eta_rule == "sqrt":
        _accept(_in_window(slope, Config.OMD_SLOPE_MIN, Config.OMD_SLOPE_MAX),
                f"regret slope in [{Config.OMD_SLOPE_MIN}, {Config.OMD_SLOPE_MAX}]", {"slope": slope})


def cmd_perturb_sweep(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    result = ExperimentService.perturbation_sweep(
        pair, config.loss, config.horizons, config.rules, config.kappa, config.perturb_mode,
        config.reps, config.seed, config.grad_bound,
    )
    stem = f"perturb_{config.pair}"
    ReportService.write_perturbation_sweep(result, _out(config, stem + ".csv"))
    ReportService.write_json(_out(config, stem + ".json"), result)
    ReportService.plot_lines(
        _out(config, stem + ".svg"),
        [m[0] for m in result.rules[0].mean_regret],
        {r.rule: [max(m[1], Config.SLOPE_ORDINATE_FLOOR) for m in r.mean_regret] for r in result.rules},
        "T", "regret", log=True,
    )
    _emit(result)

    slopes = {r.rule: (r.fit.slope if r.fit is not None else None) for r in result.rules}
    if "eta^2" in slopes:
        _accept(slopes["eta^2"] is not None and slopes["eta^2"] <= Config.PERTURB_SMALL_SLOPE_MAX,
                f"eta^2 perturbation slope <= {Config.PERTURB_SMALL_SLOPE_MAX}", slopes)
    if "eta" in slopes:
        _accept(slopes["eta"] is not None and slopes["eta"] >= Config.PERTURB_LARGE_SLOPE_MIN,
                f"eta perturbation slope >= {Config.PERTURB_LARGE_SLOPE_MIN}", slopes)


def cmd_flow_check(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    result = ExperimentService.flow_check(pair, config.loss, config.tau_end, config.steps, config.grad_bound)
    ReportService.write_flow(result, _out(config, f"flow_{config.pair}.csv"))
    ReportService.write_json(_out(config, f"flow_{config.pair}.json"), result)
    _emit(result)

    if all(r.max_deviation == 0.0 for r in result.rows):
        return
    _accept(
        all(_in_window(ratio, Config.FLOW_RATIO_MIN, Config.FLOW_RATIO_MAX) for ratio in result.ratios),
        f"deviation ratios in [{Config.FLOW_RATIO_MIN}, {Config.FLOW_RATIO_MAX}]",
        {"ratios": result.ratios},
    )


def cmd_figure_eg(args, config):
    from services.experiment_service import ExperimentService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    eta = ExperimentService.resolve_eta(config.eta_rule or "sqrt", config.T, pair, None, config.eta, config.follower)
    result, header, rows = ExperimentService.figure_eg_tracking(pair, eta, config.T, config.follower,
                                                                config.grad_bound)
    stem = f"figure_eg_{config.follower}"
    result.csv_path = ReportService.write_csv(_out(config, stem + ".csv"), header, rows)
    result.svg_path = ReportService.plot_trajectories(_out(config, stem + ".svg"), header, rows)
    _emit(result)
    _accept(result.max_distance <= Config.TRACKING_FRACTION * result.diameter,
            f"trajectories within {Config.TRACKING_FRACTION:.0%} of the diameter",
            {"max_distance": result.max_distance, "diameter": result.diameter})


def _builtin_reconstructions(config):
    from services.reconstruct_service import ReconstructService

    k = 2.0 / (2.0 - config.tau)
    return [
        (ReconstructService.scalar_map("quarter-square", 0.2, 2.0), "negative-entropy", None),
        (ReconstructService.scalar_map("exponential", math.log(0.1), 0.0), "log-barrier", None),
        (ReconstructService.scalar_map("identity", 0.0, 1.0), "euclidean", None),
        (ReconstructService.scalar_map("power", k * 0.01 ** (1.0 / k), k, tau=config.tau), "tempered", config.tau),
    ]


def cmd_reconstruct(args, config):
    import numpy as np

    from services.reconstruct_service import ReconstructService
    from services.report_service import ReportService

    if args.map:
        if args.lower is None or args.upper is None:
            raise ConfigurationError("--map needs --lower and --upper")
        jobs = [(ReconstructService.scalar_map(args.map, args.lower, args.upper, args.constant, config.tau),
                 args.known, config.tau)]
    else:
        jobs = _builtin_reconstructions(config)

    passed = True
    for scalar_map, known, tau in jobs:
        report, link = ReconstructService.certify_reconstruction(scalar_map, known, config.h_max, config.interp,
                                                                 tau=tau)
        grid = link.grid
        residuals = [0.0] + ReconstructService.ode_residual(scalar_map, link, grid[1:-1]).tolist() + [0.0]
        ReportService.write_csv(
            _out(config, f"reconstruct_{scalar_map.name}.csv"),
            ["u", "link", "slope", "ode_residual"],
            [[float(u), float(v), float(s), float(r)] for u, v, s, r in zip(grid, link.values, link.slopes, residuals)],
        )
        ReportService.write_json(_out(config, f"reconstruct_{scalar_map.name}.json"), report)
        _emit(report)
        passed = passed and report.passed

        if scalar_map.name == "quarter-square" and scalar_map.lower < 1.0 < scalar_map.upper:
            corrupted = ReconstructService.corrupt_link(link)
            control = ReconstructService.ode_residual(scalar_map, corrupted, 1.0)
            logger.info(f"Negative control residual at u=1: {control:.4g}")
            _accept(control > 0.1, "corrupted link is rejected", {"residual": float(np.asarray(control))})

    _accept(passed, "every reconstruction certified")


def cmd_constants(args, config):
    from services.experiment_service import ExperimentService
    from services.loss_service import LossService
    from services.report_service import ReportService

    pair = ExperimentService.pair_from_config(config)
    losses = LossService.make_sequence(config.loss, config.d, config.T, config.grad_bound, config.seed,
                                       pair.primal_domain)
    report = ExperimentService.estimate_constants(pair, losses, config.samples, config.seed)
    ReportService.write_json(_out(config, f"constants_{config.pair}.json"), report)
    _emit(report)


def cmd_plot(args, config):
    from services.report_service import ReportService

    columns = [c.strip() for c in args.columns.split(",")] if args.columns else None
    path = ReportService.plot_csv(args.csv, args.svg, args.x, columns, log=args.log)
    print(path)


def cmd_serve(args, config):
    import uvicorn

    uvicorn.run("app:app", host=args.host or Config.SERVICE_HOST, port=args.port or Config.SERVICE_PORT,
                log_level="info")


COMMANDS = {
    "check-geometry": cmd_check_geometry,
    "run": cmd_run,
    "closeness": cmd_closeness,
    "regret-sweep": cmd_regret_sweep,
    "perturb-sweep": cmd_perturb_sweep,
    "flow-check": cmd_flow_check,
    "figure-eg": cmd_figure_eg,
    "reconstruct": cmd_reconstruct,
    "constants": cmd_constants,
    "plot": cmd_plot,
    "serve": cmd_serve,
}


def build_parser():
    parser = ExperimentArgumentParser(
        prog="mirror-reparam",
        description="Online mirror descent versus reparameterized gradient descent experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        command = sub.add_parser(name)
        _add_run_flags(command)
        if name == "check-geometry":
            command.add_argument("--all", action="store_true", help="Check every built-in pair")
        elif name == "reconstruct":
            command.add_argument("--map", choices=["quarter-square", "exponential", "power", "identity"])
            command.add_argument("--lower", type=float)
            command.add_argument("--upper", type=float)
            command.add_argument("--constant", type=float, default=0.0)
            command.add_argument("--known", choices=["negative-entropy", "log-barrier", "tempered", "euclidean"])
        elif name == "plot":
            command.add_argument("--csv", required=True)
            command.add_argument("--svg")
            command.add_argument("--x")
            command.add_argument("--columns")
            command.add_argument("--log", action="store_true")
        elif name == "serve":
            command.add_argument("--host")
            command.add_argument("--port", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigurationError as e:
        _configure_logging(Config.LOG_LEVEL)
        logger.error(f"ConfigurationError: {e.message}")
        parser.print_usage(sys.stderr)
        return e.exit_code
    _configure_logging(args.log_level or Config.LOG_LEVEL)

    try:
        config = _load(args)
        COMMANDS[args.command](args, config)
    except AcceptanceFailure as e:
        logger.error(f"Acceptance check failed: {e.message} {e.diagnostics}")
        return e.exit_code
    except ExperimentError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
