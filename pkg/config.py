import os
import logging

from dotenv import load_dotenv, dotenv_values
load_dotenv()

from errors import ConfigurationError

logger = logging.getLogger(__name__)


class Config:
    # Numerical tolerances
    MEMBERSHIP_TOL = float(os.getenv('MEMBERSHIP_TOL', '1e-9'))
    PROJECTION_TOL = float(os.getenv('PROJECTION_TOL', '1e-10'))
    BISECTION_MAX_ITER = int(os.getenv('BISECTION_MAX_ITER', '200'))
    PROX_TOL = float(os.getenv('PROX_TOL', '1e-13'))
    PROX_MAX_ITER = int(os.getenv('PROX_MAX_ITER', '20000'))
    PROX_FLOOR = float(os.getenv('PROX_FLOOR', '1e-300'))
    QUAD_TOL = float(os.getenv('QUAD_TOL', '1e-9'))
    H_MAX = float(os.getenv('H_MAX', '1e-3'))
    DIFFEO_MARGIN = float(os.getenv('DIFFEO_MARGIN', '1e-8'))
    SAMPLE_MARGIN = float(os.getenv('SAMPLE_MARGIN', '0.05'))

    # Domains and geometry pairs
    EPS_MIN = float(os.getenv('EPS_MIN', '1e-3'))
    EPS_EXPONENT = float(os.getenv('EPS_EXPONENT', str(1.0 / 23.0)))
    DIMENSION = int(os.getenv('DIMENSION', '2'))
    TAU = float(os.getenv('TAU', '0.5'))
    LP_NORM = float(os.getenv('LP_NORM', '2.0'))

    # Losses
    GRAD_BOUND = float(os.getenv('GRAD_BOUND', '1.0'))
    QUADRATIC_OFFSET = float(os.getenv('QUADRATIC_OFFSET', '0.6'))

    # Comparator
    CERTIFICATE_TOL = float(os.getenv('CERTIFICATE_TOL', '1e-6'))
    COMPARATOR_OMD_FACTOR = int(os.getenv('COMPARATOR_OMD_FACTOR', '50'))
    COMPARATOR_OMD_CAP = int(os.getenv('COMPARATOR_OMD_CAP', '500'))
    COMPARATOR_POLISH_ITER = int(os.getenv('COMPARATOR_POLISH_ITER', '100000'))
    GRID_RESOLUTION = float(os.getenv('GRID_RESOLUTION', '1e-3'))
    GRID_MAX_POINTS = int(os.getenv('GRID_MAX_POINTS', '2000000'))

    # Experiments
    DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', '0'))
    DEFAULT_REPS = int(os.getenv('DEFAULT_REPS', '5'))
    SQRT_ETA_SCALE = float(os.getenv('SQRT_ETA_SCALE', '1.0'))
    THEOREM_G_FLOOR = float(os.getenv('THEOREM_G_FLOOR', '1.5'))
    PERTURB_SCALE = float(os.getenv('PERTURB_SCALE', '0.1'))
    PERTURB_RESAMPLES = int(os.getenv('PERTURB_RESAMPLES', '20'))
    SLOPE_ORDINATE_FLOOR = float(os.getenv('SLOPE_ORDINATE_FLOOR', '1e-12'))

    # Acceptance windows
    CLOSENESS_SLOPE_MIN = float(os.getenv('CLOSENESS_SLOPE_MIN', '1.4'))
    CLOSENESS_SLOPE_MAX = float(os.getenv('CLOSENESS_SLOPE_MAX', '2.1'))
    CLOSENESS_RMS_MAX = float(os.getenv('CLOSENESS_RMS_MAX', '0.15'))
    REGRET_SLOPE_MAX = float(os.getenv('REGRET_SLOPE_MAX', '0.85'))
    OMD_SLOPE_MIN = float(os.getenv('OMD_SLOPE_MIN', '0.35'))
    OMD_SLOPE_MAX = float(os.getenv('OMD_SLOPE_MAX', '0.65'))
    PERTURB_SMALL_SLOPE_MAX = float(os.getenv('PERTURB_SMALL_SLOPE_MAX', '0.75'))
    PERTURB_LARGE_SLOPE_MIN = float(os.getenv('PERTURB_LARGE_SLOPE_MIN', '0.85'))
    FLOW_RATIO_MIN = float(os.getenv('FLOW_RATIO_MIN', '0.3'))
    FLOW_RATIO_MAX = float(os.getenv('FLOW_RATIO_MAX', '0.7'))
    GEOMETRY_TOL = float(os.getenv('GEOMETRY_TOL', '1e-10'))
    ODE_RESIDUAL_MAX = float(os.getenv('ODE_RESIDUAL_MAX', '1e-6'))
    HESSIAN_MISMATCH_MAX = float(os.getenv('HESSIAN_MISMATCH_MAX', '1e-8'))
    TRACKING_FRACTION = float(os.getenv('TRACKING_FRACTION', '0.05'))

    # Output
    OUT_DIR = os.getenv('OUT_DIR', 'results')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    # HTTP service
    SERVICE_HOST = os.getenv('SERVICE_HOST', '0.0.0.0')
    SERVICE_PORT = int(os.getenv('SERVICE_PORT', '5003'))
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'


def read_config_file(path):
    """
    Parse a plain-text ``key = value`` experiment file

    Args:
        path: Path to the file

    Returns:
        dict: Lower-cased keys with hyphens folded to underscores
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f"Config file not found: {path}")

    raw = dotenv_values(path)
    values = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigurationError(f"Config key without value: {key}", {"path": path})
        values[key.strip().lower().replace('-', '_')] = value.strip()

    logger.info(f"Loaded {len(values)} settings from {path}")
    return values


def load_run_config(path=None, overrides=None, defaults=None):
    """
    Build a RunConfig from Config defaults, an optional file and CLI overrides

    Args:
        path: Optional ``key = value`` file
        overrides: Dict of explicitly given flags (None values are ignored)
        defaults: Command-specific defaults, below the file in precedence

    Returns:
        RunConfig: Validated experiment configuration
    """
    from pydantic import ValidationError
    from schemas import RunConfig

    fields = {name.lower(): name for name in RunConfig.model_fields}
    merged = dict(defaults or {})
    if path:
        for key, value in read_config_file(path).items():
            merged[fields.get(key, key)] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    unknown = sorted(set(merged) - set(RunConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")

    try:
        return RunConfig(**merged)
    except ValidationError as e:
        details = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigurationError("Invalid configuration", {"errors": details}) from e
