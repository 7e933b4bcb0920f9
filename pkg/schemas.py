"""
Pydantic schemas for run configuration, reports and the HTTP surface
FastAPI uses these for automatic validation and documentation
"""

from pydantic import BaseModel, Field, field_validator
from typing import List, Literal, Optional, Union

from config import Config

PairName = Literal["eg", "logbarrier", "tempered", "euclid"]
LearnerKind = Literal["omd", "eg", "ogd"]
LossKind = Literal["linear", "quadratic", "alternating", "zero"]
EtaRule = Literal["theorem", "sqrt", "fixed"]
PerturbRule = Literal["zero", "eta", "eta^1.5", "eta^2"]


def _split_list(v):
    """Accept comma-separated strings from config files and CLI flags"""
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


# ============================================================================
# RUN CONFIGURATION
# ============================================================================

class RunConfig(BaseModel):
    """One experiment configuration; CLI flags override file values"""
    pair: PairName = Field("eg", description="Built-in geometry pair")
    learner: LearnerKind = Field("omd", description="Learner for single runs")
    tau: float = Field(Config.TAU, ge=0, lt=1, description="Tempering parameter")
    p: float = Field(Config.LP_NORM, ge=1, description="Norm index of the tempered pair's ball")
    d: int = Field(Config.DIMENSION, ge=1, le=64, description="Dimension")
    eps_min: float = Field(Config.EPS_MIN, ge=0, lt=1, description="Simplex smoothing / box floor")
    eps_exponent: Optional[float] = Field(None, gt=0, lt=1, description="Use eps_min = T^-exponent")
    loss: LossKind = Field("linear", description="Loss sequence generator")
    T: int = Field(1000, ge=1, description="Horizon")
    eta: Union[Literal["auto"], float] = Field("auto", description="'auto' or a positive step size")
    eta_rule: Optional[EtaRule] = Field(None, description="Step-size rule for sweeps")
    seed: int = Field(Config.DEFAULT_SEED, ge=0, description="Experiment seed")
    reps: int = Field(Config.DEFAULT_REPS, ge=1, description="Seeds per sweep cell")
    grad_bound: float = Field(Config.GRAD_BOUND, gt=0, description="Gradient bound G_F")
    horizons: List[int] = Field([300, 1000, 3000, 10000], description="Sweep horizons")
    etas: List[float] = Field([1e-1, 3e-2, 1e-2, 3e-3, 1e-3], description="Closeness step sizes")
    trials: int = Field(50, ge=1, description="Random starts per step size")
    samples: int = Field(1000, ge=1, description="Verification / estimation samples")
    rules: List[PerturbRule] = Field(["eta", "eta^1.5", "eta^2"], description="Perturbation rules to sweep")
    perturb_rule: PerturbRule = Field("zero", description="Perturbation rule for single runs")
    perturb_mode: Literal["uniform", "adversarial"] = Field("uniform", description="Perturbation direction law")
    kappa: float = Field(Config.PERTURB_SCALE, ge=0, description="Perturbation scale")
    tau_end: float = Field(1.0, ge=0, description="Flow horizon")
    steps: List[float] = Field([1e-2, 5e-3, 2.5e-3], description="Flow discretization steps")
    init: Literal["center", "link-zero"] = Field("center", description="OMD initialization")
    h_max: float = Field(Config.H_MAX, gt=0, description="Reconstruction grid spacing")
    interp: Literal["hermite", "pchip"] = Field("hermite", description="Reconstructed link interpolant")
    follower: Literal["ogd", "eg"] = Field("ogd", description="Learner tracked against EG in the figure")
    out: str = Field(Config.OUT_DIR, description="Output directory")

    @field_validator("horizons", "etas", "steps", "rules", mode="before")
    @classmethod
    def split_lists(cls, v):
        return _split_list(v)

    @field_validator("eta", mode="before")
    @classmethod
    def validate_eta(cls, v):
        if isinstance(v, str) and v.strip().lower() == "auto":
            return "auto"
        value = float(v)
        if not value > 0:
            raise ValueError("eta must be 'auto' or positive")
        return value

    @field_validator("etas", "steps")
    @classmethod
    def validate_positive(cls, v):
        if any(item <= 0 for item in v):
            raise ValueError("values must be positive")
        return v

    @field_validator("horizons")
    @classmethod
    def validate_horizons(cls, v):
        if any(item < 1 for item in v):
            raise ValueError("horizons must be >= 1")
        return v

    class Config:
        json_schema_extra = {
            "example": {
                "pair": "eg",
                "learner": "ogd",
                "d": 2,
                "eps_min": 0.001,
                "loss": "linear",
                "T": 1000,
                "eta": "auto",
                "seed": 0
            }
        }


# ============================================================================
# GEOMETRY SCHEMAS
# ============================================================================

class VerificationReport(BaseModel):
    """Result of the Jacobian/Hessian identity check"""
    pair: str
    num_samples: int
    max_deviation: float
    worst_point: List[float]
    tolerance: float
    passed: bool


class GeometryCheckResponse(BaseModel):
    reports: List[VerificationReport]
    domain_map_mismatches: int
    passed: bool


# ============================================================================
# LEARNER / REGRET SCHEMAS
# ============================================================================

class ComparatorReport(BaseModel):
    """Offline minimizer of the summed losses with its optimality certificate"""
    point: List[float]
    value: float
    certificate: float
    certified: bool
    loss_fingerprint: str
    iterations: int = 0
    grid_value: Optional[float] = None
    grid_spacing: Optional[float] = None


class RegretReport(BaseModel):
    cumulative_loss: float
    comparator_value: float
    comparator_point: List[float]
    certificate: float
    certified: bool
    regret: float


class SlopeFit(BaseModel):
    """Least-squares fit of log-ordinate against log-abscissa"""
    points: List[List[float]]
    slope: float
    intercept: float
    residual_rms: float


class RunSummary(BaseModel):
    metadata: dict
    regret: RegretReport
    csv_path: Optional[str] = None


class RegretSweepRow(BaseModel):
    T: int
    eta: float
    seed: int
    regret: float
    comparator: float
    certificate: float


class RegretSweepResult(BaseModel):
    pair: str
    learner: str
    loss: str
    eta_rule: str
    rows: List[RegretSweepRow]
    mean_regret: List[List[float]]
    fit: Optional[SlopeFit] = None
    envelope_breaches: List[int] = []


class ClosenessRow(BaseModel):
    eta: float
    max_distance: float


class ClosenessSweepResult(BaseModel):
    pair: str
    trials: int
    rows: List[ClosenessRow]
    fit: Optional[SlopeFit] = None


class PerturbationBound(BaseModel):
    """Analytic regret bound of perturbed OMD with both gradient-constant substitutions"""
    C: float
    T: int
    eta: float
    bound_with_G: float
    bound_with_G_F: float


class PerturbationRow(BaseModel):
    rule: str
    T: int
    eta: float
    C: float
    seed: int
    regret: float
    mean_perturb_norm: float
    bound_over_T: float


class PerturbationRuleResult(BaseModel):
    rule: str
    mean_regret: List[List[float]]
    bounds: List[PerturbationBound]
    fit: Optional[SlopeFit] = None


class PerturbationSweepResult(BaseModel):
    pair: str
    loss: str
    mode: str
    kappa: float
    rows: List[PerturbationRow]
    rules: List[PerturbationRuleResult]


class FlowRow(BaseModel):
    h: float
    steps: int
    max_deviation: float


class FlowCheckResult(BaseModel):
    pair: str
    tau_end: float
    rows: List[FlowRow]
    ratios: List[Optional[float]]


class FigureResult(BaseModel):
    follower: str
    eta: float
    T: int
    max_distance: float
    diameter: float
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None


class ConstantsReport(BaseModel):
    """Empirical constants; the G components are kept separate"""
    pair: str
    samples: int
    G_F: float
    D: float
    dq: float
    dq_inverse: float
    d2q_inverse: float
    link: float
    third_derivative: float
    G: float


# ============================================================================
# RECONSTRUCTION SCHEMAS
# ============================================================================

class DiffeomorphismReport(BaseModel):
    min_abs_derivative: float
    sign: int
    passed: bool


class ReconstructionReport(BaseModel):
    map: str
    interval: List[float]
    knots: int
    max_ode_residual: float
    max_hessian_mismatch: Optional[float] = None
    max_link_hessian_mismatch: Optional[float] = None
    strong_convexity_floor: float
    passed: bool


# ============================================================================
# SERVICE SCHEMAS
# ============================================================================

class HealthResponse(BaseModel):
    """Schema for health check response"""
    status: str
    service: str

    class Config:
        json_schema_extra = {
            "example": {
                "status": "healthy",
                "service": "mirror-reparam"
            }
        }


class ReconstructRequest(BaseModel):
    """Schema for a reconstruction certificate request"""
    map: Literal["quarter-square", "exponential", "identity", "power"] = Field(..., description="Reparameterization")
    lower: float = Field(..., description="Lower end C of the coordinate interval")
    upper: float = Field(..., description="Upper end of the coordinate interval")
    constant: float = Field(0.0, description="Integration constant c")
    tau: Optional[float] = Field(None, ge=0, le=1, description="Power map parameter")
    known: Optional[Literal["negative-entropy", "log-barrier", "tempered", "euclidean"]] = Field(
        None, description="Regularizer to compare Hessians against"
    )
    h_max: float = Field(Config.H_MAX, gt=0, description="Grid spacing")

    @field_validator("upper")
    @classmethod
    def validate_interval(cls, v, info):
        lower = info.data.get("lower")
        if lower is not None and v <= lower:
            raise ValueError("upper must exceed lower")
        return v

    class Config:
        json_schema_extra = {
            "example": {
                "map": "quarter-square",
                "lower": 0.2,
                "upper": 2.0,
                "known": "negative-entropy"
            }
        }


class ErrorResponse(BaseModel):
    """Body of every 400/500 answer built from a library error"""
    error: str
    message: str
    details: dict = Field(default_factory=dict)

    @classmethod
    def from_exception(cls, exc):
        if hasattr(exc, "to_dict"):
            return cls(**exc.to_dict())
        return cls(error=type(exc).__name__, message=str(exc))
