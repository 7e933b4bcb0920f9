"""
FastAPI router for the batch experiment endpoints
"""

from fastapi import APIRouter, HTTPException, status
import logging

from errors import ConfigurationError, NumericalFailure, RejectedInputError
from schemas import (
    ClosenessSweepResult, ConstantsReport, ErrorResponse, GeometryCheckResponse,
    ReconstructionReport, ReconstructRequest, RunConfig, RunSummary
)
from services.experiment_service import ExperimentService
from services.geometry_service import PAIR_NAMES, GeometryService
from services.loss_service import LossService
from services.reconstruct_service import ReconstructService

logger = logging.getLogger(__name__)
router = APIRouter()


def _http_error(e):
    """Map library errors to HTTP status codes"""
    if isinstance(e, (RejectedInputError, ConfigurationError)):
        code = status.HTTP_400_BAD_REQUEST
        logger.warning(f"{type(e).__name__}: {e.message}")
    elif isinstance(e, NumericalFailure):
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
        logger.warning(f"{type(e).__name__}: {e.message}")
    else:
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
        logger.error(f"Unexpected error: {e}", exc_info=True)
    return HTTPException(status_code=code, detail=ErrorResponse.from_exception(e).model_dump())


@router.post(
    "/check-geometry",
    response_model=GeometryCheckResponse,
    summary="Verify the Jacobian/Hessian identity",
    description="Check [Hess R(q(u))]^-1 = J_q J_q^T on interior samples and the domain map for one pair."
)
def check_geometry(config: RunConfig):
    """
    Verify a geometry pair.

    - **pair**: eg, logbarrier, tempered or euclid
    - **samples**: number of interior samples
    - **seed**: sampling seed
    """
    try:
        pair = ExperimentService.pair_from_config(config)
        return ExperimentService.check_geometry([pair], config.samples, config.seed)
    except Exception as e:
        raise _http_error(e)


@router.post(
    "/closeness",
    response_model=ClosenessSweepResult,
    summary="Coupled one-step distance sweep"
)
def closeness(config: RunConfig):
    """
    Max distance between one OMD step and one reparameterized OGD step per eta,
    with the log-log slope.
    """
    try:
        pair = ExperimentService.pair_from_config(config)
        return ExperimentService.closeness_sweep(pair, config.etas, config.trials, config.seed, config.grad_bound)
    except Exception as e:
        raise _http_error(e)


@router.post(
    "/run",
    response_model=RunSummary,
    summary="Run one learner and report its regret"
)
def run(config: RunConfig):
    try:
        summary, _ = ExperimentService.run_experiment(config)
        return summary
    except Exception as e:
        raise _http_error(e)


@router.post(
    "/constants",
    response_model=ConstantsReport,
    summary="Estimate G_F, D and the G components"
)
def constants(config: RunConfig):
    try:
        pair = ExperimentService.pair_from_config(config)
        losses = LossService.make_sequence(
            config.loss, config.d, config.T, config.grad_bound, config.seed, pair.primal_domain
        )
        return ExperimentService.estimate_constants(pair, losses, config.samples, config.seed)
    except Exception as e:
        raise _http_error(e)


@router.post(
    "/reconstruct",
    response_model=ReconstructionReport,
    summary="Rebuild the regularizer of a reparameterization",
    description="Variation-of-constants reconstruction with ODE residual and Hessian certificates."
)
def reconstruct(request: ReconstructRequest):
    """
    Reconstruct and certify.

    - **map**: quarter-square, exponential, power or identity
    - **lower**, **upper**: coordinate interval
    - **known**: optional regularizer to compare Hessians against
    """
    try:
        scalar_map = ReconstructService.scalar_map(
            request.map, request.lower, request.upper, request.constant, request.tau
        )
        report, _ = ReconstructService.certify_reconstruction(
            scalar_map, request.known, request.h_max, tau=request.tau
        )
        return report
    except Exception as e:
        raise _http_error(e)


@router.get(
    "/pairs",
    response_model=dict,
    summary="List the built-in geometry pairs"
)
def list_pairs():
    pairs = {}
    for name in PAIR_NAMES:
        pairs[name] = GeometryService.build_pair(name).to_dict()
    return {"pairs": pairs}
