"""
HTTP front end for the mirror descent / reparameterized OGD experiments
"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from config import Config
from errors import ExperimentError
from routers import experiment_router
from schemas import ErrorResponse, HealthResponse

logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

SERVICE_NAME = "mirror-reparam"
VERSION = "1.0.0"
API_PREFIX = "/api/experiments"

ENDPOINTS = ("check-geometry", "closeness", "run", "constants", "reconstruct", "pairs")


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(
        f"{SERVICE_NAME} {VERSION} up (eps_min={Config.EPS_MIN}, d={Config.DIMENSION}, "
        f"seed={Config.DEFAULT_SEED})"
    )
    yield
    logger.info(f"{SERVICE_NAME} stopped")


app = FastAPI(
    title="Mirror Reparam Experiments",
    description="""
    Batch experiments comparing online mirror descent with gradient descent
    on a reparameterized domain.

    Requests are stateless: each one carries a full run configuration and
    gets back the same report the command line writes to disk.
    """,
    version=VERSION,
    lifespan=lifespan,
)


@app.exception_handler(RequestValidationError)
def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Flatten pydantic errors into 'field: message' strings"""
    details = [
        f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
        for error in exc.errors()
    ]
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"error": "Validation error", "details": details},
    )


@app.exception_handler(ExperimentError)
def experiment_exception_handler(request: Request, exc: ExperimentError):
    """Library errors that escape a router; numerical ones are server-side"""
    code = status.HTTP_500_INTERNAL_SERVER_ERROR if exc.exit_code == 2 else status.HTTP_400_BAD_REQUEST
    return JSONResponse(status_code=code, content=ErrorResponse.from_exception(exc).model_dump())


@app.exception_handler(Exception)
def general_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception on {request.url.path}: {exc}", exc_info=True)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=ErrorResponse(error="InternalServerError", message="Internal server error").model_dump(),
    )


app.include_router(experiment_router, prefix=API_PREFIX, tags=["Experiments"])


@app.get("/health", response_model=HealthResponse, tags=["Health"], summary="Liveness check")
def health_check():
    return {"status": "healthy", "service": SERVICE_NAME}


@app.get("/", tags=["Info"], summary="Service index")
def root():
    """Name, version and the experiment endpoints"""
    return {
        "service": app.title,
        "version": VERSION,
        "documentation": {"swagger": app.docs_url, "redoc": app.redoc_url},
        "endpoints": {name.replace("-", "_"): f"{API_PREFIX}/{name}" for name in ENDPOINTS},
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("app:app", host=Config.SERVICE_HOST, port=Config.SERVICE_PORT, reload=Config.DEBUG)
