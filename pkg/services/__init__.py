from services.experiment_service import ExperimentService
from services.geometry_service import GeometryService
from services.learner_service import LearnerService
from services.loss_service import LossService
from services.projection_service import ProjectionService
from services.reconstruct_service import ReconstructService
from services.report_service import ReportService

__all__ = [
    'ExperimentService',
    'GeometryService',
    'LearnerService',
    'LossService',
    'ProjectionService',
    'ReconstructService',
    'ReportService',
]
