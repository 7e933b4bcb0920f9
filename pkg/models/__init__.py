"""
Models package for the mirror-reparam experiments
"""

from .regularizer import Regularizer, NegativeEntropy, LogBarrier, Tempered, Euclidean
from .reparam import Reparameterization, QuarterSquare, Exponential, Power, Identity
from .domain import Domain, SmoothedSimplex, Box, PositiveLpBall, ProjectionResult
from .geometry_pair import GeometryPair
from .loss import LossOracle, LinearLoss, QuadraticLoss, ReparameterizedLoss, AggregateLoss, LossSequence
from .learner_state import OmdState, OgdState, PerturbationSpec
from .trace import StepRecord, RunTrace
from .scalar_map import ScalarMap, ReconstructedLink

__all__ = [
    'Regularizer', 'NegativeEntropy', 'LogBarrier', 'Tempered', 'Euclidean',
    'Reparameterization', 'QuarterSquare', 'Exponential', 'Power', 'Identity',
    'Domain', 'SmoothedSimplex', 'Box', 'PositiveLpBall', 'ProjectionResult',
    'GeometryPair',
    'LossOracle', 'LinearLoss', 'QuadraticLoss', 'ReparameterizedLoss', 'AggregateLoss', 'LossSequence',
    'OmdState', 'OgdState', 'PerturbationSpec',
    'StepRecord', 'RunTrace',
    'ScalarMap', 'ReconstructedLink',
]
