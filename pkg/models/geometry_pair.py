from dataclasses import dataclass

from models.domain import Domain
from models.regularizer import Regularizer
from models.reparam import Reparameterization


@dataclass(frozen=True)
class GeometryPair:
    """
    A mirror geometry (R, K) together with the reparameterization q : K' -> K
    under which gradient descent on K' shadows mirror descent on K.

    The constants G and D are estimated by sampling, together with the loss
    bound G_F, in ExperimentService.estimate_constants.
    """

    name: str
    regularizer: Regularizer
    reparam: Reparameterization
    primal_domain: Domain
    reparam_domain: Domain

    @property
    def dimension(self):
        return self.primal_domain.dimension

    def to_dict(self):
        return {
            "name": self.name,
            "regularizer": self.regularizer.to_dict(),
            "reparam": self.reparam.to_dict(),
            "primal_domain": self.primal_domain.to_dict(),
            "reparam_domain": self.reparam_domain.to_dict(),
        }

    def __repr__(self):
        return f'<GeometryPair {self.name}: {self.regularizer.kind} / {self.reparam.kind}, d={self.dimension}>'
