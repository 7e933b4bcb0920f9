from dataclasses import dataclass, replace

import numpy as np

from errors import RejectedInputError
from models.geometry_pair import GeometryPair

PERTURBATION_RULES = ("zero", "eta", "eta^1.5", "eta^2")
PERTURBATION_MODES = ("uniform", "adversarial")

_RULE_EXPONENTS = {"eta": 1.0, "eta^1.5": 1.5, "eta^2": 2.0}


@dataclass(frozen=True, eq=False)
class OmdState:
    """Primal iterate x_t of online mirror descent"""

    x: np.ndarray
    pair: GeometryPair
    eta: float
    t: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise RejectedInputError(f"Step size must be positive, got {self.eta}")

    def advance(self, x):
        return replace(self, x=x, t=self.t + 1)

    def __repr__(self):
        return f'<OmdState t={self.t} eta={self.eta:g} pair={self.pair.name}>'


@dataclass(frozen=True, eq=False)
class OgdState:
    """Reparameterized iterate u_t; the primal play is q(u_t)"""

    u: np.ndarray
    pair: GeometryPair
    eta: float
    t: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise RejectedInputError(f"Step size must be positive, got {self.eta}")

    @property
    def x(self):
        return self.pair.reparam.forward(self.u)

    def advance(self, u):
        return replace(self, u=u, t=self.t + 1)

    def __repr__(self):
        return f'<OgdState t={self.t} eta={self.eta:g} pair={self.pair.name}>'


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """
    Magnitude rule C(eta) = kappa * eta^k for the perturbed learner.

    mode "uniform" draws r_t uniformly in the C-ball; "adversarial" pushes
    along the current loss gradient with norm exactly C.
    """

    rule: str = "zero"
    kappa: float = 0.1
    mode: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.rule not in PERTURBATION_RULES:
            raise RejectedInputError(f"Unknown perturbation rule: {self.rule}")
        if self.mode not in PERTURBATION_MODES:
            raise RejectedInputError(f"Unknown perturbation mode: {self.mode}")
        if self.kappa < 0:
            raise RejectedInputError("Perturbation scale must be nonnegative")

    def magnitude(self, eta):
        if self.rule == "zero":
            return 0.0
        return self.kappa * eta ** _RULE_EXPONENTS[self.rule]

    def to_dict(self):
        return {"rule": self.rule, "kappa": self.kappa, "mode": self.mode, "seed": self.seed}
