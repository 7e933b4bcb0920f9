"""
Diagonal reparameterizations x = q(u)
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from errors import RejectedInputError


class Reparameterization(ABC):
    """Coordinate-separable bijection q between K' and K"""

    kind = "abstract"

    @abstractmethod
    def forward(self, u):
        """q(u)"""

    @abstractmethod
    def inverse(self, x):
        """q^{-1}(x)"""

    @abstractmethod
    def jacobian_diag(self, u):
        """q'(u) per coordinate"""

    @abstractmethod
    def second_derivative(self, u):
        """q''(u) per coordinate"""

    @abstractmethod
    def inverse_derivative(self, x):
        """(q^{-1})'(x) per coordinate"""

    @abstractmethod
    def inverse_second_derivative(self, x):
        """(q^{-1})''(x) per coordinate"""

    def to_dict(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f'<Reparameterization {self.kind}>'


def _nonnegative(x, kind):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise RejectedInputError(
            f"{kind} inverse is only defined on the nonnegative orthant",
            {"min_entry": float(np.min(x))},
        )
    return x


@dataclass(frozen=True, repr=False)
class QuarterSquare(Reparameterization):
    """q(u) = u * u / 4, the map that turns EG into gradient descent"""

    kind = "quarter-square"

    def forward(self, u):
        u = np.asarray(u, dtype=float)
        return u * u / 4.0

    def inverse(self, x):
        return 2.0 * np.sqrt(_nonnegative(x, self.kind))

    def jacobian_diag(self, u):
        return np.asarray(u, dtype=float) / 2.0

    def second_derivative(self, u):
        return np.full(np.shape(u), 0.5)

    def inverse_derivative(self, x):
        return 1.0 / np.sqrt(x)

    def inverse_second_derivative(self, x):
        return -0.5 * np.power(x, -1.5)


@dataclass(frozen=True, repr=False)
class Exponential(Reparameterization):
    """q(u) = exp(u), paired with the log barrier"""

    kind = "exponential"

    def forward(self, u):
        return np.exp(u)

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise RejectedInputError(
                "exponential inverse needs strictly positive x",
                {"min_entry": float(np.min(x))},
            )
        return np.log(x)

    def jacobian_diag(self, u):
        return np.exp(u)

    def second_derivative(self, u):
        return np.exp(u)

    def inverse_derivative(self, x):
        return 1.0 / np.asarray(x, dtype=float)

    def inverse_second_derivative(self, x):
        return -1.0 / np.square(x)


@dataclass(frozen=True, repr=False)
class Power(Reparameterization):
    """
    q(u) = (u / k)^k with k = 2 / (2 - tau).

    The 1/k scaling makes q'(u) = x^{tau/2} exactly, which is the inverse
    square root of the tempered Hessian x^{-tau}. tau = 0 is the identity and
    tau = 1 coincides with the quarter-square map.
    """

    tau: float = 0.5
    kind = "power"

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise RejectedInputError(f"power tau must lie in [0, 1], got {self.tau}")

    @property
    def exponent(self):
        return 2.0 / (2.0 - self.tau)

    def forward(self, u):
        k = self.exponent
        return np.power(np.asarray(u, dtype=float) / k, k)

    def inverse(self, x):
        k = self.exponent
        return k * np.power(_nonnegative(x, self.kind), 1.0 / k)

    def jacobian_diag(self, u):
        k = self.exponent
        if k == 1.0:
            return np.ones(np.shape(u))
        return np.power(np.asarray(u, dtype=float) / k, k - 1.0)

    def second_derivative(self, u):
        k = self.exponent
        if k == 1.0:
            return np.zeros(np.shape(u))
        return (k - 1.0) / k * np.power(np.asarray(u, dtype=float) / k, k - 2.0)

    def inverse_derivative(self, x):
        k = self.exponent
        return np.power(np.asarray(x, dtype=float), 1.0 / k - 1.0)

    def inverse_second_derivative(self, x):
        k = self.exponent
        if k == 1.0:
            return np.zeros(np.shape(x))
        return (1.0 / k - 1.0) * np.power(np.asarray(x, dtype=float), 1.0 / k - 2.0)

    def to_dict(self):
        return {"kind": self.kind, "tau": self.tau}


@dataclass(frozen=True, repr=False)
class Identity(Reparameterization):
    kind = "identity"

    def forward(self, u):
        return np.array(u, dtype=float)

    def inverse(self, x):
        return np.array(x, dtype=float)

    def jacobian_diag(self, u):
        return np.ones(np.shape(u))

    def second_derivative(self, u):
        return np.zeros(np.shape(u))

    def inverse_derivative(self, x):
        return np.ones(np.shape(x))

    def inverse_second_derivative(self, x):
        return np.zeros(np.shape(x))


def make_reparam(kind, tau=None):
    """Build a reparameterization from its wire name"""
    if kind == "quarter-square":
        return QuarterSquare()
    if kind == "exponential":
        return Exponential()
    if kind == "power":
        return Power(tau=0.5 if tau is None else float(tau))
    if kind == "identity":
        return Identity()
    raise RejectedInputError(f"Unknown reparameterization kind: {kind}")
