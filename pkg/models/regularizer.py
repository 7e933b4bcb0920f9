"""
Separable regularizers R(x) = sum_i r(x_i) and their links
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr, xlogy

from errors import NumericalFailure, RejectedInputError


class Regularizer(ABC):
    """
    Coordinate-separable, strictly convex regularizer.

    All methods are elementwise over the last axis, so they accept a single
    point of shape (d,) or a batch of shape (n, d).
    """

    kind = "abstract"
    # Log-based regularizers are only defined on the open positive orthant
    requires_positive = True

    @abstractmethod
    def value(self, x):
        """R(x), summed over the last axis"""

    @abstractmethod
    def link(self, x):
        """Gradient map x -> grad R(x)"""

    @abstractmethod
    def link_inverse(self, g):
        """(grad R)^{-1}(g); raises NumericalFailure outside the link range"""

    @abstractmethod
    def hessian_diag(self, x):
        """Diagonal of the Hessian"""

    @abstractmethod
    def third_derivative(self, x):
        """r'''(x_i) per coordinate"""

    def link_inverse_clamped(self, g):
        """Inverse link that maps arguments beyond the range to the boundary value 0"""
        return self.link_inverse(g)

    def in_link_range(self, g):
        return np.ones(np.shape(g), dtype=bool)

    def check_admissible(self, x, name="x"):
        x = np.asarray(x, dtype=float)
        if self.requires_positive and np.any(x <= 0):
            raise RejectedInputError(
                f"{self.kind} regularizer needs strictly positive {name}",
                {"min_entry": float(np.min(x))},
            )
        return x

    def bregman(self, x, y):
        """R(x) - R(y) - <grad R(y), x - y>"""
        return self.value(x) - self.value(y) - np.sum(self.link(y) * (x - y), axis=-1)

    def _raise_out_of_range(self, g):
        bad = ~self.in_link_range(g)
        raise NumericalFailure(
            f"Link inversion out of range for {self.kind}; reduce the step size",
            {"coordinates": np.flatnonzero(np.ravel(bad)).tolist()},
        )

    def to_dict(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f'<Regularizer {self.kind}>'


@dataclass(frozen=True, repr=False)
class NegativeEntropy(Regularizer):
    """R(x) = sum x ln x with link 1 + ln x"""

    kind = "negative-entropy"

    def value(self, x):
        return np.sum(xlogy(x, x), axis=-1)

    def link(self, x):
        return 1.0 + np.log(x)

    def link_inverse(self, g):
        return np.exp(np.asarray(g, dtype=float) - 1.0)

    def hessian_diag(self, x):
        return 1.0 / np.asarray(x, dtype=float)

    def third_derivative(self, x):
        return -1.0 / np.square(x)

    def bregman(self, x, y):
        # Generalized KL; rel_entr keeps 0 ln 0 = 0 at the boundary
        return np.sum(rel_entr(x, y) - x + y, axis=-1)


@dataclass(frozen=True, repr=False)
class LogBarrier(Regularizer):
    """R(x) = -sum ln x with link -1/x"""

    kind = "log-barrier"

    def value(self, x):
        return -np.sum(np.log(x), axis=-1)

    def link(self, x):
        return -1.0 / np.asarray(x, dtype=float)

    def in_link_range(self, g):
        return np.asarray(g) < 0

    def link_inverse(self, g):
        g = np.asarray(g, dtype=float)
        if not np.all(self.in_link_range(g)):
            self._raise_out_of_range(g)
        return -1.0 / g

    def hessian_diag(self, x):
        return 1.0 / np.square(x)

    def third_derivative(self, x):
        return -2.0 / np.power(x, 3)


@dataclass(frozen=True, repr=False)
class Tempered(Regularizer):
    """
    Tempered regularizer with link log_tau(x) = (x^{1-tau} - 1) / (1 - tau).

    Hessian is x^{-tau}, so it is 1-strongly convex wherever x <= 1.
    """

    tau: float = 0.5
    kind = "tempered"

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.0:
            raise RejectedInputError(f"tempered tau must lie in [0, 1), got {self.tau}")

    @property
    def _one_minus_tau(self):
        return 1.0 - self.tau

    def value(self, x):
        a = self._one_minus_tau
        return np.sum(np.power(x, 2.0 - self.tau) / (a * (2.0 - self.tau)) - x / a, axis=-1)

    def link(self, x):
        a = self._one_minus_tau
        return (np.power(x, a) - 1.0) / a

    def in_link_range(self, g):
        return 1.0 + self._one_minus_tau * np.asarray(g) > 0

    def link_inverse(self, g):
        g = np.asarray(g, dtype=float)
        if not np.all(self.in_link_range(g)):
            self._raise_out_of_range(g)
        a = self._one_minus_tau
        return np.power(1.0 + a * g, 1.0 / a)

    def link_inverse_clamped(self, g):
        a = self._one_minus_tau
        base = np.maximum(1.0 + a * np.asarray(g, dtype=float), 0.0)
        return np.power(base, 1.0 / a)

    def hessian_diag(self, x):
        return np.power(x, -self.tau)

    def third_derivative(self, x):
        return -self.tau * np.power(x, -self.tau - 1.0)

    def to_dict(self):
        return {"kind": self.kind, "tau": self.tau}


@dataclass(frozen=True, repr=False)
class Euclidean(Regularizer):
    """R(x) = ||x||^2 / 2"""

    kind = "euclidean"
    requires_positive = False

    def value(self, x):
        return 0.5 * np.sum(np.square(x), axis=-1)

    def link(self, x):
        return np.asarray(x, dtype=float)

    def link_inverse(self, g):
        return np.asarray(g, dtype=float)

    def hessian_diag(self, x):
        return np.ones(np.shape(x))

    def third_derivative(self, x):
        return np.zeros(np.shape(x))

    def bregman(self, x, y):
        return 0.5 * np.sum(np.square(np.asarray(x) - np.asarray(y)), axis=-1)


def make_regularizer(kind, tau=None):
    """Build a regularizer from its wire name"""
    if kind in ("negative-entropy", "entropy"):
        return NegativeEntropy()
    if kind == "log-barrier":
        return LogBarrier()
    if kind == "tempered":
        return Tempered(tau=0.5 if tau is None else float(tau))
    if kind == "euclidean":
        return Euclidean()
    raise RejectedInputError(f"Unknown regularizer kind: {kind}")
