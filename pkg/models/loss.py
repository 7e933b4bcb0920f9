"""
Loss oracles f_t and the sequences an adversary plays
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np


class LossOracle(ABC):
    """Convex loss with value and (sub-)gradient access"""

    kind = "abstract"

    @abstractmethod
    def value_batch(self, X):
        """Values at each row of X"""

    @abstractmethod
    def gradient_batch(self, X):
        """Gradients at each row of X"""

    def value(self, x):
        return float(self.value_batch(np.asarray(x, dtype=float)[None, :])[0])

    def gradient(self, x):
        return self.gradient_batch(np.asarray(x, dtype=float)[None, :])[0]

    def parameters(self):
        """Arrays that define the oracle, used for sequence fingerprints"""
        return ()

    def __repr__(self):
        return f'<LossOracle {self.kind}>'


@dataclass(frozen=True, repr=False, eq=False)
class LinearLoss(LossOracle):
    """f(x) = c . x"""

    c: np.ndarray
    kind = "linear"

    def value_batch(self, X):
        return np.asarray(X, dtype=float) @ self.c

    def gradient_batch(self, X):
        return np.broadcast_to(self.c, np.shape(X)).copy()

    def parameters(self):
        return (self.c,)


@dataclass(frozen=True, repr=False, eq=False)
class QuadraticLoss(LossOracle):
    """f(x) = (a . x - b)^2"""

    a: np.ndarray
    b: float
    kind = "quadratic"

    def value_batch(self, X):
        residual = np.asarray(X, dtype=float) @ self.a - self.b
        return residual * residual

    def gradient_batch(self, X):
        residual = np.asarray(X, dtype=float) @ self.a - self.b
        return 2.0 * residual[:, None] * self.a[None, :]

    def parameters(self):
        return (self.a, np.array([self.b]))


@dataclass(frozen=True, repr=False, eq=False)
class ReparameterizedLoss(LossOracle):
    """f~(u) = f(q(u)), non-convex in general, with gradient J_q(u) grad f(q(u))"""

    inner: LossOracle
    reparam: object
    kind = "reparameterized"

    def value_batch(self, U):
        return self.inner.value_batch(self.reparam.forward(U))

    def gradient_batch(self, U):
        U = np.asarray(U, dtype=float)
        return self.reparam.jacobian_diag(U) * self.inner.gradient_batch(self.reparam.forward(U))

    def parameters(self):
        return self.inner.parameters()


@dataclass(frozen=True, repr=False, eq=False)
class AggregateLoss(LossOracle):
    """
    Closed form of a sum of linear and quadratic losses:
    F(x) = x'Qx + l'x + const.
    """

    quadratic: np.ndarray
    linear: np.ndarray
    constant: float
    kind = "aggregate"

    def value_batch(self, X):
        X = np.asarray(X, dtype=float)
        return np.einsum("ni,ij,nj->n", X, self.quadratic, X) + X @ self.linear + self.constant

    def gradient_batch(self, X):
        X = np.asarray(X, dtype=float)
        return 2.0 * X @ self.quadratic + self.linear[None, :]

    def scaled(self, factor):
        return AggregateLoss(self.quadratic * factor, self.linear * factor, self.constant * factor)


@dataclass(frozen=True, eq=False)
class LossSequence:
    """Materialized f_1..f_T with the generator metadata that reproduces it"""

    kind: str
    horizon: int
    grad_bound: float
    seed: int
    oracles: tuple = field(repr=False)

    def __len__(self):
        return len(self.oracles)

    def __getitem__(self, t):
        """Oracle for round t, counted from 1"""
        return self.oracles[t - 1]

    def __iter__(self):
        return iter(self.oracles)

    @property
    def fingerprint(self):
        """sha256 over the kind and every oracle's parameters"""
        digest = hashlib.sha256(self.kind.encode())
        for oracle in self.oracles:
            digest.update(oracle.kind.encode())
            for array in oracle.parameters():
                digest.update(np.ascontiguousarray(array, dtype=np.float64).tobytes())
        return digest.hexdigest()

    def to_dict(self):
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "grad_bound": self.grad_bound,
            "seed": self.seed,
            "fingerprint": self.fingerprint,
        }
