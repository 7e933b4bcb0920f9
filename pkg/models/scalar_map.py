"""
One coordinate q_i of a diagonal reparameterization, and the link rebuilt from it
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class ScalarMap:
    """q_i on [lower, upper] with its first two derivatives and inverse"""

    name: str
    forward: Callable
    derivative: Callable
    second_derivative: Callable
    lower: float
    upper: float
    inverse: Optional[Callable] = None
    constant: float = 0.0

    @classmethod
    def from_reparam(cls, reparam, lower, upper, constant=0.0):
        """Restrict a separable reparameterization to one coordinate interval"""
        return cls(
            name=reparam.kind,
            forward=lambda u: reparam.forward(np.asarray(u, dtype=float)),
            derivative=lambda u: reparam.jacobian_diag(np.asarray(u, dtype=float)),
            second_derivative=lambda u: reparam.second_derivative(np.asarray(u, dtype=float)),
            inverse=lambda x: reparam.inverse(np.asarray(x, dtype=float)),
            lower=float(lower),
            upper=float(upper),
            constant=float(constant),
        )

    def with_constant(self, constant):
        return ScalarMap(
            name=self.name,
            forward=self.forward,
            derivative=self.derivative,
            second_derivative=self.second_derivative,
            inverse=self.inverse,
            lower=self.lower,
            upper=self.upper,
            constant=float(constant),
        )

    def image(self):
        """Interval q([lower, upper]) for monotone q"""
        a, b = float(self.forward(self.lower)), float(self.forward(self.upper))
        return min(a, b), max(a, b)

    def __repr__(self):
        return f'<ScalarMap {self.name} on [{self.lower:g}, {self.upper:g}]>'


@dataclass(frozen=True)
class ReconstructedLink:
    """Tabulated R~'(u) with knot slopes R~''(u) and the interpolant through them"""

    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    rule: str
    interpolant: object

    def __call__(self, u):
        return self.interpolant(u)

    def derivative(self, u):
        return self.interpolant.derivative()(u)

    @property
    def max_spacing(self):
        return float(np.max(np.diff(self.grid)))

    def __repr__(self):
        return f'<ReconstructedLink {self.rule}: {self.grid.size} knots on [{self.grid[0]:g}, {self.grid[-1]:g}]>'
