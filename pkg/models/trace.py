from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class StepRecord:
    t: int
    x: np.ndarray
    loss: float
    grad_norm: float
    perturb_norm: float = 0.0
    u: Optional[np.ndarray] = None
    projection: dict = field(default_factory=dict)

    def to_row(self, with_raw):
        row = [self.t, self.loss, self.grad_norm, self.perturb_norm, *self.x.tolist()]
        if with_raw:
            row.extend(self.u.tolist())
        return row


@dataclass
class RunTrace:
    """One learner run: metadata plus one StepRecord per round"""

    pair: str
    learner: str
    eta: float
    horizon: int
    seed: int
    dimension: int
    loss_fingerprint: str
    records: List[StepRecord] = field(default_factory=list)
    perturbation: Optional[dict] = None

    def append(self, record):
        if self.records and record.t != self.records[-1].t + 1:
            raise ValueError(f"Trace steps must be consecutive, got {record.t} after {self.records[-1].t}")
        self.records.append(record)

    @property
    def complete(self):
        return len(self.records) == self.horizon

    @property
    def has_raw(self):
        return bool(self.records) and self.records[0].u is not None

    @property
    def losses(self):
        return np.array([r.loss for r in self.records])

    @property
    def iterates(self):
        return np.array([r.x for r in self.records])

    def header(self):
        cols = ["t", "loss", "grad_norm", "perturb_norm"]
        cols += [f"x_{i}" for i in range(self.dimension)]
        if self.has_raw:
            cols += [f"u_{i}" for i in range(self.dimension)]
        return cols

    def rows(self):
        with_raw = self.has_raw
        return [r.to_row(with_raw) for r in self.records]

    def metadata(self):
        return {
            "pair": self.pair,
            "learner": self.learner,
            "eta": self.eta,
            "horizon": self.horizon,
            "seed": self.seed,
            "dimension": self.dimension,
            "loss_fingerprint": self.loss_fingerprint,
            "perturbation": self.perturbation,
            "steps": len(self.records),
        }

    def __repr__(self):
        return f'<RunTrace {self.learner} on {self.pair}: {len(self.records)}/{self.horizon} steps>'
