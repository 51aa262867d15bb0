"""Least-squares fit of ``log E_n = c0 + c1 n + c2 log n`` and campaign config."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import DiscreteChannel, mutual_information
from .errors import NonPositiveMean, RateBelowMI
from .simulator import MODES

MIN_TRIALS = 100


@dataclass(frozen=True)
class ScalingFit:
    n_grid: tuple
    log_means: tuple
    c0: float
    c1: float
    c2: float
    residual_rms: float
    condition_number: float
    predicted_c1: float | None = None
    predicted_c2: float | None = None
    target: str | None = None

    @property
    def coefficients(self):
        return (self.c0, self.c1, self.c2)

    @property
    def c1_relative_error(self):
        if self.predicted_c1 is None or self.predicted_c1 == 0:
            return None
        return abs(self.c1 - self.predicted_c1) / abs(self.predicted_c1)

    @property
    def c2_error(self):
        if self.predicted_c2 is None:
            return None
        return abs(self.c2 - self.predicted_c2)

    def predict(self, n):
        n = np.asarray(n, dtype=np.float64)
        return self.c0 + self.c1 * n + self.c2 * np.log(n)

    def to_dict(self):
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        d["log_means"] = list(self.log_means)
        d["c1_relative_error"] = self.c1_relative_error
        d["c2_error"] = self.c2_error
        return d


def fit_scaling(n_grid, means, predicted_c1=None, predicted_c2=None, target=None) -> ScalingFit:
    """Solve the 3x3 normal equations for ``(c0, c1, c2)``."""
    n = np.asarray(n_grid, dtype=np.float64)
    m = np.asarray(means, dtype=np.float64)
    if n.shape != m.shape or n.ndim != 1:
        raise ValueError("n_grid and means must be 1-D of equal length")
    if n.size < 4:
        raise ValueError("need at least 4 grid points")
    if np.any(n <= 0):
        raise ValueError("blocklengths must be positive")
    bad = np.flatnonzero(~(m > 0))
    if bad.size:
        raise NonPositiveMean(f"mean at n = {n[bad[0]]:g} is {m[bad[0]]:g}; increase trials")
    y = np.log(m)
    X = np.column_stack([np.ones_like(n), n, np.log(n)])
    A = X.T @ X
    c = np.linalg.solve(A, X.T @ y)
    resid = y - X @ c
    return ScalingFit(
        n_grid=tuple(int(v) if float(v).is_integer() else float(v) for v in n),
        log_means=tuple(float(v) for v in y),
        c0=float(c[0]), c1=float(c[1]), c2=float(c[2]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        condition_number=float(np.linalg.cond(A)),
        predicted_c1=predicted_c1, predicted_c2=predicted_c2, target=target,
    )


def default_trials(n: int) -> int:
    """``max(200, 20000 / 2^n)`` trials at blocklength ``n``."""
    return max(200, 20000 // 2**n)


@dataclass(frozen=True)
class ExperimentConfig:
    channel_path: str | None
    rate: float
    n_grid: tuple
    trials: int | None = None
    mode: str = "fixed"
    master_seed: int = 0
    output_path: str | None = None
    extra: dict = field(default_factory=dict)

    def trials_for(self, n: int) -> int:
        return self.trials if self.trials is not None else default_trials(n)

    def validate(self, ch: DiscreteChannel) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.n_grid or any(int(n) < 1 for n in self.n_grid):
            raise ValueError("n grid must be nonempty positive integers")
        if self.trials is not None and self.trials < MIN_TRIALS:
            raise ValueError(f"trials must be at least {MIN_TRIALS}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        I = mutual_information(ch)
        if not self.rate > I:
            raise RateBelowMI(self.rate, I)
        if not math.isfinite(self.rate):
            raise ValueError("rate must be finite")
