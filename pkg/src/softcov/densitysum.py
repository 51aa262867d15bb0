"""Exact laws of i.i.d. sums of finite-valued random variables.

``convolve_n`` builds the law of ``W_1 + ... + W_n`` by repeated merging of
atom lists; values closer than ``COALESCE_RTOL`` (relative to the magnitude of
the sums) are merged so lattice densities keep a polynomial support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .errors import SupportOverflow

MAX_SUPPORT = 10_000_000
MAX_CANDIDATES = 100_000_000
COALESCE_RTOL = 1e-14


@dataclass(frozen=True)
class DensitySumDistribution:
    """Sorted atoms ``values[i]`` with masses ``probs[i]``."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.probs.shape or self.values.ndim != 1:
            raise ValueError("values and probs must be 1-D arrays of equal length")
        if self.values.size > MAX_SUPPORT:
            raise SupportOverflow(f"support size {self.values.size} exceeds {MAX_SUPPORT}")

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def total_mass(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    def central_moment(self, k: int) -> float:
        c = self.values - self.mean()
        return float(np.dot(self.probs, c**k))

    def abs_central_moment(self, k: int) -> float:
        c = np.abs(self.values - self.mean())
        return float(np.dot(self.probs, c**k))

    def shift(self, c: float) -> "DensitySumDistribution":
        return DensitySumDistribution(self.values + c, self.probs.copy())

    def scale(self, a: float) -> "DensitySumDistribution":
        if a < 0:
            return DensitySumDistribution((self.values * a)[::-1].copy(), self.probs[::-1].copy())
        return DensitySumDistribution(self.values * a, self.probs.copy())

    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))


@dataclass(frozen=True)
class WindowEvent:
    """Closed window ``lower <= s <= upper`` on the axis of a sum."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"window lower {self.lower} exceeds upper {self.upper}")

    @classmethod
    def full(cls) -> "WindowEvent":
        return cls()

    @classmethod
    def empty(cls) -> "WindowEvent":
        return cls(math.inf, math.inf)

    def contains(self, s):
        s = np.asarray(s)
        return (s >= self.lower) & (s <= self.upper) & np.isfinite(s)

    @property
    def is_full(self) -> bool:
        return self.lower == -math.inf and self.upper == math.inf


def from_atoms(values, probs, *, drop_zero=True) -> DensitySumDistribution:
    """Sort, drop zero-mass and non-finite atoms, merge duplicates."""
    v = np.asarray(values, dtype=np.float64).ravel()
    p = np.asarray(probs, dtype=np.float64).ravel()
    keep = np.isfinite(v)
    if drop_zero:
        keep &= p > 0
    v, p = v[keep], p[keep]
    order = np.argsort(v, kind="stable")
    v, p = v[order], p[order]
    scale = float(np.abs(v).max()) if v.size else 1.0
    v, p = kernels.coalesce_sorted(v, p, COALESCE_RTOL * max(scale, 1.0))
    return DensitySumDistribution(v, p)


def _merge(cur: DensitySumDistribution, base: DensitySumDistribution, scale: float):
    ncand = cur.size * base.size
    if ncand > MAX_CANDIDATES:
        raise SupportOverflow(f"{ncand} candidate atoms exceed {MAX_CANDIDATES}")
    v = np.add.outer(cur.values, base.values).ravel()
    p = np.multiply.outer(cur.probs, base.probs).ravel()
    order = np.argsort(v, kind="stable")
    v, p = kernels.coalesce_sorted(v[order], p[order], COALESCE_RTOL * max(scale, 1.0))
    if v.size > MAX_SUPPORT:
        raise SupportOverflow(f"support size {v.size} exceeds {MAX_SUPPORT}")
    return DensitySumDistribution(v, p)


def convolve(a: DensitySumDistribution, b: DensitySumDistribution) -> DensitySumDistribution:
    scale = float(np.abs(a.values).max(initial=0.0) + np.abs(b.values).max(initial=0.0))
    return _merge(a, b, scale)


def convolve_n(base, n: int) -> DensitySumDistribution:
    """Exact law of the sum of ``n`` i.i.d. copies of ``base``.

    ``base`` is a :class:`DensitySumDistribution` or a ``(values, probs)``
    pair.  ``n = 0`` gives the point mass at zero.
    """
    if not isinstance(base, DensitySumDistribution):
        base = from_atoms(*base)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return DensitySumDistribution(np.zeros(1), np.ones(1))
    amax = float(np.abs(base.values).max(initial=0.0))
    cur = base
    for k in range(2, n + 1):
        cur = _merge(cur, base, k * amax)
    return cur


def exact_window_expectation(
    dist: DensitySumDistribution, weight_exponent: float, window: WindowEvent
) -> float:
    """``E[exp(c * S) 1{S in window}]`` summed over atoms, in log domain."""
    m = window.contains(dist.values) & (dist.probs > 0)
    if not np.any(m):
        return 0.0
    return float(np.exp(logsumexp(np.log(dist.probs[m]) + weight_exponent * dist.values[m])))


def window_probability(dist: DensitySumDistribution, window: WindowEvent) -> float:
    return exact_window_expectation(dist, 0.0, window)
