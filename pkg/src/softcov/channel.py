"""Finite discrete memoryless channels and their information density.

All quantities are in nats.  A channel is stored after pruning: inputs with
zero probability and outputs with zero marginal are dropped, so every
expectation below runs over a support where ``log P_Y > -inf``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ChannelError,
    ChannelFileError,
    DimensionMismatch,
    EmptyAlphabet,
    NonStochastic,
)

SUM_TOL = 1e-9
SINGULAR_TOL = 1e-12
_RENORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteChannel:
    """The triple ``(P_X, P_{Y|X}, P_Y)`` after validation and pruning.

    ``input_labels`` / ``output_labels`` map pruned indices back to the
    indices of the description the channel was built from.
    """

    input_dist: np.ndarray
    transition: np.ndarray
    output_marginal: np.ndarray
    input_labels: np.ndarray
    output_labels: np.ndarray

    @property
    def n_inputs(self) -> int:
        return self.input_dist.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.output_marginal.shape[0]

    @cached_property
    def joint(self) -> np.ndarray:
        return self.input_dist[:, None] * self.transition

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean mask of (x, y) pairs with positive joint mass."""
        return self.transition > 0

    @cached_property
    def log_density(self) -> np.ndarray:
        """``log P(y|x) - log P(y)``, ``-inf`` off the support."""
        with np.errstate(divide="ignore"):
            lt = np.log(self.transition)
        out = lt - np.log(self.output_marginal)[None, :]
        out[~self.support] = -np.inf
        out.setflags(write=False)
        return out

    @cached_property
    def log_joint(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            out = np.log(self.input_dist)[:, None] + np.log(self.transition)
        out.setflags(write=False)
        return out

    def __eq__(self, other):
        if not isinstance(other, DiscreteChannel):
            return NotImplemented
        return (
            np.array_equal(self.input_dist, other.input_dist)
            and np.array_equal(self.transition, other.transition)
            and np.array_equal(self.output_marginal, other.output_marginal)
        )

    __hash__ = None

    def to_dict(self):
        return {
            "input_dist": self.input_dist.tolist(),
            "transition": self.transition.tolist(),
        }


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _normalize(v, sum_tol, what, row=None):
    s = float(v.sum())
    if abs(s - 1.0) > sum_tol:
        where = what if row is None else f"{what} row {row}"
        raise NonStochastic(
            f"{where} sums to {s:.17g}, off by more than {sum_tol:g}",
            field="transition" if row is not None else what,
            row=row,
        )
    # leave already-normalized vectors bit-identical (pruning idempotence)
    if abs(s - 1.0) > _RENORM_TOL:
        v = v / s
    return v


def build_channel(input_dist, transition, *, sum_tol: float = SUM_TOL) -> DiscreteChannel:
    """Validate, normalize and prune a channel description."""
    px = np.asarray(input_dist, dtype=np.float64)
    W = np.asarray(transition, dtype=np.float64)
    if px.ndim != 1:
        raise DimensionMismatch("input_dist must be a vector", field="input_dist")
    if W.ndim != 2:
        raise DimensionMismatch("transition must be a matrix", field="transition")
    if px.size == 0 or W.shape[1] == 0:
        raise EmptyAlphabet("empty input or output alphabet")
    if W.shape[0] != px.size:
        raise DimensionMismatch(
            f"transition has {W.shape[0]} rows but input_dist has {px.size} entries",
            field="transition",
        )
    if not np.all(np.isfinite(px)) or np.any(px < 0):
        raise NonStochastic("input_dist has negative or non-finite entries", field="input_dist")
    for i, row in enumerate(W):
        if not np.all(np.isfinite(row)) or np.any(row < 0):
            raise NonStochastic(
                f"transition row {i} has negative or non-finite entries", field="transition", row=i
            )

    if not np.any(px > 0):
        raise EmptyAlphabet("all inputs have zero probability", field="input_dist")
    px = _normalize(px, sum_tol, "input_dist")
    W = np.array([_normalize(row, sum_tol, "transition", row=i) for i, row in enumerate(W)])

    keep_x = np.flatnonzero(px > 0)
    if keep_x.size == 0:
        raise EmptyAlphabet("all inputs have zero probability")
    px = px[keep_x]
    W = W[keep_x]
    # renormalize after pruning only if pruning changed the total
    px = _normalize(px, sum_tol, "input_dist")

    # column sums row by row, so dropping empty columns cannot change rounding
    py = (px[:, None] * W).sum(axis=0)
    keep_y = np.flatnonzero(py > 0)
    W = W[:, keep_y]
    py = py[keep_y]
    # transition rows may lose mass only on outputs unreachable from any input
    assert np.all(np.abs(W.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all((W > 0) <= (py[None, :] > 0))

    return DiscreteChannel(
        input_dist=_frozen(px),
        transition=_frozen(W),
        output_marginal=_frozen(py),
        input_labels=_frozen(keep_x).astype(np.int64),
        output_labels=_frozen(keep_y).astype(np.int64),
    )


# -- stock channels --------------------------------------------------------


def binary_symmetric(p: float, input_dist=(0.5, 0.5)) -> DiscreteChannel:
    return build_channel(input_dist, [[1 - p, p], [p, 1 - p]])


def binary_erasure(e: float, input_dist=(0.5, 0.5)) -> DiscreteChannel:
    """Outputs are ordered (0, 1, erasure)."""
    return build_channel(input_dist, [[1 - e, 0.0, e], [0.0, 1 - e, e]])


def noiseless(k: int = 2, input_dist=None) -> DiscreteChannel:
    if input_dist is None:
        input_dist = np.full(k, 1.0 / k)
    return build_channel(input_dist, np.eye(k))


def product_channel(input_dist, output_dist) -> DiscreteChannel:
    """Channel whose output ignores the input: ``P_{Y|X} = P_Y``."""
    q = np.asarray(output_dist, dtype=np.float64)
    px = np.asarray(input_dist, dtype=np.float64)
    return build_channel(px, np.tile(q, (px.size, 1)))


# -- information density ---------------------------------------------------


def information_density(ch: DiscreteChannel, x: int, y: int) -> float:
    """``log(P(y|x)/P(y))``; ``-inf`` when ``P(y|x) = 0``."""
    if not (0 <= x < ch.n_inputs and 0 <= y < ch.n_outputs):
        raise IndexError(f"(x={x}, y={y}) outside {ch.n_inputs}x{ch.n_outputs} channel")
    return float(ch.log_density[x, y])


def density_law(ch: DiscreteChannel):
    """Atoms ``(values, probs)`` of the information density under ``P_XY``."""
    m = ch.support
    return ch.log_density[m].copy(), ch.joint[m].copy()


def mutual_information(ch: DiscreteChannel) -> float:
    v, p = density_law(ch)
    return max(float(np.dot(p, v)), 0.0)


def log_density_mgf(ch: DiscreteChannel, tau: float) -> float:
    """``K(tau) = log E[exp(tau * i(X;Y))]`` under ``P_XY``."""
    m = ch.support
    return float(logsumexp(ch.log_joint[m] + tau * ch.log_density[m]))


def density_mgf(ch: DiscreteChannel, tau: float) -> float:
    if tau == 0:
        return 1.0
    return float(np.exp(log_density_mgf(ch, tau)))


def tilted_density_moments(ch: DiscreteChannel, tau: float):
    """Mean and variance of ``i`` under the ``tau``-tilted joint: ``(K'(tau), K''(tau))``."""
    m = ch.support
    v = ch.log_density[m]
    lw = ch.log_joint[m] + tau * v
    w = np.exp(lw - logsumexp(lw))
    mean = float(np.dot(w, v))
    var = float(np.dot(w, (v - mean) ** 2))
    return mean, var


def density_tilted_mean(ch: DiscreteChannel, tau: float) -> float:
    return tilted_density_moments(ch, tau)[0]


@dataclass(frozen=True)
class DensityMoments:
    mean: float
    variance: float
    abs_third_central: float
    channel: DiscreteChannel

    def mgf_at(self, tau: float) -> float:
        return density_mgf(self.channel, tau)


def density_moments(ch: DiscreteChannel) -> DensityMoments:
    v, p = density_law(ch)
    mean = float(np.dot(p, v))
    c = v - mean
    return DensityMoments(
        mean=mean,
        variance=float(np.dot(p, c * c)),
        abs_third_central=float(np.dot(p, np.abs(c) ** 3)),
        channel=ch,
    )


def conditional_density_variance(ch: DiscreteChannel, y: int) -> float:
    """Variance of ``i(X;y)`` under the posterior ``P_{X|Y=y}``."""
    if ch.output_marginal[y] <= 0:
        raise ChannelError(f"output {y} has zero marginal")
    col = ch.joint[:, y] / ch.output_marginal[y]
    m = col > 0
    w = col[m] / col[m].sum()
    v = ch.log_density[m, y]
    mean = np.dot(w, v)
    return float(np.dot(w, (v - mean) ** 2))


def is_singular(ch: DiscreteChannel) -> bool:
    return all(
        conditional_density_variance(ch, y) < SINGULAR_TOL for y in range(ch.n_outputs)
    )


# -- channel files ---------------------------------------------------------


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _locate(text: str, field, row=None):
    """Best-effort line number of ``field`` (or of its ``row``-th sub-list)."""
    if field is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(field), text)
    if m is None:
        return None
    if row is None:
        return _line_of(text, m.start())
    depth = 0
    seen = -1
    for i in range(m.end(), len(text)):
        ch = text[i]
        if ch == "[":
            depth += 1
            if depth == 2:
                seen += 1
                if seen == row:
                    return _line_of(text, i)
        elif ch == "]":
            depth -= 1
            if depth == 0:
                break
    return _line_of(text, m.start())


def parse_channel(text: str, path=None) -> DiscreteChannel:
    """Parse a ``{"input_dist": [...], "transition": [[...]]}`` document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"invalid JSON: {exc.msg}", lineno=exc.lineno, path=path) from None
    if not isinstance(doc, dict):
        raise ChannelFileError("top level must be an object", lineno=1, path=path)
    for key in ("input_dist", "transition"):
        if key not in doc:
            raise ChannelFileError(f"missing key {key!r}", lineno=1, path=path)
    try:
        px = np.asarray(doc["input_dist"], dtype=np.float64)
        W = np.asarray(doc["transition"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ChannelFileError(
            "input_dist and transition must be numeric arrays (ragged rows?)",
            lineno=_locate(text, "transition"),
            path=path,
        ) from None
    try:
        return build_channel(px, W)
    except ChannelError as exc:
        raise ChannelFileError(str(exc), lineno=_locate(text, exc.field, exc.row), path=path) from exc


def load_channel(path) -> DiscreteChannel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_channel(text, path=str(path))


def dump_channel(ch: DiscreteChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ch.to_dict(), fh, indent=2)
        fh.write("\n")
