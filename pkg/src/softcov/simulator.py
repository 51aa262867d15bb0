"""Random i.i.d. codebooks, exact induced output distributions, Monte Carlo.

Output sequences of length ``n`` are indexed in mixed radix with the first
symbol most significant, matching ``np.kron`` of per-letter vectors.  For a
given codebook, the induced distribution and its KL/TV distance to
``P_Y^{(x)n}`` are computed exactly; randomness enters only through the
codebook (and, in Poisson mode, its size).
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2_contingency

from . import kernels
from ._accel import thread_count
from .channel import DiscreteChannel, mutual_information
from .densitysum import WindowEvent
from .errors import AbsoluteContinuityViolation, EmptyCodebook, MemoryCap, RateBelowMI
from .rng import Purpose, inverse_cdf, make_cdf, stream

MAX_OUTCOMES = 2**24
HISTOGRAM_CAP = 2**22
CHUNK_CELLS = 2**22
MODES = ("fixed", "poisson")


def poisson_mean(n: int, rate: float) -> float:
    """``mu_n = 2 exp(n R)``."""
    return 2.0 * math.exp(n * rate)


def fixed_codebook_size(n: int, rate: float) -> int:
    """``M_n = round(exp(n R))``, at least one."""
    return max(1, int(round(math.exp(n * rate))))


def output_target(ch: DiscreteChannel, n: int) -> np.ndarray:
    """``P_Y^{(x)n}`` over all output sequences."""
    _check_outcomes(ch, n)
    q = np.ones(1)
    for _ in range(n):
        q = np.kron(q, ch.output_marginal)
    return q


def _check_outcomes(ch, n):
    if ch.n_outputs**n > MAX_OUTCOMES:
        raise MemoryCap(
            f"|Y|^n = {ch.n_outputs}^{n} exceeds the {MAX_OUTCOMES} outcome cap", n=n
        )


# -- codebooks ------------------------------------------------------------


@dataclass(frozen=True)
class Codebook:
    n: int
    codewords: np.ndarray  # (M, n) input indices
    seed: int

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    M = size


def _draw_codewords(ch: DiscreteChannel, n: int, size: int, rng) -> np.ndarray:
    if size < 0:
        raise ValueError("codebook size must be nonnegative")
    u = rng.random(size * n)
    return inverse_cdf(make_cdf(ch.input_dist), u).reshape(size, n).astype(np.int64)


def sample_codebook(ch: DiscreteChannel, n: int, size: int, seed: int, *key: int) -> Codebook:
    """``size`` codewords i.i.d. from ``P_X^{(x)n}`` on the stream ``(seed, key)``.

    The first ``m`` codewords do not depend on ``size``, so codebooks of
    growing size drawn with the same seed are nested.
    """
    rng = stream(seed, Purpose.CODEBOOK, *key)
    return Codebook(n, _draw_codewords(ch, n, size, rng), int(seed))


# -- induced distributions --------------------------------------------------


@dataclass(frozen=True)
class InducedDistribution:
    probabilities: np.ndarray
    n: int
    n_outputs: int

    def __post_init__(self):
        s = float(self.probabilities.sum())
        if abs(s - 1.0) > 1e-9:
            raise ValueError(f"induced distribution sums to {s}")


def _radix(nx: int, n: int) -> np.ndarray:
    return nx ** np.arange(n - 1, -1, -1, dtype=np.int64)


def _histogram(codewords: np.ndarray, nx: int, n: int) -> np.ndarray:
    idx = codewords @ _radix(nx, n)
    return np.bincount(idx, minlength=nx**n).astype(np.float64)


def induced_rows(ch: DiscreteChannel, n: int, codeword_sets) -> np.ndarray:
    """Induced distributions for several codebooks at once, shape ``(B, |Y|^n)``."""
    _check_outcomes(ch, n)
    nx = ch.n_inputs
    W = np.ascontiguousarray(ch.transition)
    for cw in codeword_sets:
        if cw.shape[0] == 0:
            raise EmptyCodebook("induced distribution needs at least one codeword")
    if nx**n <= HISTOGRAM_CAP:
        counts = np.stack([_histogram(cw, nx, n) / cw.shape[0] for cw in codeword_sets])
        return kernels.contract_rows(counts, W, n)
    return np.stack(
        [kernels.accumulate_codewords(np.ascontiguousarray(cw), W) / cw.shape[0] for cw in codeword_sets]
    )


def induced_distribution(ch: DiscreteChannel, cb: Codebook) -> InducedDistribution:
    if cb.size == 0:
        raise EmptyCodebook("induced distribution needs at least one codeword")
    p = induced_rows(ch, cb.n, [cb.codewords])[0]
    return InducedDistribution(p, cb.n, ch.n_outputs)


def _target_for(induced: InducedDistribution, ch: DiscreteChannel, n):
    n = induced.n if n is None else n
    q = output_target(ch, n)
    if q.size != induced.probabilities.size:
        raise ValueError("induced distribution and target have different sizes")
    if np.any((induced.probabilities > 0) & (q <= 0)):
        raise AbsoluteContinuityViolation("induced mass outside the target support")
    return q


def exact_kl(induced: InducedDistribution, ch: DiscreteChannel, n: int | None = None) -> float:
    """``D(induced || P_Y^{(x)n})`` in nats, with ``0 log 0 = 0``."""
    q = _target_for(induced, ch, n)
    kl, _ = kernels.kl_tv_rows(induced.probabilities[None, :], q, np.log(q))
    return max(float(kl[0]), 0.0)


def exact_tv(induced: InducedDistribution, ch: DiscreteChannel, n: int | None = None) -> float:
    """Half the L1 distance to ``P_Y^{(x)n}``."""
    q = _target_for(induced, ch, n)
    _, tv = kernels.kl_tv_rows(induced.probabilities[None, :], q, np.log(q))
    return float(tv[0])


# -- Monte Carlo over codebooks ------------------------------------------------


@dataclass(frozen=True)
class TrialBatch:
    n: int
    rate: float
    mode: str
    master_seed: int
    codebook_sizes: np.ndarray
    per_trial_kl: np.ndarray
    per_trial_tv: np.ndarray
    zero_draws: int = 0

    @property
    def trials(self) -> int:
        return self.per_trial_kl.size

    @property
    def mean_kl(self) -> float:
        return float(np.mean(self.per_trial_kl))

    @property
    def mean_tv(self) -> float:
        return float(np.mean(self.per_trial_tv))

    @property
    def stderr_kl(self) -> float:
        return _stderr(self.per_trial_kl)

    @property
    def stderr_tv(self) -> float:
        return _stderr(self.per_trial_tv)

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "rate", "mode", "trial", "M", "kl_nats", "tv"])
        for t in range(self.trials):
            w.writerow([
                self.n, "%.17g" % self.rate, self.mode, t, int(self.codebook_sizes[t]),
                "%.17g" % self.per_trial_kl[t], "%.17g" % self.per_trial_tv[t],
            ])


def _stderr(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        return float("nan")
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def _trial_codewords(ch, n, rate, mode, seed, trial):
    """Codewords of one trial and the number of rejected zero-size draws."""
    zeros = 0
    if mode == "fixed":
        M = fixed_codebook_size(n, rate)
    else:
        mu = poisson_mean(n, rate)
        attempt = 0
        while True:
            M = int(stream(seed, Purpose.CODEBOOK_SIZE, n, trial, attempt).poisson(mu))
            if M >= 1:
                break
            zeros += 1
            attempt += 1
    rng = stream(seed, Purpose.CODEBOOK, n, trial)
    return _draw_codewords(ch, n, M, rng), zeros


def _chunk_size(ch, n):
    cells = max(ch.n_inputs**n if ch.n_inputs**n <= HISTOGRAM_CAP else 1, ch.n_outputs**n)
    return int(max(1, min(256, CHUNK_CELLS // cells)))


def simulate_trials(
    ch: DiscreteChannel, n: int, rate: float, trials: int, mode: str = "fixed",
    master_seed: int = 0, threads: int | None = None,
) -> TrialBatch:
    """Monte Carlo core without the rate precondition (any ``rate > 0``)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    _check_outcomes(ch, n)
    q = output_target(ch, n)
    log_q = np.log(q)
    chunk = _chunk_size(ch, n)
    bounds = [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]

    def run(span):
        a, b = span
        sets, zeros = [], 0
        for t in range(a, b):
            cw, z = _trial_codewords(ch, n, rate, mode, master_seed, t)
            sets.append(cw)
            zeros += z
        P = induced_rows(ch, n, sets)
        kl, tv = kernels.kl_tv_rows(P, q, log_q)
        return np.array([s.shape[0] for s in sets]), np.maximum(kl, 0.0), tv, zeros

    threads = thread_count() if threads is None else max(1, int(threads))
    if threads == 1 or len(bounds) == 1:
        parts = [run(s) for s in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, bounds))
    return TrialBatch(
        n=n, rate=float(rate), mode=mode, master_seed=int(master_seed),
        codebook_sizes=np.concatenate([p[0] for p in parts]),
        per_trial_kl=np.concatenate([p[1] for p in parts]),
        per_trial_tv=np.concatenate([p[2] for p in parts]),
        zero_draws=sum(p[3] for p in parts),
    )


def estimate_soft_covering(
    ch: DiscreteChannel, n: int, rate: float, trials: int, mode: str = "fixed",
    master_seed: int = 0, threads: int | None = None,
) -> TrialBatch:
    """Exact per-codebook KL and TV over ``trials`` random codebooks.

    Fixed mode uses ``M = round(exp(nR))`` codewords; Poisson mode draws
    ``M ~ Poisson(2 exp(nR))`` per trial, conditioned on ``M >= 1`` (the
    rejected zero draws are counted in ``zero_draws``).
    """
    I = mutual_information(ch)
    if not rate > I:
        raise RateBelowMI(rate, I)
    if trials < 2:
        raise ValueError("trials must be at least 2")
    return simulate_trials(ch, n, rate, trials, mode, master_seed, threads)


def paired_divergences(ch: DiscreteChannel, n: int, m_max: int, trials: int, seed: int):
    """KL and TV of nested codebooks of sizes ``1..m_max``; arrays ``(trials, m_max)``.

    Trial ``t`` draws ``m_max`` codewords once; the size-``m`` codebook is
    its first ``m`` rows.
    """
    _check_outcomes(ch, n)
    q = output_target(ch, n)
    log_q = np.log(q)
    nx = ch.n_inputs
    W = np.ascontiguousarray(ch.transition)
    sizes = np.arange(1, m_max + 1, dtype=np.float64)[:, None]
    kl = np.empty((trials, m_max))
    tv = np.empty((trials, m_max))
    for t in range(trials):
        cw = sample_codebook(ch, n, m_max, seed, Purpose.MONOTONE, t).codewords
        if nx**n <= HISTOGRAM_CAP:
            onehot = np.zeros((m_max, nx**n))
            onehot[np.arange(m_max), cw @ _radix(nx, n)] = 1.0
            P = kernels.contract_rows(np.cumsum(onehot, axis=0) / sizes, W, n)
        else:
            P = induced_rows(ch, n, [cw[:m] for m in range(1, m_max + 1)])
        k, v = kernels.kl_tv_rows(P, q, log_q)
        kl[t], tv[t] = np.maximum(k, 0.0), v
    return kl, tv


# -- the T statistic -----------------------------------------------------------


@dataclass(frozen=True)
class TStatisticSample:
    t: float
    t1: float
    t2: float
    M: int
    y_seed: int
    codebook_seed: int


def _t_parts(ch, mu, window, counts, codewords, ys, owner):
    sums = ch.log_density[codewords, ys[owner]].sum(axis=1) if codewords.shape[0] else np.zeros(0)
    vals = np.exp(sums)
    inside = window.contains(sums)
    B = counts.size
    t1 = np.bincount(owner, weights=np.where(inside, vals, 0.0), minlength=B) / mu
    t2 = np.bincount(owner, weights=np.where(inside, 0.0, vals), minlength=B) / mu
    return t1, t2


def t_statistic_batch(
    ch: DiscreteChannel, n: int, mu: float, count: int, rng, window: WindowEvent | None = None,
    y=None,
):
    """``count`` independent draws of ``(T1, T2, M)`` from one generator.

    ``y`` fixes the output sequence; otherwise ``Y ~ P_Y^{(x)n}`` per draw.
    """
    window = WindowEvent.full() if window is None else window
    counts = rng.poisson(mu, count)
    total = int(counts.sum())
    codewords = _draw_codewords(ch, n, total, rng)
    if y is None:
        ys = inverse_cdf(make_cdf(ch.output_marginal), rng.random(count * n)).reshape(count, n)
    else:
        ys = np.broadcast_to(np.asarray(y, dtype=np.int64), (count, n))
    owner = np.repeat(np.arange(count), counts)
    t1, t2 = _t_parts(ch, mu, window, counts, codewords, ys, owner)
    return t1, t2, counts


def sample_t_statistic(
    ch: DiscreteChannel, n: int, rate: float, window: WindowEvent | None = None,
    codebook_seed: int = 0, y_seed: int = 0,
) -> TStatisticSample:
    """One draw of ``T = (1/mu) sum_k exp(i(X(k); Y))`` split by ``window``.

    ``T1`` collects codewords whose density sum lies in the window, ``T2``
    the rest; without a window ``T1 = T``.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    window = WindowEvent.full() if window is None else window
    mu = poisson_mean(n, rate)
    M = int(stream(codebook_seed, Purpose.CODEBOOK_SIZE).poisson(mu))
    cw = _draw_codewords(ch, n, M, stream(codebook_seed, Purpose.CODEBOOK))
    y = inverse_cdf(make_cdf(ch.output_marginal), stream(y_seed, Purpose.OUTPUT).random(n))
    sums = kernels.density_sums(cw, y.astype(np.int64), ch.log_density)
    inside = window.contains(sums)
    vals = np.exp(sums)
    t1 = float(vals[inside].sum() / mu)
    t2 = float(vals[~inside].sum() / mu)
    return TStatisticSample(t1 + t2, t1, t2, M, int(y_seed), int(codebook_seed))


def _t_chunk(mu):
    return int(max(1, min(4096, 2**21 // max(1, math.ceil(mu)))))


def t_statistic_samples(
    ch: DiscreteChannel, n: int, rate: float, samples: int, master_seed: int = 0,
    window: WindowEvent | None = None, y=None, purpose: int = Purpose.T_CODEBOOK,
):
    """``samples`` draws of ``(T1, T2, M)`` in fixed-size chunks with their own streams."""
    mu = poisson_mean(n, rate)
    chunk = _t_chunk(mu)
    parts = []
    for c, a in enumerate(range(0, samples, chunk)):
        rng = stream(master_seed, purpose, n, c)
        parts.append(t_statistic_batch(ch, n, mu, min(chunk, samples - a), rng, window, y))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


@dataclass(frozen=True)
class TFunctionals:
    mean_t_log_t: float
    stderr_t_log_t: float
    mean_abs_dev: float
    stderr_abs_dev: float
    mean_t: float
    stderr_t: float
    samples: int


def _xlogx(t):
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)


def estimate_t_functionals(
    ch: DiscreteChannel, n: int, rate: float, trials: int, master_seed: int = 0
) -> TFunctionals:
    """Monte Carlo ``E[T log T]`` and ``E|T - 1|`` (``0 log 0 = 0``)."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    t1, t2, _ = t_statistic_samples(ch, n, rate, trials, master_seed)
    t = t1 + t2
    tl = _xlogx(t)
    ad = np.abs(t - 1.0)
    return TFunctionals(
        float(tl.mean()), _stderr(tl), float(ad.mean()), _stderr(ad),
        float(t.mean()), _stderr(t), int(trials),
    )


@dataclass(frozen=True)
class ThinningResult:
    pearson_r: float
    chi_square_p: float
    samples: int
    skipped: bool = False
    degenerate_bin: bool = False
    table: np.ndarray | None = field(default=None, repr=False)


def _quantile_bins(v, k=4):
    edges = np.unique(np.quantile(v, np.arange(1, k) / k))
    return np.searchsorted(edges, v, side="right")


def thinning_independence_check(
    ch: DiscreteChannel, n: int, rate: float, y, window: WindowEvent, samples: int,
    seed: int = 0,
) -> ThinningResult:
    """Correlation and chi-square independence test of ``(T1, T2)`` given ``Y = y``.

    Bins are the 4x4 quantile grid; ties that collapse quantiles merge bins
    and empty rows or columns are dropped (``degenerate_bin``).  A window
    covering everything makes ``T2 = 0`` and the check is skipped.
    """
    if samples < 10_000:
        raise ValueError("thinning check needs at least 1e4 samples")
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"y must have length {n}")
    if window.is_full:
        return ThinningResult(float("nan"), float("nan"), samples, skipped=True)
    t1, t2, _ = t_statistic_samples(ch, n, rate, samples, seed, window, y, Purpose.THINNING)
    if np.ptp(t1) == 0 or np.ptp(t2) == 0:
        return ThinningResult(float("nan"), float("nan"), samples, skipped=True, degenerate_bin=True)
    r = float(np.corrcoef(t1, t2)[0, 1])
    a, b = _quantile_bins(t1), _quantile_bins(t2)
    table = np.zeros((4, 4), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    full = table.copy()
    degenerate = bool(np.any(table.sum(axis=1) == 0) or np.any(table.sum(axis=0) == 0))
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return ThinningResult(r, float("nan"), samples, degenerate_bin=True, table=full)
    p = float(chi2_contingency(table, correction=False)[1])
    return ThinningResult(r, p, samples, degenerate_bin=degenerate, table=full)
