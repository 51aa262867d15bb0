"""Inequality validators and exact oracles used as ground truth.

Every quantity here is computed exactly over finite supports (convolved
density laws, enumerated codebooks, truncated Poisson sums) except the
explicitly Monte Carlo checks (monotonicity, Poisson tails).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp
from scipy.stats import poisson

from . import kernels
from .channel import DiscreteChannel, density_law, mutual_information
from .densitysum import (
    DensitySumDistribution,
    WindowEvent,
    convolve,
    convolve_n,
    exact_window_expectation,
    from_atoms,
)
from .errors import InvalidMoments, RateBelowMI
from .exponents import kl_tilt_density_law, solve_tau_star
from .rng import Purpose, stream
from .simulator import (
    output_target,
    paired_divergences,
    poisson_mean,
)

LOG2 = math.log(2.0)


# -- moment inequalities ---------------------------------------------------------


def u_logu_lower_bound(m2: float, m3: float) -> float:
    """Lower bound ``m2^2 / (2 m2 + (2/3) m3)`` on ``E[U log U]`` for unit-mean ``U > 0``.

    ``m2 = E[(U-1)^2]``, ``m3 = E[(U-1)^3]``.
    """
    if m2 < 0:
        raise InvalidMoments(f"second moment must be nonnegative, got {m2}")
    if m2 == 0:
        return 0.0
    den = 2.0 * m2 + (2.0 / 3.0) * m3
    if den <= 0:
        raise InvalidMoments(f"2 m2 + (2/3) m3 = {den} is not positive")
    return m2 * m2 / den


def tv_moment_lower_bound(v2: float, v4: float) -> float:
    """Lower bound ``sqrt(v2^3 / v4)`` on ``E|U - E U|`` from central moments."""
    if v2 < 0 or v4 < 0:
        raise InvalidMoments("central moments must be nonnegative")
    if v2 == 0:
        return 0.0
    if v4 == 0:
        raise InvalidMoments("fourth moment is zero while the variance is not")
    return math.sqrt(v2**3 / v4)


def u_logu_integral_identity(u: float):
    """Both sides of ``u log u + 1 - u = (u-1)^2 int_0^1 (1-t)/(1+t(u-1)) dt``."""
    lhs = u * math.log(u) + 1.0 - u
    val, _ = integrate.quad(lambda t: (1.0 - t) / (1.0 + t * (u - 1.0)), 0.0, 1.0,
                            epsabs=1e-13, epsrel=1e-13)
    return lhs, (u - 1.0) ** 2 * val


def random_finite_distributions(count: int, seed: int, max_atoms: int = 8):
    """``count`` random positive finite-support laws as padded ``(values, probs)``."""
    rng = stream(seed, Purpose.MOMENT_SWEEP)
    k = rng.integers(1, max_atoms + 1, size=count)
    scale = np.exp(rng.normal(0.0, 2.0, size=(count, 1)))
    values = scale * rng.exponential(1.0, size=(count, max_atoms))
    probs = rng.dirichlet(np.full(max_atoms, 0.7), size=count)
    mask = np.arange(max_atoms)[None, :] < k[:, None]
    probs = np.where(mask, probs, 0.0)
    probs /= probs.sum(axis=1, keepdims=True)
    return values, probs


@dataclass(frozen=True)
class SweepResult:
    checked: int
    violations: int
    worst_gap: float  # max of bound - exact

    @property
    def passed(self) -> bool:
        return self.violations == 0


def u_logu_bound_sweep(count: int = 100_000, seed: int = 0, tol: float = 1e-12) -> SweepResult:
    values, probs = random_finite_distributions(count, seed)
    worst, bad = -math.inf, 0
    for v, p in zip(values, probs):
        u = v / np.dot(p, v)
        d = u - 1.0
        m2, m3 = float(np.dot(p, d * d)), float(np.dot(p, d**3))
        exact = float(np.dot(p, u * np.log(u)))
        gap = u_logu_lower_bound(m2, m3) - exact
        if m2 > 0:
            worst = max(worst, gap)
        bad += gap > tol
    return SweepResult(count, int(bad), worst)


def abs_dev_bound_sweep(count: int = 100_000, seed: int = 1, tol: float = 1e-12) -> SweepResult:
    values, probs = random_finite_distributions(count, seed)
    worst, bad = -math.inf, 0
    for v, p in zip(values, probs):
        d = v - np.dot(p, v)
        v2, v4 = float(np.dot(p, d * d)), float(np.dot(p, d**4))
        exact = float(np.dot(p, np.abs(d)))
        if v2 > 0 and v4 == 0:  # underflow on tiny scales; the bound is undefined
            continue
        gap = tv_moment_lower_bound(v2, v4) - exact
        if v2 > 0:
            worst = max(worst, gap)
        bad += gap > tol
    return SweepResult(count, int(bad), worst)


# -- converse lower bounds on Poissonized functionals ------------------------------


def _density_sum(ch: DiscreteChannel, n: int) -> DensitySumDistribution:
    return convolve_n(from_atoms(*density_law(ch)), n)


def windowed_t_log_t_lower_bound(ch: DiscreteChannel, n: int, rate: float, window: WindowEvent) -> float:
    """``(1/4) min{A/mu, 3 A^2 / B}`` with ``A = E[e^S 1_F]``, ``B = E[e^{2S} 1_F]``.

    ``S`` is the density sum under ``P_XY^{(x)n}`` and ``mu = 2 exp(nR)``;
    this lower-bounds ``E[T log T]``.
    """
    I = mutual_information(ch)
    if not rate > I:
        raise RateBelowMI(rate, I)
    dist = _density_sum(ch, n)
    A = exact_window_expectation(dist, 1.0, window)
    if A == 0:
        return 0.0
    B = exact_window_expectation(dist, 2.0, window)
    mu = poisson_mean(n, rate)
    return 0.25 * min(A / mu, 3.0 * A * A / B)


def kl_converse_window(ch: DiscreteChannel, n: int, rate: float, width: float) -> WindowEvent:
    """Window ``[n E*, n E* + width]`` on the density sum, ``E*`` the tilted mean.

    At an interior ``tau*`` the tilted mean equals the rate.
    """
    tau, _ = solve_tau_star(ch, rate)
    v, p = kl_tilt_density_law(ch, tau)
    centre = n * float(np.dot(p, v))
    return WindowEvent(centre, centre + width)


def tilting_consistency(ch: DiscreteChannel, n: int, tau: float, window: WindowEvent):
    """``E_P[e^S 1_F]`` directly and via ``S^n E_tilt[e^{(1-tau) S} 1_F]``."""
    direct = exact_window_expectation(_density_sum(ch, n), 1.0, window)
    v, p = kl_tilt_density_law(ch, tau)
    tilted = convolve_n(from_atoms(v, p), n)
    log_norm = float(logsumexp(np.log(density_law(ch)[1]) + tau * density_law(ch)[0]))
    via = math.exp(n * log_norm) * exact_window_expectation(tilted, 1.0 - tau, window)
    return direct, via


def exponential_berry_esseen_constant(sigma: float, t3: float) -> float:
    """``C = (2/sigma)(log 2 / sqrt(2 pi) + 12 T3 / sigma^2)``."""
    return (2.0 / sigma) * (LOG2 / math.sqrt(2.0 * math.pi) + 12.0 * t3 / sigma**2)


def berry_esseen_exponential_bound_check(base, n: int, A: float):
    """``(exact, bound)`` for ``E[e^{-S} 1{S >= A}] <= (C/sqrt(n)) e^{-A}``.

    ``base`` is a zero-mean finite law, as a :class:`DensitySumDistribution`
    or a ``(values, probs)`` pair.
    """
    if not isinstance(base, DensitySumDistribution):
        base = from_atoms(*base)
    mean = base.mean()
    if abs(mean) > 1e-12:
        raise InvalidMoments(f"base must have zero mean, got {mean}")
    var = base.central_moment(2)
    if not var > 0:
        raise InvalidMoments("base must have positive variance")
    sigma = math.sqrt(var)
    C = exponential_berry_esseen_constant(sigma, base.abs_central_moment(3))
    exact = exact_window_expectation(convolve_n(base, n), -1.0, WindowEvent(A, math.inf))
    return exact, C / math.sqrt(n) * math.exp(-A)


# -- exact oracles over enumerated supports ------------------------------------------


def _sequence_tables(ch: DiscreteChannel, n: int):
    """``log P_X^n``, ``log P_Y^n`` and ``i(x^n; y^n)`` over all sequence pairs."""
    nx, ny = ch.n_inputs, ch.n_outputs
    xs = np.array(list(itertools.product(range(nx), repeat=n)), dtype=np.int64).reshape(-1, n)
    ys = np.array(list(itertools.product(range(ny), repeat=n)), dtype=np.int64).reshape(-1, n)
    lpx = np.log(ch.input_dist)[xs].sum(axis=1)
    lpy = np.log(ch.output_marginal)[ys].sum(axis=1)
    dens = ch.log_density[xs[:, None, :], ys[None, :, :]].sum(axis=2)
    return lpx, lpy, dens


def hayashi_enumeration_oracle(ch: DiscreteChannel, n: int, codebook_size: int) -> float:
    """``E[log(1 + e^{i(X^n;Y^n)}/M)]`` by enumerating every ``(x^n, y^n)``."""
    lpx, lpy, dens = _sequence_tables(ch, n)
    lj = lpx[:, None] + lpy[None, :] + dens  # log P_XY^n
    m = np.isfinite(dens)
    return float(np.sum(np.exp(lj[m]) * np.logaddexp(0.0, dens[m] - math.log(codebook_size))))


def windowed_abs_dev_lower_bound(ch: DiscreteChannel, n: int, rate: float, window: WindowEvent) -> float:
    """``E_Y sqrt(1/(b/a^3 + 3 mu/a))`` by enumeration; experimental, small ``n`` only.

    ``a = E[e^S 1_F | Y]``, ``b = E[e^{3S} 1_F | Y]`` under ``P_XY^{(x)n}``;
    this lower-bounds ``E|T - 1|``.
    """
    if ch.n_inputs**n * ch.n_outputs**n > 10**6:
        raise ValueError("enumeration too large for this oracle")
    lpx, lpy, dens = _sequence_tables(ch, n)
    lpost = lpx[:, None] + dens  # log P(x^n | y^n)
    inside = window.contains(dens)
    mu = poisson_mean(n, rate)
    total = 0.0
    for j in range(lpy.size):
        m = inside[:, j]
        if not np.any(m):
            continue
        la = logsumexp(lpost[m, j] + dens[m, j])
        lb = logsumexp(lpost[m, j] + 3.0 * dens[m, j])
        # b/a^3 + 3 mu / a in log space
        lden = np.logaddexp(lb - 3.0 * la, math.log(3.0 * mu) - la)
        total += math.exp(lpy[j] - 0.5 * lden)
    return total


@dataclass(frozen=True)
class ExactTFunctionals:
    t_log_t: float
    abs_dev: float
    mean_t: float
    truncation_mass: float


def exact_t_functionals(ch: DiscreteChannel, n: int, rate: float, tail: float = 1e-12) -> ExactTFunctionals:
    """``E[T log T]``, ``E|T - 1|`` and ``E[T]`` by a truncated Poisson sum.

    For each output sequence the law of ``U = e^{i(X^n; y^n)}`` (``X^n`` from
    ``P_X^n``) is enumerated; ``sum_{k<=m} U_k`` is convolved for every ``m``
    up to the point where the remaining Poisson mass is below ``tail``.
    """
    mu = poisson_mean(n, rate)
    m_max = int(poisson.isf(tail, mu)) + 1
    pm = poisson.pmf(np.arange(m_max + 1), mu)
    lpx, lpy, dens = _sequence_tables(ch, n)
    tl = ad = mt = 0.0
    for j in range(lpy.size):
        base = from_atoms(np.exp(dens[:, j]), np.exp(lpx))
        cur = DensitySumDistribution(np.zeros(1), np.ones(1))
        acc_tl = acc_ad = acc_mt = 0.0
        for m in range(m_max + 1):
            if m > 0:
                cur = convolve(cur, base)
            t = cur.values / mu
            xl = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)
            acc_tl += pm[m] * float(np.dot(cur.probs, xl))
            acc_ad += pm[m] * float(np.dot(cur.probs, np.abs(t - 1.0)))
            acc_mt += pm[m] * float(np.dot(cur.probs, t))
        w = math.exp(lpy[j])
        tl += w * acc_tl
        ad += w * acc_ad
        mt += w * acc_mt
    return ExactTFunctionals(float(tl), float(ad), float(mt), float(poisson.sf(m_max, mu)))


def _compositions(m: int, k: int):
    """All ``k``-part compositions of ``m`` as an array of shape ``(C, k)``."""
    out = []
    for bars in itertools.combinations(range(m + k - 1), k - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(m + k - 2 - prev)
        out.append(row)
    return np.array(out, dtype=np.int64).reshape(-1, k)


def exact_expected_divergence(ch: DiscreteChannel, n: int, m: int):
    """``(E[D], E[TV])`` over all size-``m`` i.i.d. codebooks, enumerated by histogram."""
    nx = ch.n_inputs
    K = nx**n
    xs = np.array(list(itertools.product(range(nx), repeat=n)), dtype=np.int64).reshape(-1, n)
    lp = np.log(ch.input_dist)[xs].sum(axis=1)
    comps = _compositions(m, K)
    logw = gammaln(m + 1) - gammaln(comps + 1).sum(axis=1) + (comps * lp[None, :]).sum(axis=1)
    w = np.exp(logw)
    P = kernels.contract_rows(comps.astype(np.float64) / m, np.ascontiguousarray(ch.transition), n)
    q = output_target(ch, n)
    kl, tv = kernels.kl_tv_rows(P, q, np.log(q))
    return float(np.dot(w, np.maximum(kl, 0.0))), float(np.dot(w, tv))


@dataclass(frozen=True)
class MonotonicityReport:
    kind: str
    means: np.ndarray
    step_means: np.ndarray  # mean of L_{m+1} - L_m
    step_stderrs: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.step_means <= 4.0 * self.step_stderrs + 1e-15))


def monotonicity_report(ch, kind, m_max, trials, seed, n=1) -> MonotonicityReport:
    if kind not in ("kl", "tv"):
        raise ValueError("kind must be 'kl' or 'tv'")
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    kl, tv = paired_divergences(ch, n, m_max, trials, seed)
    vals = kl if kind == "kl" else tv
    d = np.diff(vals, axis=1)
    se = d.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(d.shape[1])
    return MonotonicityReport(kind, vals.mean(axis=0), d.mean(axis=0), se)


def fdivergence_monotonicity_check(ch, kind, m_max, trials, seed, n=1) -> bool:
    """Paired-codebook means nonincreasing in ``m`` within 4 standard errors."""
    return monotonicity_report(ch, kind, m_max, trials, seed, n).passed


# -- Poisson tail constants ----------------------------------------------------------

EPS_HALF = math.sqrt(2.0) * math.exp(-0.5)
EPS_THREE_HALVES = math.exp(0.5) / 1.5**1.5


@dataclass(frozen=True)
class PoissonTailResult:
    mu: float
    draws: int
    low_frequency: float
    low_bound: float
    high_frequency: float
    high_bound: float

    @property
    def passed(self) -> bool:
        return self.low_frequency <= self.low_bound and self.high_frequency <= self.high_bound


def poisson_tail_check(mu: float, draws: int, seed: int = 0) -> PoissonTailResult:
    """Frequencies of ``{M < mu/2}`` and ``{M >= 3mu/2}`` for ``M ~ Poisson(mu)``."""
    M = stream(seed, Purpose.POISSON_TAIL, int(round(mu * 1000))).poisson(mu, draws)
    return PoissonTailResult(
        mu, draws,
        float(np.mean(M < mu / 2.0)), EPS_HALF**mu,
        float(np.mean(M >= 1.5 * mu)), EPS_THREE_HALVES**mu,
    )
