"""Tilted measures, exponents, prefactor orders and one-shot bounds.

Two one-parameter families drive everything here:

* ``K(tau) = log E[exp(tau * i)]`` under ``P_XY``.  Its Legendre-type
  maximization over ``tau in [0, 1]`` gives the relative-entropy exponent.
* ``G(rho) = log sum_y P_Y(y) g_rho(y)^(1 - rho)`` with
  ``g_rho(y) = E[exp(s * i) | Y = y]``, ``s = rho / (1 - rho)``.  This equals
  ``rho * I_{1/(1-rho)}`` (Sibson alpha-mutual information) and its
  maximization over ``rho in [0, 1/2]`` gives the total-variation exponent.

Both functions are convex, so the optimizers are root finds on monotone
derivatives.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from .channel import (
    DiscreteChannel,
    density_law,
    is_singular,
    log_density_mgf,
    mutual_information,
    tilted_density_moments,
)
from .densitysum import convolve_n, from_atoms
from .errors import NoConvergence, RateBelowMI, TauAtBoundary

ALPHA_ONE_TOL = 1e-6
BOUNDARY_SLACK = 1e-12
ROOT_TOL = 1e-10


# -- alpha-mutual information ----------------------------------------------


def alpha_mutual_information(ch: DiscreteChannel, alpha: float) -> float:
    """Sibson alpha-mutual information in nats.

    ``alpha/(alpha-1) * log sum_y P_Y (sum_x P_X (W/P_Y)^alpha)^(1/alpha)``;
    within ``1e-6`` of ``alpha = 1`` the mutual information is returned.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return mutual_information(ch)
    lpx = np.log(ch.input_dist)[:, None]
    with np.errstate(invalid="ignore"):
        terms = np.where(ch.support, lpx + alpha * ch.log_density, -np.inf)
    inner = logsumexp(terms, axis=0)
    total = logsumexp(np.log(ch.output_marginal) + inner / alpha)
    return float(alpha / (alpha - 1.0) * total)


def _renyi_rows(ch: DiscreteChannel, log_q: np.ndarray, alpha: float) -> np.ndarray:
    """``D_alpha(W_x || Q)`` for every input row."""
    with np.errstate(divide="ignore"):
        lw = np.log(ch.transition)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        with np.errstate(invalid="ignore"):
            t = np.where(ch.support, ch.transition * (lw - log_q[None, :]), 0.0)
        return t.sum(axis=1)
    with np.errstate(invalid="ignore"):
        t = np.where(ch.support, alpha * lw + (1.0 - alpha) * log_q[None, :], -np.inf)
    return logsumexp(t, axis=1) / (alpha - 1.0)


def _csiszar_objective(ch, log_q, alpha):
    return float(np.dot(ch.input_dist, _renyi_rows(ch, log_q, alpha)))


def csiszar_alpha_mutual_information(
    ch: DiscreteChannel, alpha: float, *, tol: float = 1e-12, max_sweeps: int = 100_000,
    return_minimizer: bool = False,
):
    """``min_Q sum_x P_X(x) D_alpha(W_x || Q)`` by damped fixed-point sweeps.

    The stationarity condition is ``Q(y)^alpha ∝ sum_x P_X(x) W_x(y)^alpha / Z_x(Q)``
    with ``Z_x(Q) = sum_y W_x^alpha Q^(1-alpha)``.  Each sweep proposes the
    fixed-point image of the current ``Q``; if that does not decrease the
    (convex) objective the step is shortened geometrically in log space.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        val = mutual_information(ch)
        return (val, ch.output_marginal.copy()) if return_minimizer else val

    with np.errstate(divide="ignore"):
        lw = np.log(ch.transition)
    lpx = np.log(ch.input_dist)
    log_q = np.log(ch.output_marginal)
    J = _csiszar_objective(ch, log_q, alpha)
    best = J
    for sweep in range(1, max_sweeps + 1):
        with np.errstate(invalid="ignore"):
            t = np.where(ch.support, alpha * lw + (1.0 - alpha) * log_q[None, :], -np.inf)
        log_z = logsumexp(t, axis=1)
        with np.errstate(invalid="ignore"):
            s = np.where(ch.support, lpx[:, None] + alpha * lw - log_z[:, None], -np.inf)
        prop = logsumexp(s, axis=0) / alpha
        prop -= logsumexp(prop)

        step = 1.0
        while True:
            cand = (1.0 - step) * log_q + step * prop
            cand -= logsumexp(cand)
            Jc = _csiszar_objective(ch, cand, alpha)
            if Jc <= J or step < 1e-12:
                break
            step *= 0.5
        if Jc > J:
            # no descent along the fixed-point direction: stationary to rounding
            break
        delta = J - Jc
        log_q, J = cand, Jc
        best = min(best, J)
        if delta < tol:
            break
    else:
        raise NoConvergence(
            f"Csiszar minimization did not settle in {max_sweeps} sweeps", best_value=best,
            sweeps=max_sweeps,
        )
    return (J, np.exp(log_q)) if return_minimizer else J


# -- relative-entropy tilt -------------------------------------------------


@dataclass(frozen=True)
class TiltedModel:
    """A tilted version of ``P_XY``.

    ``kind == "kl"``: ``tilted_joint ∝ P_XY * exp(tau * i)``, normalizer
    ``S = E[exp(tau * i)]``.

    ``kind == "tv"``: ``tilted_conditional[:, y] ∝ P_{X|Y=y} * exp(s * i)``
    (columns sum to one) and ``tilted_output ∝ P_Y * g^(1 - rho)``, with
    normalizer ``exp(rho * I_{1/(1-rho)})``.
    """

    kind: str
    parameter: float
    normalizer: float
    tilted_joint: np.ndarray
    tilted_conditional: np.ndarray | None = None
    tilted_output: np.ndarray | None = None

    @property
    def log_normalizer(self) -> float:
        return math.log(self.normalizer)


def build_kl_tilt(ch: DiscreteChannel, tau: float) -> TiltedModel:
    lw = np.where(ch.support, ch.log_joint + tau * np.where(ch.support, ch.log_density, 0.0), -np.inf)
    lS = logsumexp(lw)
    joint = np.exp(lw - lS)
    return TiltedModel("kl", float(tau), float(np.exp(lS)), joint)


def kl_tilt_density_law(ch: DiscreteChannel, tau: float):
    """Atoms of ``i`` under the ``tau``-tilted joint."""
    tm = build_kl_tilt(ch, tau)
    m = ch.support
    return ch.log_density[m].copy(), tm.tilted_joint[m].copy()


def solve_tau_star(ch: DiscreteChannel, rate: float):
    """``(tau*, kl_exponent)`` maximizing ``tau R - K(tau)`` over ``[0, 1]``."""
    I = mutual_information(ch)
    if not rate > I:
        raise RateBelowMI(rate, I)
    d1 = tilted_density_moments(ch, 1.0)[0]
    if rate - d1 >= -BOUNDARY_SLACK:
        tau = 1.0
    else:
        f = lambda t: tilted_density_moments(ch, t)[0] - rate
        tau = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        if abs(f(tau)) > ROOT_TOL:  # pragma: no cover - brentq to machine precision
            raise NoConvergence(f"tau* root residual {f(tau):.3g}", best_value=tau)
    return tau, tau * rate - log_density_mgf(ch, tau)


# -- total-variation tilt --------------------------------------------------


def _log_g(ch: DiscreteChannel, s):
    """``log E[exp(s i) | Y = y]`` for scalar or array ``s``; shape ``(..., |Y|)``."""
    s = np.asarray(s, dtype=np.float64)
    lpost = ch.log_joint - np.log(ch.output_marginal)[None, :]
    ld = np.where(ch.support, ch.log_density, 0.0)
    t = lpost + s[..., None, None] * ld
    t = np.where(ch.support, t, -np.inf)
    return logsumexp(t, axis=-2)


def tv_log_normalizer(ch: DiscreteChannel, rho):
    """``G(rho) = rho * I_{1/(1-rho)}``; vectorized over ``rho`` in ``[0, 1)``."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0) or np.any(rho >= 1):
        raise ValueError("rho must lie in [0, 1)")
    s = rho / (1.0 - rho)
    lg = _log_g(ch, s)
    out = logsumexp(np.log(ch.output_marginal) + (1.0 - rho)[..., None] * lg, axis=-1)
    return float(out) if out.ndim == 0 else out


def build_tv_tilt(ch: DiscreteChannel, rho: float) -> TiltedModel:
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    s = rho / (1.0 - rho)
    lpost = ch.log_joint - np.log(ch.output_marginal)[None, :]
    ld = np.where(ch.support, ch.log_density, 0.0)
    t = np.where(ch.support, lpost + s * ld, -np.inf)
    lg = logsumexp(t, axis=0)
    cond = np.exp(t - lg[None, :])
    lo = np.log(ch.output_marginal) + (1.0 - rho) * lg
    lS = logsumexp(lo)
    out = np.exp(lo - lS)
    return TiltedModel(
        "tv", float(rho), float(np.exp(lS)), cond * out[None, :],
        tilted_conditional=cond, tilted_output=out,
    )


@dataclass(frozen=True)
class ZStatistics:
    """Moments of ``Z = i(Xbar; Ybar)/(1 - rho) - log g(Ybar)`` under the tv tilt."""

    rho: float
    mean_z: float
    expected_conditional_variance: float
    expected_conditional_m3: float
    conditional_means: np.ndarray
    conditional_variances: np.ndarray
    conditional_m3: np.ndarray
    tilted_output: np.ndarray


def _z_values(ch: DiscreteChannel, rho: float):
    s = rho / (1.0 - rho)
    lg = _log_g(ch, s)
    ld = np.where(ch.support, ch.log_density, 0.0)
    return ld / (1.0 - rho) - lg[None, :]


def z_statistics(ch: DiscreteChannel, rho: float) -> ZStatistics:
    tm = build_tv_tilt(ch, rho)
    z = _z_values(ch, rho)
    cond = tm.tilted_conditional
    cm = (cond * z).sum(axis=0)
    dev = np.where(ch.support, z - cm[None, :], 0.0)
    cv = (cond * dev**2).sum(axis=0)
    c3 = (cond * np.abs(dev) ** 3).sum(axis=0)
    out = tm.tilted_output
    return ZStatistics(
        rho=float(rho),
        mean_z=float(np.dot(out, cm)),
        expected_conditional_variance=float(np.dot(out, cv)),
        expected_conditional_m3=float(np.dot(out, c3)),
        conditional_means=cm,
        conditional_variances=cv,
        conditional_m3=c3,
        tilted_output=out,
    )


def z_law(ch: DiscreteChannel, rho: float):
    """Atoms ``(values, probs)`` of ``Z`` under ``(Xbar, Ybar)``."""
    tm = build_tv_tilt(ch, rho)
    z = _z_values(ch, rho)
    m = ch.support
    return z[m].copy(), tm.tilted_joint[m].copy()


def tv_tilted_mean(ch: DiscreteChannel, rho: float) -> float:
    """``H(rho) = G'(rho) = E[Z]``."""
    return z_statistics(ch, rho).mean_z


def solve_rho_star(ch: DiscreteChannel, rate: float):
    """``(rho*, tv_exponent, beta*)`` maximizing ``rho R - G(rho)`` over ``[0, 1/2]``."""
    I = mutual_information(ch)
    if not rate > I:
        raise RateBelowMI(rate, I)
    if rate - tv_tilted_mean(ch, 0.5) >= -BOUNDARY_SLACK:
        rho = 0.5
    else:
        f = lambda r: tv_tilted_mean(ch, r) - rate
        rho = brentq(f, 0.0, 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        if abs(f(rho)) > ROOT_TOL:  # pragma: no cover
            raise NoConvergence(f"rho* root residual {f(rho):.3g}", best_value=rho)
    exponent = rho * rate - tv_log_normalizer(ch, rho)
    beta = 1.0 if is_singular(ch) else 1.0 - rho
    return rho, exponent, beta


# -- report and order predictors -------------------------------------------


@dataclass(frozen=True)
class ExponentReport:
    rate: float
    mutual_information: float
    tau_star: float
    rho_star: float
    beta_star: float
    singular: bool
    kl_exponent: float
    tv_exponent: float
    tau_at_boundary: bool
    rho_at_boundary: bool
    kl_normalizer: float
    tv_normalizer: float
    renyi_2: float

    def kl_order(self, n: int) -> float:
        return kl_order(self, n)

    def tv_order(self, n: int) -> float:
        return tv_order(self, n)

    def predicted_log_n_power(self, target: str) -> float:
        """Power of ``n`` in the exact order for ``target`` in {"kl", "tv"}."""
        if target == "kl":
            return 0.0 if self.tau_at_boundary else -0.5
        if target == "tv":
            return 0.0 if self.rho_at_boundary else -self.beta_star / 2.0
        raise ValueError(f"unknown target {target!r}")

    def predicted_slope(self, target: str) -> float:
        if target == "kl":
            return -self.kl_exponent
        if target == "tv":
            return -self.tv_exponent
        raise ValueError(f"unknown target {target!r}")

    def to_dict(self):
        return asdict(self)


def exponent_report(ch: DiscreteChannel, rate: float) -> ExponentReport:
    tau, ekl = solve_tau_star(ch, rate)
    rho, etv, beta = solve_rho_star(ch, rate)
    return ExponentReport(
        rate=float(rate),
        mutual_information=mutual_information(ch),
        tau_star=float(tau),
        rho_star=float(rho),
        beta_star=float(beta),
        singular=is_singular(ch),
        kl_exponent=float(ekl),
        tv_exponent=float(etv),
        tau_at_boundary=tau == 1.0,
        rho_at_boundary=rho == 0.5,
        kl_normalizer=float(np.exp(log_density_mgf(ch, tau))),
        tv_normalizer=float(np.exp(tv_log_normalizer(ch, rho))),
        renyi_2=alpha_mutual_information(ch, 2.0),
    )


def kl_order(report: ExponentReport, n: int) -> float:
    """Unit-constant exact order of ``E[D]``; an order, not a bound."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    val = math.exp(-n * report.kl_exponent)
    return val if report.tau_at_boundary else val / math.sqrt(n)


def tv_order(report: ExponentReport, n: int) -> float:
    """Unit-constant exact order of ``E[TV]``; an order, not a bound."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    if report.rho_at_boundary:
        return math.exp(-0.5 * n * (report.rate - report.renyi_2))
    return n ** (-report.beta_star / 2.0) * math.exp(-n * report.tv_exponent)


def tilted_kl_upper_order(ch: DiscreteChannel, rate: float, n: int) -> float:
    """Envelope ``exp(-n E)/sqrt(n)`` of the exact upper bound; interior ``tau*`` only."""
    tau, e = solve_tau_star(ch, rate)
    if tau >= 1.0:
        raise TauAtBoundary("tau* = 1: the envelope applies only to interior tau*")
    if n < 1:
        raise ValueError("n must be positive")
    return math.exp(-n * e) / math.sqrt(n)


# -- one-shot and exact upper bounds ---------------------------------------


def gallager_tv_minimizer(ch: DiscreteChannel, codebook_size: float, blocklength: int = 1):
    """``(bound, rho)`` for ``(3/2) min_rho M^-rho exp(n G(rho))`` over ``[0, 1/2]``.

    Bounded Brent search, cross-checked against a ``1e-4`` grid and both
    endpoints; the smallest objective found wins.
    """
    if codebook_size < 1:
        raise ValueError("codebook_size must be at least 1")
    logM = math.log(codebook_size)
    obj = lambda r: -r * logM + blocklength * tv_log_normalizer(ch, r)
    res = minimize_scalar(obj, bounds=(0.0, 0.5), method="bounded", options={"xatol": 1e-10})
    grid = np.linspace(0.0, 0.5, 5001)
    gv = -grid * logM + blocklength * tv_log_normalizer(ch, grid)
    cands = [(float(res.fun), float(res.x)), (float(gv.min()), float(grid[gv.argmin()]))]
    cands += [(obj(0.0), 0.0), (obj(0.5), 0.5)]
    val, rho = min(cands)
    return 1.5 * math.exp(val), rho


def gallager_tv_one_shot(ch: DiscreteChannel, codebook_size: float, blocklength: int = 1) -> float:
    """One-shot TV bound for a random codebook of ``codebook_size`` codewords."""
    return gallager_tv_minimizer(ch, codebook_size, blocklength)[0]


def codebook_size_for(n: int, rate: float) -> int:
    return max(1, int(round(math.exp(n * rate))))


def hayashi_kl_upper_exact(
    ch: DiscreteChannel, n: int, rate: float | None = None, codebook_size: int | None = None
) -> float:
    """Exact ``E[log(1 + exp(sum i)/M)]`` from the convolved density law."""
    if codebook_size is None:
        if rate is None:
            raise ValueError("give rate or codebook_size")
        codebook_size = codebook_size_for(n, rate)
    dist = convolve_n(from_atoms(*density_law(ch)), n)
    vals = np.logaddexp(0.0, dist.values - math.log(codebook_size))
    return float(np.dot(dist.probs, vals))
