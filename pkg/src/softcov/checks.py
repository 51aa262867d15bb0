"""Verification suite behind ``softcov verify``.

Each check only calls operations defined elsewhere in the package; the
``operation`` field names the module-level function it exercises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds, exponents, simulator
from .channel import DiscreteChannel, density_law
from .densitysum import WindowEvent, from_atoms
from .errors import SupportOverflow


@dataclass(frozen=True)
class CheckResult:
    name: str
    operation: str
    passed: bool
    detail: str
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status} {self.name}: {self.detail}"


DOMINATION_RATES = (0.5, 0.8)
DOMINATION_NS = tuple(range(1, 7))


def check_u_logu_bound(ch, seed, count=100_000):
    r = bounds.u_logu_bound_sweep(count, seed)
    return r.passed, f"{r.violations} violations in {r.checked}, worst bound-exact {r.worst_gap:.3g}"


def check_abs_dev_bound(ch, seed, count=100_000):
    r = bounds.abs_dev_bound_sweep(count, seed + 1)
    return r.passed, f"{r.violations} violations in {r.checked}, worst bound-exact {r.worst_gap:.3g}"


def check_integral_identity(ch, seed):
    gaps = [abs(a - b) for a, b in map(bounds.u_logu_integral_identity, (0.1, 0.5, 2.0, 10.0))]
    return max(gaps) <= 1e-10, f"max gap {max(gaps):.3g}"


def berry_esseen_bases(ch: DiscreteChannel | None = None):
    bases = [("coin", from_atoms([-1.0, 1.0], [0.5, 0.5]))]
    if ch is not None:
        v, p = density_law(ch)
        base = from_atoms(v - np.dot(p, v), p)
        if base.central_moment(2) > 1e-12:
            bases.append(("density", from_atoms(base.values - base.mean(), base.probs)))
    return bases


def check_berry_esseen(ch, seed, bases=None):
    bases = berry_esseen_bases(ch) if bases is None else bases
    worst, count = -math.inf, 0
    for _, base in bases:
        for n in (4, 16, 64):
            for A in (0.0, 0.5 * math.log(n)):
                try:
                    exact, bound = bounds.berry_esseen_exponential_bound_check(base, n, A)
                except SupportOverflow:
                    continue
                worst = max(worst, exact / bound)
                count += 1
    return worst <= 1.0, f"{count} grid points, max exact/bound {worst:.3g}"


def _mono_blocklength(ch):
    return 1 if ch.n_outputs > 2 else 2


def check_monotonicity(ch, seed, kind, m_max=16, trials=2000):
    n = _mono_blocklength(ch)
    rep = bounds.monotonicity_report(ch, kind, m_max, trials, seed, n=n)
    worst = float(np.max(rep.step_means - 4 * rep.step_stderrs))
    return rep.passed, f"n={n}, m=1..{m_max}, max(step - 4 stderr) {worst:.3g}"


def check_thinning(ch, seed, samples=20_000):
    n, rate = 2, 1.0
    y = np.zeros(n, dtype=np.int64)
    window = WindowEvent(math.log(2.0), math.inf)
    r = simulator.thinning_independence_check(ch, n, rate, y, window, samples, seed)
    if r.skipped:
        return None, "T2 is identically zero for this channel and window; skipped"
    ok = abs(r.pearson_r) <= 4 / math.sqrt(samples) and r.chi_square_p > 1e-3
    return ok, f"pearson r {r.pearson_r:.3g}, chi-square p {r.chi_square_p:.3g}"


def check_mean_t(ch, seed, samples=100_000):
    tf = simulator.estimate_t_functionals(ch, 1, 1.0, samples, seed)
    z = abs(tf.mean_t - 1.0) / tf.stderr_t if tf.stderr_t > 0 else abs(tf.mean_t - 1.0) / 1e-15
    return z <= 4, f"E[T] = {tf.mean_t:.6f} +- {tf.stderr_t:.2g}"


def check_poisson_tails(ch, seed, draws=1_000_000):
    res = [bounds.poisson_tail_check(mu, draws, seed) for mu in (4.0, 8.0)]
    return all(r.passed for r in res), "; ".join(
        f"mu={r.mu:g}: {r.low_frequency:.3g}<={r.low_bound:.3g}, {r.high_frequency:.3g}<={r.high_bound:.3g}"
        for r in res
    )


def domination_batches(ch, seed, trials=10_000, ns=DOMINATION_NS, rates=DOMINATION_RATES):
    out = {}
    for rate in rates:
        for n in ns:
            out[(n, rate)] = simulator.simulate_trials(ch, n, rate, trials, "fixed", seed)
    return out


def check_one_shot_domination(ch, seed, batches=None):
    batches = domination_batches(ch, seed) if batches is None else batches
    worst = -math.inf
    for (n, rate), b in batches.items():
        M = simulator.fixed_codebook_size(n, rate)
        bound = exponents.gallager_tv_one_shot(ch, M, blocklength=n)
        worst = max(worst, b.mean_tv - bound - 3 * b.stderr_tv)
    return worst <= 0, f"{len(batches)} configs, max(mean - bound - 3 stderr) {worst:.3g}"


def check_hayashi_domination(ch, seed, batches=None):
    batches = domination_batches(ch, seed) if batches is None else batches
    worst = -math.inf
    for (n, rate), b in batches.items():
        M = simulator.fixed_codebook_size(n, rate)
        bound = exponents.hayashi_kl_upper_exact(ch, n, codebook_size=M)
        worst = max(worst, b.mean_kl - bound - 3 * b.stderr_kl)
    return worst <= 0, f"{len(batches)} configs, max(mean - bound - 3 stderr) {worst:.3g}"


# name -> (module operation exercised, check function)
CHECKS = {
    "u_logu_moment_bound": ("bounds.u_logu_lower_bound", check_u_logu_bound),
    "abs_dev_moment_bound": ("bounds.tv_moment_lower_bound", check_abs_dev_bound),
    "u_logu_integral_identity": ("bounds.u_logu_integral_identity", check_integral_identity),
    "berry_esseen_grid": ("bounds.berry_esseen_exponential_bound_check", check_berry_esseen),
    "monotone_kl": ("bounds.fdivergence_monotonicity_check", lambda ch, s: check_monotonicity(ch, s, "kl")),
    "monotone_tv": ("bounds.fdivergence_monotonicity_check", lambda ch, s: check_monotonicity(ch, s, "tv")),
    "thinning_independence": ("simulator.thinning_independence_check", check_thinning),
    "t_statistic_unit_mean": ("simulator.estimate_t_functionals", check_mean_t),
    "poisson_tails": ("bounds.poisson_tail_check", check_poisson_tails),
    "one_shot_domination": ("exponents.gallager_tv_one_shot", check_one_shot_domination),
    "hayashi_domination": ("exponents.hayashi_kl_upper_exact", check_hayashi_domination),
}


def run_checks(ch: DiscreteChannel, seed: int = 0, names=None):
    """Run the named checks (all by default); yields :class:`CheckResult`."""
    batches = None
    for name in names or CHECKS:
        op, fn = CHECKS[name]
        if name in ("one_shot_domination", "hayashi_domination"):
            if batches is None:
                batches = domination_batches(ch, seed)
            ok, detail = fn(ch, seed, batches)
        else:
            ok, detail = fn(ch, seed)
        yield CheckResult(name, op, ok is None or bool(ok), detail, skipped=ok is None)
