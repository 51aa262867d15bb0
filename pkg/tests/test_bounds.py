import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softcov import bounds as B
from softcov import channel as C
from softcov import exponents as E
from softcov.densitysum import (
    DensitySumDistribution,
    WindowEvent,
    convolve_n,
    exact_window_expectation,
    from_atoms,
)
from softcov.errors import InvalidMoments, SupportOverflow

from conftest import random_channel

COIN = ([-1.0, 1.0], [0.5, 0.5])


# -- exact laws of sums ---------------------------------------------------------------


def test_convolve_n_one_is_base():
    base = from_atoms([0.3, -1.2, 2.0], [0.2, 0.5, 0.3])
    d = convolve_n(base, 1)
    np.testing.assert_array_equal(d.values, base.values)
    np.testing.assert_array_equal(d.probs, base.probs)


def test_convolve_coin_binomial():
    d = convolve_n(COIN, 4)
    np.testing.assert_allclose(d.values, [-4, -2, 0, 2, 4], atol=1e-14)
    np.testing.assert_allclose(d.probs, np.array([1, 4, 6, 4, 1]) / 16, atol=1e-16)


@given(st.integers(0, 10_000), st.integers(0, 8))
@settings(max_examples=40, deadline=None)
def test_convolve_mass_and_order(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    d = convolve_n((rng.normal(size=k), rng.dirichlet(np.ones(k))), n)
    assert d.total_mass == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(d.values) > 0)


def test_convolve_lattice_stays_small(bsc):
    d = convolve_n(C.density_law(bsc), 40)
    assert d.size == 41


def test_support_overflow(monkeypatch):
    import softcov.densitysum as ds
    monkeypatch.setattr(ds, "MAX_SUPPORT", 50)
    rng = np.random.default_rng(0)
    with pytest.raises(SupportOverflow):
        convolve_n((rng.normal(size=5), np.full(5, 0.2)), 4)


def test_window_expectations():
    d = convolve_n(COIN, 4)
    assert exact_window_expectation(d, 0.0, WindowEvent.full()) == pytest.approx(1.0, abs=1e-15)
    expected = 6 / 16 + 4 / 16 * math.exp(-2) + 1 / 16 * math.exp(-4)
    assert exact_window_expectation(d, -1.0, WindowEvent(0.0)) == pytest.approx(expected, rel=1e-14)
    assert exact_window_expectation(d, 1.0, WindowEvent.empty()) == 0.0
    with pytest.raises(ValueError):
        WindowEvent(1.0, 0.0)


@given(st.integers(0, 10_000), st.floats(-2, 2), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_full_window_is_mgf_power(seed, c, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    v, p = rng.normal(size=k), rng.dirichlet(np.ones(k))
    d = convolve_n((v, p), n)
    mgf = float(np.dot(p, np.exp(c * v)))
    assert exact_window_expectation(d, c, WindowEvent.full()) == pytest.approx(mgf**n, rel=1e-10)


# -- moment inequalities --------------------------------------------------------------


def test_u_logu_examples():
    assert B.u_logu_lower_bound(0.0, 0.0) == 0.0
    assert B.u_logu_lower_bound(1.0, 0.0) == 0.5
    assert 0.5 <= math.log(2)
    with pytest.raises(InvalidMoments):
        B.u_logu_lower_bound(1.0, -3.0)
    with pytest.raises(InvalidMoments):
        B.u_logu_lower_bound(-1.0, 0.0)


def test_tv_moment_examples():
    assert B.tv_moment_lower_bound(1.0, 1.0) == 1.0
    assert B.tv_moment_lower_bound(0.0, 0.0) == 0.0
    with pytest.raises(InvalidMoments):
        B.tv_moment_lower_bound(1.0, 0.0)


@given(st.lists(st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1.0)), min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_moment_bounds_property(atoms):
    v = np.array([a for a, _ in atoms])
    p = np.array([b for _, b in atoms])
    p /= p.sum()
    u = v / np.dot(p, v)
    d = u - 1
    assert B.u_logu_lower_bound(np.dot(p, d**2), np.dot(p, d**3)) <= np.dot(p, u * np.log(u)) + 1e-12
    c = v - np.dot(p, v)
    v2, v4 = np.dot(p, c**2), np.dot(p, c**4)
    if v2 > 0 and v4 > 0:
        assert B.tv_moment_lower_bound(v2, v4) <= np.dot(p, np.abs(c)) + 1e-12 * max(1.0, np.abs(c).max())


def test_moment_sweeps_small():
    assert B.u_logu_bound_sweep(2000, seed=7).passed
    assert B.abs_dev_bound_sweep(2000, seed=7).passed


@pytest.mark.parametrize("u", [0.1, 0.5, 2.0, 10.0])
def test_integral_identity(u):
    lhs, rhs = B.u_logu_integral_identity(u)
    assert lhs == pytest.approx(rhs, abs=1e-10)


# -- converse quantities ----------------------------------------------------------------


def test_t_log_t_lower_examples(identity):
    assert B.windowed_t_log_t_lower_bound(identity, 1, 1.0, WindowEvent.empty()) == 0.0
    val = B.windowed_t_log_t_lower_bound(identity, 1, 1.0, WindowEvent.full())
    assert val == pytest.approx(1 / (4 * math.e), rel=1e-13)


def test_tilting_consistency(bsc):
    tau, _ = E.solve_tau_star(bsc, 0.55)
    for n in (3, 8):
        w = B.kl_converse_window(bsc, n, 0.55, 1.5)
        direct, via = B.tilting_consistency(bsc, n, tau, w)
        assert direct == pytest.approx(via, rel=1e-9)
        assert w.lower == pytest.approx(n * 0.55, abs=1e-9)


def test_berry_esseen_examples():
    exact, bound = B.berry_esseen_exponential_bound_check(COIN, 4, 0.0)
    assert exact == pytest.approx(6 / 16 + 4 / 16 * math.exp(-2) + 1 / 16 * math.exp(-4), rel=1e-14)
    C_ = 2 * (math.log(2) / math.sqrt(2 * math.pi) + 12)
    assert bound == pytest.approx(C_ / 2, rel=1e-13)
    e, b = B.berry_esseen_exponential_bound_check(COIN, 4, 50.0)
    assert e == 0.0 and b < 1e-20
    with pytest.raises(InvalidMoments):
        B.berry_esseen_exponential_bound_check(([0.0, 2.0], [0.5, 0.5]), 4, 0.0)


@pytest.mark.parametrize("n", [4, 16, 64])
def test_berry_esseen_grid(bsc, n):
    v, p = C.density_law(bsc)
    base = from_atoms(v - np.dot(p, v), p)
    base = from_atoms(base.values - base.mean(), base.probs)
    for b in (from_atoms(*COIN), base):
        for A in (0.0, 0.5 * math.log(n)):
            exact, bound = B.berry_esseen_exponential_bound_check(b, n, A)
            assert exact <= bound


def test_exact_t_functionals_identity(identity):
    r = B.exact_t_functionals(identity, 1, 1.0)
    assert r.mean_t == pytest.approx(1.0, abs=1e-11)
    assert r.truncation_mass < 1e-12
    assert r.t_log_t >= 0 and r.abs_dev >= 0


def test_abs_dev_lower_below_exact(identity, bsc):
    for ch, n in ((identity, 1), (bsc, 2), (bsc, 3)):
        full = WindowEvent.full()
        exact = B.exact_t_functionals(ch, n, 1.0).abs_dev
        assert B.windowed_abs_dev_lower_bound(ch, n, 1.0, full) <= exact + 1e-12
        w = WindowEvent(math.log(2), math.inf)
        assert B.windowed_abs_dev_lower_bound(ch, n, 1.0, w) <= exact + 1e-12


def test_t_log_t_lower_below_exact(bsc):
    for n in (1, 2):
        exact = B.exact_t_functionals(bsc, n, 0.55).t_log_t
        w = B.kl_converse_window(bsc, n, 0.55, 1.0)
        assert B.windowed_t_log_t_lower_bound(bsc, n, 0.55, w) <= exact
        assert B.windowed_t_log_t_lower_bound(bsc, n, 0.55, WindowEvent.full()) <= exact


def test_exact_expected_divergence_identity(identity):
    vals = [B.exact_expected_divergence(identity, 1, m) for m in range(1, 9)]
    kl = [v[0] for v in vals]
    assert kl[0] == pytest.approx(math.log(2), abs=1e-15)
    assert kl[1] == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert vals[1][1] == pytest.approx(0.25, abs=1e-15)
    assert all(b < a for a, b in zip(kl, kl[1:]))
    tv = [v[1] for v in vals]
    assert all(b <= a + 1e-15 for a, b in zip(tv, tv[1:]))


def test_exact_divergence_enumerates_codebooks(bsc):
    # full enumeration over ordered codebooks as an independent oracle
    from softcov.simulator import Codebook, exact_kl, exact_tv, induced_distribution
    n, m = 1, 3
    kl = tv = 0.0
    for cws in itertools.product(range(2), repeat=m):
        w = np.prod(bsc.input_dist[list(cws)])
        ind = induced_distribution(bsc, Codebook(n, np.array(cws).reshape(m, n), 0))
        kl += w * exact_kl(ind, bsc)
        tv += w * exact_tv(ind, bsc)
    got = B.exact_expected_divergence(bsc, n, m)
    assert got[0] == pytest.approx(kl, abs=1e-14)
    assert got[1] == pytest.approx(tv, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_singleton_average_is_n_times_mi(bsc, bec, n):
    for ch in (bsc, bec):
        kl, _ = B.exact_expected_divergence(ch, n, 1)
        assert kl == pytest.approx(n * C.mutual_information(ch), abs=1e-9)


def test_monotonicity_checks(trivial, bsc, identity):
    rep = B.monotonicity_report(trivial, "kl", 4, 50, 0)
    np.testing.assert_allclose(rep.means, 0.0, atol=1e-15)
    assert rep.passed
    assert B.fdivergence_monotonicity_check(bsc, "tv", 8, 500, 1, n=2)
    assert B.fdivergence_monotonicity_check(identity, "kl", 8, 500, 1)
    with pytest.raises(ValueError):
        B.fdivergence_monotonicity_check(bsc, "kl", 1, 10, 0)


def test_poisson_tail_constants():
    assert B.EPS_HALF == pytest.approx(math.sqrt(2) * math.exp(-0.5), rel=1e-15)
    assert B.EPS_HALF == pytest.approx(0.857763884960707, abs=1e-12)
    assert B.EPS_THREE_HALVES == pytest.approx(math.exp(0.5) / 1.5**1.5, rel=1e-15)
    r = B.poisson_tail_check(4.0, 100_000, 0)
    assert r.passed
