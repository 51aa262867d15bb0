import importlib
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softcov import _accel, kernels

NP = kernels.BACKENDS["numpy"]
NB = kernels.BACKENDS["numba"]


def _stochastic(rng, nx, ny):
    return rng.dirichlet(np.ones(ny), size=nx)


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_contract_rows_agree(seed, nx, ny, n):
    rng = np.random.default_rng(seed)
    W = _stochastic(rng, nx, ny)
    counts = rng.integers(0, 5, size=(3, nx**n)).astype(float)
    np.testing.assert_allclose(NB["contract_rows"](counts, W, n), NP["contract_rows"](counts, W, n), rtol=1e-12, atol=1e-15)


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_accumulate_agrees_with_contraction(seed, nx, ny, n, M):
    rng = np.random.default_rng(seed)
    W = _stochastic(rng, nx, ny)
    cw = rng.integers(0, nx, size=(M, n))
    a = NP["accumulate_codewords"](cw, W)
    b = NB["accumulate_codewords"](cw, W)
    idx = np.zeros(M, dtype=np.int64)
    for j in range(n):
        idx = idx * nx + cw[:, j]
    counts = np.bincount(idx, minlength=nx**n)[None, :].astype(float)
    c = NP["contract_rows"](counts, W, n)[0]
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-15)


@given(st.integers(0, 2**31), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_kl_tv_rows_agree(seed, K):
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(K), size=4)
    P[0, 0] = 0.0
    P[0] /= P[0].sum() if P[0].sum() > 0 else 1
    q = rng.dirichlet(np.ones(K))
    for a, b in zip(NP["kl_tv_rows"](P, q, np.log(q)), NB["kl_tv_rows"](P, q, np.log(q))):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_density_sums_agree(seed, nx, n):
    rng = np.random.default_rng(seed)
    ld = rng.normal(size=(nx, 3))
    ld[0, 0] = -np.inf
    cw = rng.integers(0, nx, size=(7, n))
    y = rng.integers(0, 3, size=n)
    np.testing.assert_array_equal(NP["density_sums"](cw, y, ld), NB["density_sums"](cw, y, ld))


@given(st.integers(0, 2**31), st.integers(1, 50))
@settings(max_examples=40, deadline=None)
def test_coalesce_agree(seed, k):
    rng = np.random.default_rng(seed)
    v = np.sort(np.round(rng.normal(size=k), 1))
    p = rng.random(k)
    a = NP["coalesce_sorted"](v, p, 1e-12)
    b = NB["coalesce_sorted"](v, p, 1e-12)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_allclose(a[1], b[1], rtol=1e-14)
    assert a[0].size == np.unique(v).size
    assert a[1].sum() == pytest.approx(p.sum())


def test_backend_flag():
    code = "from softcov import _accel, kernels; print(_accel.backend_name(), kernels.contract_rows is kernels.contract_rows_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env={"SOFTCOV_NO_NUMBA": "1", "PATH": ""},
                         capture_output=True, text=True, check=True).stdout.split()
    assert out == ["numpy", "True"]
    assert _accel.backend_name() in ("numba", "numpy")


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("SOFTCOV_THREADS", "3")
    assert _accel.thread_count() == 3
    monkeypatch.setenv("SOFTCOV_THREADS", "x")
    with pytest.raises(ValueError):
        _accel.thread_count()
