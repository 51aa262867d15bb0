"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``contract_rows``, ``kl_tv_rows`` ...) are bound to one of
the two variants according to :mod:`softcov._accel`.  Both variants are
deterministic and do not call BLAS, so results are bit-stable across batch
shapes and thread counts.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# channel contraction: codeword histograms -> induced output distributions
# ---------------------------------------------------------------------------


def contract_rows_numpy(counts, W, n):
    """Apply ``W^{(x)n}`` to each row of ``counts``.

    ``counts`` has shape ``(B, |X|**n)`` in mixed-radix order (first symbol
    most significant); the result has shape ``(B, |Y|**n)`` in the same order.
    """
    nx, ny = W.shape
    B = counts.shape[0]
    arr = np.ascontiguousarray(counts, dtype=np.float64)
    for _ in range(n):
        rest = arr.shape[1] // nx
        view = arr.reshape(B, nx, rest)
        out = np.zeros((B, rest, ny))
        for x in range(nx):
            out += view[:, x, :, None] * W[x]
        arr = out.reshape(B, rest * ny)
    return arr


@njit(cache=True, nogil=True)
def contract_rows_numba(counts, W, n):
    nx, ny = W.shape
    B = counts.shape[0]
    arr = counts.astype(np.float64)
    for _ in range(n):
        rest = arr.shape[1] // nx
        out = np.zeros((B, rest * ny))
        for b in range(B):
            for x in range(nx):
                base = x * rest
                for r in range(rest):
                    v = arr[b, base + r]
                    if v != 0.0:
                        for y in range(ny):
                            out[b, r * ny + y] += v * W[x, y]
        arr = out
    return arr


# ---------------------------------------------------------------------------
# relative entropy and TV of each row against a common target
# ---------------------------------------------------------------------------


def kl_tv_rows_numpy(P, q, log_q):
    P = np.asarray(P, dtype=np.float64)
    pos = P > 0
    safe = np.where(pos, P, 1.0)
    kl = np.where(pos, P * (np.log(safe) - log_q), 0.0).sum(axis=1)
    tv = 0.5 * np.abs(P - q).sum(axis=1)
    return kl, tv


@njit(cache=True, nogil=True)
def kl_tv_rows_numba(P, q, log_q):
    B, K = P.shape
    kl = np.zeros(B)
    tv = np.zeros(B)
    for b in range(B):
        s = 0.0
        t = 0.0
        for k in range(K):
            p = P[b, k]
            if p > 0.0:
                s += p * (np.log(p) - log_q[k])
            t += abs(p - q[k])
        kl[b] = s
        tv[b] = 0.5 * t
    return kl, tv


# ---------------------------------------------------------------------------
# direct accumulation, used when |X|**n is too large for histograms
# ---------------------------------------------------------------------------


def accumulate_codewords_numpy(codewords, W):
    M, n = codewords.shape
    ny = W.shape[1]
    acc = np.zeros(ny ** n)
    if M == 0:
        return acc
    uniq, mult = np.unique(codewords, axis=0, return_counts=True)
    for row, c in zip(uniq, mult):
        v = np.ones(1)
        for sym in row:
            v = np.multiply.outer(v, W[sym]).ravel()
        acc += c * v
    return acc


@njit(cache=True, nogil=True)
def accumulate_codewords_numba(codewords, W):
    M, n = codewords.shape
    ny = W.shape[1]
    size = ny ** n
    acc = np.zeros(size)
    buf = np.empty(size)
    nxt = np.empty(size)
    for k in range(M):
        buf[0] = 1.0
        cur = 1
        for i in range(n):
            row = W[codewords[k, i]]
            for j in range(cur):
                v = buf[j]
                for y in range(ny):
                    nxt[j * ny + y] = v * row[y]
            cur *= ny
            for j in range(cur):
                buf[j] = nxt[j]
        for j in range(size):
            acc[j] += buf[j]
    return acc


# ---------------------------------------------------------------------------
# per-codeword information density sums against one output sequence
# ---------------------------------------------------------------------------


def density_sums_numpy(codewords, y, log_density):
    if codewords.shape[0] == 0:
        return np.zeros(0)
    return log_density[codewords, y[None, :]].sum(axis=1)


@njit(cache=True, nogil=True)
def density_sums_numba(codewords, y, log_density):
    M, n = codewords.shape
    out = np.zeros(M)
    for k in range(M):
        s = 0.0
        for i in range(n):
            s += log_density[codewords[k, i], y[i]]
        out[k] = s
    return out


# ---------------------------------------------------------------------------
# value coalescing for exact convolutions
# ---------------------------------------------------------------------------


def coalesce_sorted_numpy(values, probs, tol):
    if values.size == 0:
        return values.copy(), probs.copy()
    new_group = np.empty(values.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(values) > tol
    gid = np.cumsum(new_group) - 1
    mass = np.bincount(gid, weights=probs)
    moment = np.bincount(gid, weights=probs * values)
    first = values[new_group]
    out = np.where(mass > 0, moment / np.where(mass > 0, mass, 1.0), first)
    return out, mass


@njit(cache=True, nogil=True)
def coalesce_sorted_numba(values, probs, tol):
    m = values.size
    out_v = np.empty(m)
    out_p = np.empty(m)
    if m == 0:
        return out_v, out_p
    g = 0
    mass = probs[0]
    moment = probs[0] * values[0]
    first = values[0]
    for i in range(1, m):
        if values[i] - values[i - 1] > tol:
            out_v[g] = moment / mass if mass > 0 else first
            out_p[g] = mass
            g += 1
            mass = 0.0
            moment = 0.0
            first = values[i]
        mass += probs[i]
        moment += probs[i] * values[i]
    out_v[g] = moment / mass if mass > 0 else first
    out_p[g] = mass
    return out_v[: g + 1].copy(), out_p[: g + 1].copy()


if USE_NUMBA:
    contract_rows = contract_rows_numba
    kl_tv_rows = kl_tv_rows_numba
    accumulate_codewords = accumulate_codewords_numba
    density_sums = density_sums_numba
    coalesce_sorted = coalesce_sorted_numba
else:
    contract_rows = contract_rows_numpy
    kl_tv_rows = kl_tv_rows_numpy
    accumulate_codewords = accumulate_codewords_numpy
    density_sums = density_sums_numpy
    coalesce_sorted = coalesce_sorted_numpy

BACKENDS = {
    "numpy": {
        "contract_rows": contract_rows_numpy,
        "kl_tv_rows": kl_tv_rows_numpy,
        "accumulate_codewords": accumulate_codewords_numpy,
        "density_sums": density_sums_numpy,
        "coalesce_sorted": coalesce_sorted_numpy,
    },
    "numba": {
        "contract_rows": contract_rows_numba,
        "kl_tv_rows": kl_tv_rows_numba,
        "accumulate_codewords": accumulate_codewords_numba,
        "density_sums": density_sums_numba,
        "coalesce_sorted": coalesce_sorted_numba,
    },
}
