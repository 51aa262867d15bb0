"""Independent brute-force codings used as test oracles."""
import itertools
import math

import numpy as np


def alpha_mi_loops(ch, alpha):
    px, W = ch.input_dist, ch.transition
    py = [sum(px[x] * W[x, y] for x in range(len(px))) for y in range(W.shape[1])]
    total = 0.0
    for y in range(W.shape[1]):
        inner = sum(px[x] * (W[x, y] / py[y]) ** alpha for x in range(len(px)))
        total += py[y] * inner ** (1.0 / alpha)
    return alpha / (alpha - 1.0) * math.log(total)


def csiszar_objective_loops(ch, q, alpha):
    px, W = ch.input_dist, ch.transition
    val = 0.0
    for x in range(len(px)):
        s = sum(W[x, y] ** alpha * q[y] ** (1 - alpha) for y in range(len(q)) if W[x, y] > 0)
        val += px[x] * math.log(s) / (alpha - 1)
    return val


def csiszar_grid_oracle(ch, alpha, step=1e-4):
    """Minimum over a simplex grid (|Y| = 2 exact grid, |Y| = 3 coarse-to-fine)."""
    px, W = ch.input_dist, ch.transition
    ny = W.shape[1]

    def objective(Q):  # Q: (k, ny)
        with np.errstate(divide="ignore"):
            lw = np.log(W)
            lq = np.log(Q)
        t = np.where(W[None] > 0, alpha * lw[None] + (1 - alpha) * lq[:, None, :], -np.inf)
        m = t.max(axis=2, keepdims=True)
        ls = (m[..., 0] + np.log(np.exp(t - m).sum(axis=2)))
        return (ls / (alpha - 1)) @ px

    if ny == 2:
        q = np.arange(1, int(round(1 / step))) * step
        return float(objective(np.column_stack([q, 1 - q])).min())
    assert ny == 3
    best, centre, h = math.inf, None, 1e-2
    a, b = np.meshgrid(np.arange(1, 100) * h, np.arange(1, 100) * h)
    pts = np.column_stack([a.ravel(), b.ravel()])
    pts = pts[pts.sum(axis=1) < 1 - 1e-12]
    Q = np.column_stack([pts, 1 - pts.sum(axis=1)])
    v = objective(Q)
    centre = Q[v.argmin(), :2]
    while h > step:
        h /= 10
        off = np.arange(-10, 11) * h
        a, b = np.meshgrid(centre[0] + off, centre[1] + off)
        pts = np.column_stack([a.ravel(), b.ravel()])
        pts = pts[(pts > 0).all(axis=1) & (pts.sum(axis=1) < 1)]
        Q = np.column_stack([pts, 1 - pts.sum(axis=1)])
        v = objective(Q)
        centre = Q[v.argmin(), :2]
        best = float(v.min())
    return best


def _chunked_argmax(f, lo, hi, step=1e-6, chunk=200_000):
    grid = np.arange(lo, hi + step / 2, step)
    best_v, best_x = -math.inf, None
    for a in range(0, grid.size, chunk):
        g = grid[a:a + chunk]
        v = f(g)
        i = int(np.argmax(v))
        if v[i] > best_v:
            best_v, best_x = float(v[i]), float(g[i])
    return best_x, best_v


def tau_grid_argmax(ch, rate, step=1e-6):
    m = ch.support
    lj, ld = ch.log_joint[m], ch.log_density[m]

    def f(t):
        z = lj[None, :] + t[:, None] * ld[None, :]
        mx = z.max(axis=1)
        return t * rate - (mx + np.log(np.exp(z - mx[:, None]).sum(axis=1)))
    return _chunked_argmax(f, 0.0, 1.0, step)


def rho_grid_argmax(ch, rate, step=1e-6):
    """Grid argmax of rho (R - I_{1/(1-rho)}) using the Sibson formula directly."""
    px, py = ch.input_dist, ch.output_marginal
    m = ch.support
    ld = np.where(m, ch.log_density, 0.0)

    def f(r):
        alpha = 1 / (1 - r)
        z = np.where(m[None], np.log(px)[None, :, None] + alpha[:, None, None] * ld[None], -np.inf)
        mx = z.max(axis=1)
        inner = mx + np.log(np.exp(z - mx[:, None, :]).sum(axis=1))
        w = np.log(py)[None, :] + inner / alpha[:, None]
        mw = w.max(axis=1)
        # rho * I_alpha is the log-sum itself, since alpha / (alpha - 1) = 1 / rho
        return r * rate - (mw + np.log(np.exp(w - mw[:, None]).sum(axis=1)))

    x, v = _chunked_argmax(f, step, 0.5, step, chunk=100_000)
    return (0.0, 0.0) if v < 0 else (x, v)


def hayashi_loops(ch, n, M):
    px, W, py = ch.input_dist, ch.transition, ch.output_marginal
    total = 0.0
    for xs in itertools.product(range(len(px)), repeat=n):
        for ys in itertools.product(range(W.shape[1]), repeat=n):
            pxy = 1.0
            ratio = 1.0
            for x, y in zip(xs, ys):
                pxy *= px[x] * W[x, y]
                ratio *= W[x, y] / py[y] if W[x, y] > 0 else 0.0
            if pxy > 0:
                total += pxy * math.log(1 + ratio / M)
    return total
