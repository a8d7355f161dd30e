"""Hot numeric loops, with a numba path and a pure-numpy path.

The numba versions are used when numba imports and the environment
variable ``TDOA_BIF_DISABLE_NUMBA`` is unset (or ``0``).  Both paths are
importable directly (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("TDOA_BIF_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# polynomial evaluation


def poly_eval_numpy(ii, jj, cc, x, y):
    if cc.size == 0:
        return np.zeros_like(x)
    terms = cc[None, :] * x[:, None] ** ii[None, :] * y[:, None] ** jj[None, :]
    # np.sum reduces pairwise along the contiguous axis
    return np.sum(terms, axis=1)


@_njit
def poly_eval_numba(ii, jj, cc, x, y):
    n = x.shape[0]
    out = np.empty(n)
    for k in range(n):
        s = 0.0
        comp = 0.0
        for t in range(cc.shape[0]):
            v = cc[t] * x[k] ** ii[t] * y[k] ** jj[t]
            # Neumaier compensated sum
            tot = s + v
            if abs(s) >= abs(v):
                comp += (s - tot) + v
            else:
                comp += (v - tot) + s
            s = tot
        out[k] = s + comp
    return out


# ---------------------------------------------------------------------------
# closed-form inverse of the TDOA map


def _solve_frame(m):
    d10x = m[1, 0] - m[0, 0]
    d10y = m[1, 1] - m[0, 1]
    d20x = m[2, 0] - m[0, 0]
    d20y = m[2, 1] - m[0, 1]
    w = d10x * d20y - d10y * d20x
    return d10x, d10y, d20x, d20y, w


def localize_batch_numpy(m, taus, deg_tol, disc_tol, res_tol):
    n = taus.shape[0]
    d10x, d10y, d20x, d20y, w = _solve_frame(m)
    scale = max(np.hypot(d10x, d10y), np.hypot(d20x, d20y))
    t1 = taus[:, 0]
    t2 = taus[:, 1]
    b1 = 0.5 * (d10x * d10x + d10y * d10y - t1 * t1)
    b2 = 0.5 * (d20x * d20x + d20y * d20y - t2 * t2)
    px = (d20y * b1 - d10y * b2) / w
    py = (-d20x * b1 + d10x * b2) / w
    qx = -(d20y * t1 - d10y * t2) / w
    qy = -(-d20x * t1 + d10x * t2) / w
    A = qx * qx + qy * qy - 1.0
    B = px * qx + py * qy
    C = px * px + py * py

    degenerate = np.abs(A) < deg_tol
    tangential = np.zeros(n, dtype=np.bool_)
    roots = np.full((n, 2), np.nan)

    with np.errstate(divide="ignore", invalid="ignore"):
        lin = degenerate & (B != 0.0)
        roots[lin, 0] = -C[lin] / (2.0 * B[lin])

        quad = ~degenerate
        disc = B * B - A * C
        ref = B * B + np.abs(A * C)
        double = quad & (np.abs(disc) <= disc_tol * ref)
        roots[double, 0] = -B[double] / A[double]
        tangential[double] = True

        two = quad & (disc > disc_tol * ref)
        sq = np.sqrt(np.where(two, disc, 0.0))
        k = -(B + np.where(B >= 0.0, sq, -sq))
        roots[two, 0] = k[two] / A[two]
        roots[two, 1] = C[two] / k[two]

    # tiny negative ranges are rounding around a source sitting on m0
    near0 = (roots < 0.0) & (roots > -1e-9 * scale)
    roots[near0] = 0.0
    roots[~(roots >= 0.0)] = np.nan

    sx = m[0, 0] + px[:, None] + qx[:, None] * roots
    sy = m[0, 1] + py[:, None] + qy[:, None] * roots
    d0 = np.hypot(sx - m[0, 0], sy - m[0, 1])
    d1 = np.hypot(sx - m[1, 0], sy - m[1, 1])
    d2 = np.hypot(sx - m[2, 0], sy - m[2, 1])
    tol = res_tol * (1.0 + roots)
    ok = (
        np.isfinite(roots)
        & (np.abs(d1 - d0 - t1[:, None]) < tol)
        & (np.abs(d2 - d0 - t2[:, None]) < tol)
    )

    # order by range, then drop coincident pairs
    swap = ok[:, 1] & (~ok[:, 0] | (roots[:, 1] < roots[:, 0]))
    for arr in (roots, sx, sy, ok):
        a0 = arr[:, 0].copy()
        arr[swap, 0] = arr[swap, 1]
        arr[swap, 1] = a0[swap]
    same = ok[:, 0] & ok[:, 1] & (
        np.hypot(sx[:, 0] - sx[:, 1], sy[:, 0] - sy[:, 1]) <= 1e-12 * (1.0 + scale + roots[:, 1])
    )
    ok[same, 1] = False
    tangential |= same

    counts = ok.sum(axis=1).astype(np.int64)
    src = np.full((n, 2, 2), np.nan)
    src[:, :, 0] = np.where(ok, sx, np.nan)
    src[:, :, 1] = np.where(ok, sy, np.nan)
    d0_out = np.where(ok, roots, np.nan)
    return counts, src, d0_out, degenerate, tangential


@_njit
def localize_batch_numba(m, taus, deg_tol, disc_tol, res_tol):
    n = taus.shape[0]
    d10x = m[1, 0] - m[0, 0]
    d10y = m[1, 1] - m[0, 1]
    d20x = m[2, 0] - m[0, 0]
    d20y = m[2, 1] - m[0, 1]
    w = d10x * d20y - d10y * d20x
    scale = max(np.hypot(d10x, d10y), np.hypot(d20x, d20y))

    counts = np.zeros(n, dtype=np.int64)
    src = np.full((n, 2, 2), np.nan)
    d0_out = np.full((n, 2), np.nan)
    degenerate = np.zeros(n, dtype=np.bool_)
    tangential = np.zeros(n, dtype=np.bool_)
    cand = np.empty(2)

    for k in range(n):
        t1 = taus[k, 0]
        t2 = taus[k, 1]
        b1 = 0.5 * (d10x * d10x + d10y * d10y - t1 * t1)
        b2 = 0.5 * (d20x * d20x + d20y * d20y - t2 * t2)
        px = (d20y * b1 - d10y * b2) / w
        py = (-d20x * b1 + d10x * b2) / w
        qx = -(d20y * t1 - d10y * t2) / w
        qy = -(-d20x * t1 + d10x * t2) / w
        A = qx * qx + qy * qy - 1.0
        B = px * qx + py * qy
        C = px * px + py * py

        nc = 0
        if abs(A) < deg_tol:
            degenerate[k] = True
            if B != 0.0:
                cand[0] = -C / (2.0 * B)
                nc = 1
        else:
            disc = B * B - A * C
            ref = B * B + abs(A * C)
            if abs(disc) <= disc_tol * ref:
                cand[0] = -B / A
                nc = 1
                tangential[k] = True
            elif disc > 0.0:
                sq = np.sqrt(disc)
                q = -(B + sq) if B >= 0.0 else -(B - sq)
                cand[0] = q / A
                cand[1] = C / q
                nc = 2

        found = 0
        for c in range(nc):
            r = cand[c]
            if r < 0.0:
                if r > -1e-9 * scale:
                    r = 0.0
                else:
                    continue
            sx = m[0, 0] + px + qx * r
            sy = m[0, 1] + py + qy * r
            d0 = np.hypot(sx - m[0, 0], sy - m[0, 1])
            d1 = np.hypot(sx - m[1, 0], sy - m[1, 1])
            d2 = np.hypot(sx - m[2, 0], sy - m[2, 1])
            tol = res_tol * (1.0 + r)
            if abs(d1 - d0 - t1) < tol and abs(d2 - d0 - t2) < tol:
                if found == 1:
                    if np.hypot(sx - src[k, 0, 0], sy - src[k, 0, 1]) <= 1e-12 * (1.0 + scale + r):
                        tangential[k] = True
                        continue
                    if r < d0_out[k, 0]:
                        src[k, 1, 0] = src[k, 0, 0]
                        src[k, 1, 1] = src[k, 0, 1]
                        d0_out[k, 1] = d0_out[k, 0]
                        src[k, 0, 0] = sx
                        src[k, 0, 1] = sy
                        d0_out[k, 0] = r
                        found = 2
                        continue
                src[k, found, 0] = sx
                src[k, found, 1] = sy
                d0_out[k, found] = r
                found += 1
        counts[k] = found
    return counts, src, d0_out, degenerate, tangential


# ---------------------------------------------------------------------------
# damped Newton on the branch residual system


def _residual_numpy(m, tau, x, y):
    d0 = np.hypot(x - m[0, 0], y - m[0, 1])
    d1 = np.hypot(x - m[1, 0], y - m[1, 1])
    d2 = np.hypot(x - m[2, 0], y - m[2, 1])
    return d1 - d0 - tau[0], d2 - d0 - tau[1], d0, d1, d2


def newton_batch_numpy(m, tau, starts, maxit, tol):
    x = starts[:, 0].astype(float).copy()
    y = starts[:, 1].astype(float).copy()
    k = x.shape[0]
    active = np.ones(k, dtype=np.bool_)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(maxit):
            r1, r2, d0, d1, d2 = _residual_numpy(m, tau, x, y)
            norm = np.hypot(r1, r2)
            active &= norm > 0.0
            if not active.any():
                break
            u0x, u0y = (x - m[0, 0]) / d0, (y - m[0, 1]) / d0
            j11 = (x - m[1, 0]) / d1 - u0x
            j12 = (y - m[1, 1]) / d1 - u0y
            j21 = (x - m[2, 0]) / d2 - u0x
            j22 = (y - m[2, 1]) / d2 - u0y
            det = j11 * j22 - j12 * j21
            bad = ~np.isfinite(det) | (np.abs(det) < 1e-300)
            active &= ~bad
            dx = np.where(active, -(j22 * r1 - j12 * r2) / det, 0.0)
            dy = np.where(active, -(-j21 * r1 + j11 * r2) / det, 0.0)
            step = np.ones(k)
            pending = active.copy()
            nx, ny = x, y
            for _h in range(40):
                nx = np.where(pending, x + step * dx, nx)
                ny = np.where(pending, y + step * dy, ny)
                s1, s2, _a, _b, _c = _residual_numpy(m, tau, nx, ny)
                better = np.hypot(s1, s2) < norm
                pending &= ~better
                if not pending.any():
                    break
                step = np.where(pending, 0.5 * step, step)
            active &= ~pending
            x = np.where(active, nx, x)
            y = np.where(active, ny, y)
            active &= np.hypot(x, y) < 1e12
        r1, r2, _a, _b, _c = _residual_numpy(m, tau, x, y)
        converged = np.hypot(r1, r2) < tol
    out = np.stack([x, y], axis=1)
    return out, converged


@_njit
def newton_batch_numba(m, tau, starts, maxit, tol):
    k = starts.shape[0]
    out = np.empty((k, 2))
    converged = np.zeros(k, dtype=np.bool_)
    for s in range(k):
        x = starts[s, 0]
        y = starts[s, 1]
        for _ in range(maxit):
            d0 = np.hypot(x - m[0, 0], y - m[0, 1])
            d1 = np.hypot(x - m[1, 0], y - m[1, 1])
            d2 = np.hypot(x - m[2, 0], y - m[2, 1])
            r1 = d1 - d0 - tau[0]
            r2 = d2 - d0 - tau[1]
            norm = np.hypot(r1, r2)
            if norm == 0.0:
                break
            if d0 == 0.0 or d1 == 0.0 or d2 == 0.0:
                break
            u0x = (x - m[0, 0]) / d0
            u0y = (y - m[0, 1]) / d0
            j11 = (x - m[1, 0]) / d1 - u0x
            j12 = (y - m[1, 1]) / d1 - u0y
            j21 = (x - m[2, 0]) / d2 - u0x
            j22 = (y - m[2, 1]) / d2 - u0y
            det = j11 * j22 - j12 * j21
            if not np.isfinite(det) or abs(det) < 1e-300:
                break
            dx = -(j22 * r1 - j12 * r2) / det
            dy = -(-j21 * r1 + j11 * r2) / det
            step = 1.0
            improved = False
            nx = x
            ny = y
            for _h in range(40):
                nx = x + step * dx
                ny = y + step * dy
                e0 = np.hypot(nx - m[0, 0], ny - m[0, 1])
                e1 = np.hypot(nx - m[1, 0], ny - m[1, 1])
                e2 = np.hypot(nx - m[2, 0], ny - m[2, 1])
                if np.hypot(e1 - e0 - tau[0], e2 - e0 - tau[1]) < norm:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            x = nx
            y = ny
            if np.hypot(x, y) > 1e12:
                break
        d0 = np.hypot(x - m[0, 0], y - m[0, 1])
        d1 = np.hypot(x - m[1, 0], y - m[1, 1])
        d2 = np.hypot(x - m[2, 0], y - m[2, 1])
        converged[s] = np.hypot(d1 - d0 - tau[0], d2 - d0 - tau[1]) < tol
        out[s, 0] = x
        out[s, 1] = y
    return out, converged


if USE_NUMBA:
    poly_eval = poly_eval_numba
    localize_batch = localize_batch_numba
    newton_batch = newton_batch_numba
else:
    poly_eval = poly_eval_numpy
    localize_batch = localize_batch_numpy
    newton_batch = newton_batch_numpy
