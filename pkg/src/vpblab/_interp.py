"""Vectorized polynomial interpolation on uniform tensor grids.

All routines take node coordinates implied by (lo, h, n) per axis and return
0.0 for query points outside the covered box (with an optional out-of-range
mask for callers that want to warn).
"""

from __future__ import annotations

import numpy as np


def _axis_coords(q, lo, h, n):
    """Fractional grid coordinate per axis, clipped index and offset."""
    t = (q - lo) / h
    i0 = np.floor(t).astype(np.int64)
    frac = t - i0
    return t, i0, frac


def trilinear(values: np.ndarray, lo, h, pts: np.ndarray,
              return_mask: bool = False):
    """Trilinear interpolation of ``values`` (n0,n1,n2) at ``pts`` (...,3).

    ``lo`` and ``h`` are per-axis first-node coordinates and spacings.
    Points outside the node hull evaluate to 0.
    """
    lo = np.asarray(lo, dtype=float)
    h = np.asarray(h, dtype=float)
    n = values.shape
    pts = np.asarray(pts, dtype=float)
    shape_out = pts.shape[:-1]
    q = pts.reshape(-1, 3)

    inside = np.ones(q.shape[0], dtype=bool)
    idx = []
    frs = []
    for a in range(3):
        t = (q[:, a] - lo[a]) / h[a]
        inside &= (t >= 0.0) & (t <= n[a] - 1)
        i0 = np.clip(np.floor(t).astype(np.int64), 0, n[a] - 2)
        idx.append(i0)
        frs.append(t - i0)

    i, j, k = idx
    fx, fy, fz = frs
    v = np.zeros(q.shape[0])
    for di in (0, 1):
        wi = fx if di else 1.0 - fx
        for dj in (0, 1):
            wj = fy if dj else 1.0 - fy
            for dk in (0, 1):
                wk = fz if dk else 1.0 - fz
                v += wi * wj * wk * values[i + di, j + dj, k + dk]
    v = np.where(inside, v, 0.0)
    v = v.reshape(shape_out)
    if return_mask:
        return v, (~inside).reshape(shape_out)
    return v


def _cubic_weights(f):
    """Catmull-Rom weights for the 4-node stencil at fractional offset f."""
    f2 = f * f
    f3 = f2 * f
    w0 = 0.5 * (-f3 + 2.0 * f2 - f)
    w1 = 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0)
    w2 = 0.5 * (-3.0 * f3 + 4.0 * f2 + f)
    w3 = 0.5 * (f3 - f2)
    return w0, w1, w2, w3


def tricubic(values: np.ndarray, lo, h, pts: np.ndarray,
             return_mask: bool = False):
    """Tricubic (Catmull-Rom) interpolation; falls back to the clamped
    stencil near edges. Points outside the node hull evaluate to 0."""
    lo = np.asarray(lo, dtype=float)
    h = np.asarray(h, dtype=float)
    n = values.shape
    pts = np.asarray(pts, dtype=float)
    shape_out = pts.shape[:-1]
    q = pts.reshape(-1, 3)

    inside = np.ones(q.shape[0], dtype=bool)
    base = []
    wts = []
    for a in range(3):
        t = (q[:, a] - lo[a]) / h[a]
        inside &= (t >= 0.0) & (t <= n[a] - 1)
        i0 = np.floor(t).astype(np.int64)
        f = t - i0
        # stencil nodes i0-1 .. i0+2, clamped into range
        i0 = np.clip(i0, 0, n[a] - 2)
        base.append(i0)
        wts.append(_cubic_weights(f))

    v = np.zeros(q.shape[0])
    for di in range(4):
        ii = np.clip(base[0] + di - 1, 0, n[0] - 1)
        wi = wts[0][di]
        for dj in range(4):
            jj = np.clip(base[1] + dj - 1, 0, n[1] - 1)
            wij = wi * wts[1][dj]
            for dk in range(4):
                kk = np.clip(base[2] + dk - 1, 0, n[2] - 1)
                v += wij * wts[2][dk] * values[ii, jj, kk]
    v = np.where(inside, v, 0.0)
    v = v.reshape(shape_out)
    if return_mask:
        return v, (~inside).reshape(shape_out)
    return v
