"""Shared quadrature builders: Gauss-Legendre segments, product sphere
rules, graded (geometrically refined) panel rules for near-singular
integrands."""

from __future__ import annotations

import numpy as np


def gauss_legendre(n: int, a: float, b: float):
    """n-point Gauss-Legendre nodes/weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    xm, xr = 0.5 * (a + b), 0.5 * (b - a)
    return xm + xr * x, xr * w


def sphere_quadrature(n_polar: int, n_azimuth: int | None = None,
                      axis: np.ndarray | None = None):
    """Product rule on S^2: Gauss-Legendre in cos(theta) x uniform azimuth.

    Returns (dirs (N,3), weights (N,)) with sum(weights) = 4*pi. If ``axis``
    is given the polar axis is rotated onto it.
    """
    if n_azimuth is None:
        n_azimuth = 2 * n_polar
    mu, wmu = np.polynomial.legendre.leggauss(n_polar)
    phi = (np.arange(n_azimuth) + 0.5) * (2.0 * np.pi / n_azimuth)
    wphi = 2.0 * np.pi / n_azimuth
    MU, PHI = np.meshgrid(mu, phi, indexing="ij")
    S = np.sqrt(1.0 - MU ** 2)
    dirs = np.stack([S * np.cos(PHI), S * np.sin(PHI), MU], axis=-1).reshape(-1, 3)
    w = (wmu[:, None] * np.full(n_azimuth, wphi)[None, :]).reshape(-1)
    if axis is not None:
        R = rotation_to(np.asarray(axis, dtype=float))
        dirs = dirs @ R.T
    return dirs, w


def rotation_to(axis: np.ndarray) -> np.ndarray:
    """Rotation matrix mapping e_z onto the unit vector along ``axis``."""
    a = axis / np.linalg.norm(axis)
    ez = np.array([0.0, 0.0, 1.0])
    v = np.cross(ez, a)
    c = ez @ a
    if np.linalg.norm(v) < 1e-14:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx * (1.0 / (1.0 + c))


def graded_panels(a: float, b: float, levels: int, ratio: float = 4.0):
    """Panel edges on [a, b] geometrically refined toward ``a``.

    Level k subdivides with edges a + (b-a)*ratio^{-j}, j = 0..k.
    """
    edges = [b]
    for j in range(1, levels + 1):
        edges.append(a + (b - a) * ratio ** (-j))
    edges.append(a)
    return np.array(edges[::-1])


def panel_gauss(edges: np.ndarray, n_per_panel: int):
    """Composite Gauss-Legendre rule over consecutive panel edges."""
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(n_per_panel, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def tangent_basis(n: np.ndarray):
    """Orthonormal (t1, t2) completing the unit vector n to a frame."""
    n = np.asarray(n, dtype=float)
    k = np.argmin(np.abs(n))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = np.cross(n, e)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2
