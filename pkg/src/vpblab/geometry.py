"""Bounded convex domains represented by smooth level sets.

A domain is Omega = { x : xi(x) < 0 } for a smooth scalar field xi with
nonvanishing gradient near the zero set. The module provides membership
tests, outward normals, closest-boundary-point projection, a curvature
based convexity audit, and boundary/volume quadrature for star-shaped
convex bodies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._quad import sphere_quadrature, gauss_legendre, tangent_basis


class GeometryError(Exception):
    pass


class NotOnBoundary(GeometryError):
    pass


class DegenerateGradient(GeometryError):
    pass


class AmbiguousProjection(GeometryError):
    def __init__(self, candidates):
        self.candidates = candidates
        msg = ", ".join(f"(x_bar={c[0]}, d={c[1]:.6g})" for c in candidates)
        super().__init__(f"distance minimizer not unique: {msg}")


class ProjectionDivergence(GeometryError):
    pass


class ConvexityViolation(GeometryError):
    def __init__(self, point, direction, value):
        self.point = point
        self.direction = direction
        self.value = value
        super().__init__(
            f"tangential curvature {value:.6g} < 0 at p={point}, zeta={direction}")


@dataclass(frozen=True)
class BoundaryPoint:
    """Point on the boundary with its outward unit normal."""
    position: np.ndarray
    normal: np.ndarray


@dataclass
class BoundaryQuadrature:
    points: np.ndarray   # (N,3)
    normals: np.ndarray  # (N,3)
    weights: np.ndarray  # (N,)

    def __iter__(self):
        for p, n, w in zip(self.points, self.normals, self.weights):
            yield BoundaryPoint(p, n), w

    @property
    def total(self) -> float:
        return float(self.weights.sum())


@dataclass
class VolumeQuadrature:
    points: np.ndarray   # (N,3)
    weights: np.ndarray  # (N,)

    @property
    def total(self) -> float:
        return float(self.weights.sum())


@dataclass
class LevelSetDomain:
    """Convex domain Omega = {xi < 0} with derivative evaluators.

    ``xi``, ``grad_xi``, ``hess_xi`` must accept arrays of shape (...,3) and
    return shapes (...), (...,3), (...,3,3) respectively.
    """
    xi: Callable[[np.ndarray], np.ndarray]
    grad_xi: Callable[[np.ndarray], np.ndarray]
    hess_xi: Callable[[np.ndarray], np.ndarray]
    bounding_box: np.ndarray           # (2,3) [lo; hi], contains closure of Omega
    convexity_constant: float = 0.0    # required curvature floor C_Omega
    delta_shell: Optional[float] = None  # collar width; default 0.1*inradius
    anchor: Optional[np.ndarray] = None  # interior point for ray parametrization
    name: str = "custom"
    # Quadratic level sets xi = x^T A x + b.x + c admit exact ray exits.
    quadratic: Optional[tuple] = None  # (A (3,3), b (3,), c)

    eps_grad: float = 1e-12
    _inradius: float = field(default=0.0, init=False, repr=False)

    def __post_init__(self):
        self.bounding_box = np.asarray(self.bounding_box, dtype=float)
        if self.anchor is None:
            self.anchor = 0.5 * (self.bounding_box[0] + self.bounding_box[1])
        self.anchor = np.asarray(self.anchor, dtype=float)
        if not self.xi(self.anchor) < 0:
            raise GeometryError("anchor point is not interior (xi >= 0)")
        # inradius estimate from a direction sweep
        dirs, _ = sphere_quadrature(8, 16)
        r = self._ray_to_boundary(np.tile(self.anchor, (len(dirs), 1)), dirs)
        self._inradius = float(np.min(r))
        if self.delta_shell is None:
            self.delta_shell = 0.1 * self._inradius

    # -- basic queries ----------------------------------------------------

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.bounding_box[1] - self.bounding_box[0]))

    @property
    def tol_boundary(self) -> float:
        return 1e-9 * self.diameter

    @property
    def inradius(self) -> float:
        return self._inradius

    def contains(self, x) -> np.ndarray | bool:
        """True iff xi(x) < 0 (the boundary itself is not interior)."""
        val = self.xi(np.asarray(x, dtype=float))
        return val < 0.0

    def unit_normal(self, x) -> np.ndarray:
        """Outward unit normal gradient direction, no boundary check."""
        g = self.grad_xi(np.asarray(x, dtype=float))
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        return g / norm

    def outward_normal(self, x) -> np.ndarray:
        """Outward unit normal at a boundary point.

        Raises NotOnBoundary if |xi(x)| exceeds the boundary tolerance and
        DegenerateGradient if the level-set gradient is numerically zero.
        """
        x = np.asarray(x, dtype=float)
        if abs(float(self.xi(x))) > self.tol_boundary:
            raise NotOnBoundary(f"|xi(x)| = {abs(float(self.xi(x))):.3e} "
                                f"> {self.tol_boundary:.3e}")
        g = self.grad_xi(x)
        norm = float(np.linalg.norm(g))
        if norm < self.eps_grad:
            raise DegenerateGradient(f"|grad xi| = {norm:.3e}")
        return g / norm

    # -- ray / boundary utilities ----------------------------------------

    def _ray_to_boundary(self, origins: np.ndarray, dirs: np.ndarray,
                         tol: float | None = None) -> np.ndarray:
        """Distance along unit ``dirs`` from interior ``origins`` to xi = 0.

        Vectorized bracketing + bisection; exact for quadratic level sets.
        """
        origins = np.atleast_2d(origins)
        dirs = np.atleast_2d(dirs)
        if self.quadratic is not None:
            return self._ray_quadratic(origins, dirs)
        if tol is None:
            tol = 1e-13 * self.diameter
        r_hi = np.full(len(origins), 0.25 * self.diameter)
        for _ in range(60):
            outside = self.xi(origins + r_hi[:, None] * dirs) > 0
            if outside.all():
                break
            r_hi = np.where(outside, r_hi, 2.0 * r_hi)
        lo = np.zeros(len(origins))
        hi = r_hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            inside = self.xi(origins + mid[:, None] * dirs) < 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
            if np.max(hi - lo) < tol:
                break
        return 0.5 * (lo + hi)

    def _ray_quadratic(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Positive root of xi(o + t d) = 0 for quadratic xi, o interior."""
        A, b, c = self.quadratic
        qa = np.einsum("ni,ij,nj->n", dirs, A, dirs)
        qb = 2.0 * np.einsum("ni,ij,nj->n", origins, A, dirs) + dirs @ b
        qc = np.einsum("ni,ij,nj->n", origins, A, origins) + origins @ b + c
        disc = np.maximum(qb * qb - 4.0 * qa * qc, 0.0)
        sq = np.sqrt(disc)
        # qc < 0 inside; stable root pair, keep the positive one
        q = -0.5 * (qb + np.sign(qb + (qb == 0)) * sq)
        t1 = q / qa
        t2 = qc / q
        t = np.where(t1 > 0, t1, t2)
        return t

    def boundary_point_along(self, direction: np.ndarray) -> BoundaryPoint:
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        r = self._ray_to_boundary(self.anchor[None, :], d[None, :])[0]
        p = self.anchor + r * d
        return BoundaryPoint(p, self.unit_normal(p))

    # -- closest boundary point -------------------------------------------

    def _project_one(self, x: np.ndarray, y0: np.ndarray,
                     max_iter: int = 100, damping: float = 0.8):
        """Damped tangential descent on the constraint surface from y0."""
        y = y0.copy()
        tol = 1e-12 * self.diameter
        for _ in range(max_iter):
            # Newton re-projection onto xi = 0
            for _ in range(3):
                g = self.grad_xi(y)
                gn2 = float(g @ g)
                if gn2 < self.eps_grad ** 2:
                    raise DegenerateGradient("projection hit a critical point")
                y = y - (float(self.xi(y)) / gn2) * g
            g = self.grad_xi(y)
            n = g / np.linalg.norm(g)
            r = y - x
            r_t = r - (r @ n) * n
            if np.linalg.norm(r_t) < tol:
                return y, float(np.linalg.norm(y - x))
            y = y - damping * r_t
        raise ProjectionDivergence(
            f"closest-point iteration did not converge from {y0}")

    def closest_boundary_point(self, x) -> tuple[BoundaryPoint, float]:
        """Closest boundary point x_bar and the distance d(x, dOmega).

        Inside the collar (d < delta_shell) the minimizer is unique and a
        single start suffices; elsewhere a multi-start sweep is run and two
        distinct minimizers within tolerance raise AmbiguousProjection.
        """
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise GeometryError("closest_boundary_point expects an interior point")
        starts = []
        g = self.grad_xi(x)
        if np.linalg.norm(g) > 1e-8:
            starts.append(g / np.linalg.norm(g))
        for k in range(3):
            for s in (+1.0, -1.0):
                e = np.zeros(3)
                e[k] = s
                starts.append(e)
        cands = []
        for d0 in starts:
            r = self._ray_to_boundary(x[None, :], d0[None, :])[0]
            try:
                y, dist = self._project_one(x, x + r * d0)
            except (ProjectionDivergence, DegenerateGradient):
                continue
            cands.append((y, dist))
        if not cands:
            raise ProjectionDivergence(f"no converged projection from x={x}")
        cands.sort(key=lambda c: c[1])
        best_y, best_d = cands[0]
        sep_tol = 1e-6 * self.diameter
        distinct = [(best_y, best_d)]
        for y, dist in cands[1:]:
            if np.linalg.norm(y - best_y) > sep_tol and dist - best_d < sep_tol:
                distinct.append((y, dist))
        if len(distinct) > 1 and best_d > self.delta_shell:
            raise AmbiguousProjection(distinct)
        return BoundaryPoint(best_y, self.unit_normal(best_y)), best_d

    def closest_boundary_points(self, X: np.ndarray,
                                max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized single-start projection for batches of interior points.

        Intended for collar points where the projection is unique; no
        ambiguity detection is attempted.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        g = self.grad_xi(X)
        gn = np.linalg.norm(g, axis=-1, keepdims=True)
        dirs = np.where(gn > 1e-12, g / np.maximum(gn, 1e-300),
                        np.array([1.0, 0.0, 0.0]))
        r = self._ray_to_boundary(X, dirs)
        Y = X + r[:, None] * dirs
        tol = 1e-12 * self.diameter
        active = np.ones(len(X), dtype=bool)
        for _ in range(max_iter):
            for _ in range(2):
                g = self.grad_xi(Y[active])
                gn2 = np.einsum("ni,ni->n", g, g)
                Y[active] -= (self.xi(Y[active]) / gn2)[:, None] * g
            g = self.grad_xi(Y[active])
            n = g / np.linalg.norm(g, axis=-1, keepdims=True)
            r = Y[active] - X[active]
            r_t = r - np.einsum("ni,ni->n", r, n)[:, None] * n
            Y[active] -= 0.8 * r_t
            res = np.linalg.norm(r_t, axis=-1)
            done = res < tol
            idx = np.where(active)[0]
            active[idx[done]] = False
            if not active.any():
                break
        d = np.linalg.norm(Y - X, axis=-1)
        return Y, d

    # -- convexity audit ---------------------------------------------------

    def check_convexity(self, n_samples: int = 256, rng_seed: int = 0,
                        raise_on_violation: bool = True) -> dict:
        """Sample the boundary and report the minimal tangential curvature.

        At each sampled p the quantity min_zeta zeta^T (H xi) zeta / |grad xi|
        over unit tangents zeta is the smallest normal curvature (positive
        for a strictly convex body). Returns {"min_margin", "witnesses",
        "conforming"} with conforming = (min_margin >= convexity_constant).
        """
        rng = np.random.default_rng(rng_seed)
        dirs = rng.normal(size=(n_samples, 3))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        r = self._ray_to_boundary(np.tile(self.anchor, (n_samples, 1)), dirs)
        P = self.anchor + r[:, None] * dirs

        worst = []
        min_margin = np.inf
        for p in P:
            g = self.grad_xi(p)
            gn = np.linalg.norm(g)
            n = g / gn
            t1, t2 = tangent_basis(n)
            T = np.stack([t1, t2], axis=1)  # (3,2)
            H2 = T.T @ self.hess_xi(p) @ T / gn
            evals, evecs = np.linalg.eigh(0.5 * (H2 + H2.T))
            lam = float(evals[0])
            zeta = T @ evecs[:, 0]
            worst.append((lam, p.copy(), zeta))
            min_margin = min(min_margin, lam)
        worst.sort(key=lambda w: w[0])
        if raise_on_violation and min_margin < 0:
            lam, p, zeta = worst[0]
            raise ConvexityViolation(p, zeta, lam)
        return {
            "min_margin": float(min_margin),
            "witnesses": [(p, zeta, lam) for lam, p, zeta in worst[:5]],
            "conforming": bool(min_margin >= self.convexity_constant),
        }

    # -- quadrature ---------------------------------------------------------

    def boundary_quadrature(self, order: int = 24) -> BoundaryQuadrature:
        """Surface rule for the star-shaped boundary.

        Product Gauss-Legendre x uniform-azimuth directions from the anchor;
        dS = r^2 / (omega . n) dOmega. Weights are positive for a convex body
        with interior anchor and sum to the surface area.
        """
        if order < 1:
            raise ValueError("order must be >= 1")
        dirs, w = sphere_quadrature(order, 2 * order)
        r = self._ray_to_boundary(np.tile(self.anchor, (len(dirs), 1)), dirs)
        P = self.anchor + r[:, None] * dirs
        N = self.unit_normal(P)
        cosg = np.einsum("ni,ni->n", dirs, N)
        weights = w * r ** 2 / cosg
        return BoundaryQuadrature(P, N, weights)

    def volume_quadrature(self, n_radial: int = 16, order: int = 16) -> VolumeQuadrature:
        """Volume rule: radial Gauss-Legendre along rays from the anchor."""
        dirs, w = sphere_quadrature(order, 2 * order)
        rmax = self._ray_to_boundary(np.tile(self.anchor, (len(dirs), 1)), dirs)
        s, ws = np.polynomial.legendre.leggauss(n_radial)
        s = 0.5 * (s + 1.0)  # [0,1]
        ws = 0.5 * ws
        pts = (self.anchor[None, None, :]
               + rmax[:, None, None] * s[None, :, None] * dirs[:, None, :])
        wts = (w[:, None] * ws[None, :] * (rmax[:, None] * s[None, :]) ** 2
               * rmax[:, None])
        return VolumeQuadrature(pts.reshape(-1, 3), wts.reshape(-1))

    def collar_xi_floor(self, delta: float | None = None, order: int = 16) -> float:
        """delta' = min |xi| over the inner collar face {d(x, dOmega) = delta}."""
        if delta is None:
            delta = self.delta_shell
        bq = self.boundary_quadrature(order)
        inner = bq.points - delta * bq.normals
        return float(np.min(np.abs(self.xi(inner))))


# -- operation-style wrappers (module-level API) ----------------------------

def contains(domain: LevelSetDomain, x) -> bool:
    return bool(domain.contains(x))


def outward_normal(domain: LevelSetDomain, x) -> np.ndarray:
    return domain.outward_normal(x)


def closest_boundary_point(domain: LevelSetDomain, x):
    return domain.closest_boundary_point(x)


def check_convexity(domain: LevelSetDomain, n_samples: int = 256,
                    rng_seed: int = 0) -> dict:
    return domain.check_convexity(n_samples, rng_seed)


def boundary_quadrature(domain: LevelSetDomain, order: int = 24) -> BoundaryQuadrature:
    return domain.boundary_quadrature(order)


# -- presets -----------------------------------------------------------------

def unit_ball() -> LevelSetDomain:
    """xi = |x|^2 - 1."""
    A = np.eye(3)

    def xi(x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x, axis=-1) - 1.0

    def grad(x):
        return 2.0 * np.asarray(x, dtype=float)

    def hess(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1] + (3, 3)
        return np.broadcast_to(2.0 * np.eye(3), shape).copy()

    return LevelSetDomain(
        xi=xi, grad_xi=grad, hess_xi=hess,
        bounding_box=np.array([[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]]),
        convexity_constant=0.9, anchor=np.zeros(3), name="unit_ball",
        quadratic=(A, np.zeros(3), -1.0))


def ellipsoid(a: float, b: float, c: float) -> LevelSetDomain:
    """xi = (x/a)^2 + (y/b)^2 + (z/c)^2 - 1."""
    semi = np.array([a, b, c], dtype=float)
    if np.any(semi <= 0):
        raise ValueError("semi-axes must be positive")
    inv2 = 1.0 / semi ** 2
    A = np.diag(inv2)

    def xi(x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x * inv2, axis=-1) - 1.0

    def grad(x):
        return 2.0 * np.asarray(x, dtype=float) * inv2

    def hess(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1] + (3, 3)
        return np.broadcast_to(2.0 * np.diag(inv2), shape).copy()

    # flattest-point curvature floor: min over pairs of b_i / a_j^2
    cmin = min(semi[i] / semi[j] ** 2 for i in range(3) for j in range(3))
    return LevelSetDomain(
        xi=xi, grad_xi=grad, hess_xi=hess,
        bounding_box=np.array([-semi, semi]),
        convexity_constant=0.9 * cmin, anchor=np.zeros(3),
        name=f"ellipsoid({a},{b},{c})",
        quadratic=(A, np.zeros(3), -1.0))


def polynomial_domain(terms: list, bounding_box, convexity_constant: float = 0.0,
                      anchor=None, name: str = "polynomial") -> LevelSetDomain:
    """Custom xi from monomial terms [(i, j, k, coeff), ...]."""
    terms = [(int(i), int(j), int(k), float(cf)) for i, j, k, cf in terms]

    def _eval(x, di=0, dj=0, dk=0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for i, j, k, cf in terms:
            if i < di or j < dj or k < dk:
                continue
            c = cf
            for (p, d) in ((i, di), (j, dj), (k, dk)):
                for m in range(d):
                    c *= (p - m)
            out = out + c * (x[..., 0] ** (i - di) * x[..., 1] ** (j - dj)
                             * x[..., 2] ** (k - dk))
        return out

    def xi(x):
        return _eval(x)

    def grad(x):
        return np.stack([_eval(x, 1, 0, 0), _eval(x, 0, 1, 0),
                         _eval(x, 0, 0, 1)], axis=-1)

    def hess(x):
        rows = [
            [_eval(x, 2, 0, 0), _eval(x, 1, 1, 0), _eval(x, 1, 0, 1)],
            [_eval(x, 1, 1, 0), _eval(x, 0, 2, 0), _eval(x, 0, 1, 1)],
            [_eval(x, 1, 0, 1), _eval(x, 0, 1, 1), _eval(x, 0, 0, 2)],
        ]
        return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)

    return LevelSetDomain(xi=xi, grad_xi=grad, hess_xi=hess,
                          bounding_box=np.asarray(bounding_box, dtype=float),
                          convexity_constant=convexity_constant,
                          anchor=anchor, name=name)


def from_preset(spec: str | dict) -> LevelSetDomain:
    """Build a domain from a scenario preset string or mapping."""
    if isinstance(spec, str):
        s = spec.strip()
        if s == "unit_ball":
            return unit_ball()
        if s.startswith("ellipsoid(") and s.endswith(")"):
            parts = [float(v) for v in s[len("ellipsoid("):-1].split(",")]
            return ellipsoid(*parts)
        raise ValueError(f"unknown domain preset: {spec!r}")
    kind = spec.get("preset", "unit_ball")
    if kind == "unit_ball":
        return unit_ball()
    if kind == "ellipsoid":
        return ellipsoid(spec["a"], spec["b"], spec["c"])
    if kind == "polynomial":
        return polynomial_domain(
            spec["terms"], spec["bounding_box"],
            convexity_constant=spec.get("convexity_constant", 0.0),
            anchor=spec.get("anchor"), name=spec.get("name", "polynomial"))
    raise ValueError(f"unknown domain preset: {kind!r}")
