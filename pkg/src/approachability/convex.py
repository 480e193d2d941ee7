"""Convex bodies given by oracles, and the ellipsoid-style cutting-plane solvers.

A body lives in "solver coordinates" y of dimension `dim`; the ambient point is
`shift + lift @ y`.  Lower-dimensional sets such as the simplex are described
through such an affine chart so that the solver always sees a full-dimensional
body containing the ball of radius `r` around `x0`.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial import ConvexHull

from .errors import ConfigError, Infeasible, SolverFailure

TOL_ENV = "APPROACHABILITY_SOLVER_TOL"


def solver_tol(default: float = 1e-9) -> float:
    """Absolute tolerance on inner products; overridable through the environment."""
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return default
    try:
        val = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{TOL_ENV}={raw!r} is not a number", field=TOL_ENV) from exc
    if not (val > 0 and math.isfinite(val)):
        raise ConfigError(f"{TOL_ENV} must be positive", field=TOL_ENV)
    return val


Membership = Callable[[np.ndarray], bool]
Separation = Callable[[np.ndarray], Optional[np.ndarray]]


@dataclass(frozen=True)
class ConvexBody:
    """Oracle description of a convex body.

    membership/separation/cone_separation act on ambient points. A separation
    oracle returns None for points inside and otherwise a vector h with
    <x, h> > sup over the body of <., h>.
    """
    dim: int
    membership: Membership
    x0: np.ndarray
    r: float
    R: float
    separation: Optional[Separation] = None
    lift: Optional[np.ndarray] = None
    shift: Optional[np.ndarray] = None
    projection: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cone_separation: Optional[Separation] = None

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.shape != (self.dim,):
            raise ConfigError(f"x0 has shape {x0.shape}, expected ({self.dim},)", field="x0")
        if not (0 < self.r <= self.R):
            raise ConfigError(f"need 0 < r <= R, got r={self.r}, R={self.R}", field="r")
        object.__setattr__(self, "x0", x0)
        if self.lift is not None:
            lift = np.asarray(self.lift, dtype=float)
            shift = np.zeros(lift.shape[0]) if self.shift is None else np.asarray(self.shift, float)
            object.__setattr__(self, "lift", lift)
            object.__setattr__(self, "shift", shift)

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.lift is None else self.lift.shape[0]

    def to_ambient(self, y: np.ndarray) -> np.ndarray:
        if self.lift is None:
            return np.asarray(y, dtype=float)
        return self.shift + self.lift @ y

    def pull_back(self, g: np.ndarray) -> np.ndarray:
        """Map an ambient covector into solver coordinates."""
        return g if self.lift is None else self.lift.T @ g

    def contains(self, x: np.ndarray) -> bool:
        return bool(self.membership(np.asarray(x, dtype=float)))

    def separate(self, y: np.ndarray) -> Optional[np.ndarray]:
        """Cut direction in solver coordinates, or None when y is inside."""
        x = self.to_ambient(y)
        if self.separation is not None:
            h = self.separation(x)
            return None if h is None else self.pull_back(np.asarray(h, dtype=float))
        if self.membership(x):
            return None
        return _gauge_cut(self, y)


def _gauge_value(body: ConvexBody, y: np.ndarray, iters: int = 60) -> float:
    """Minkowski gauge of y - x0 relative to the body, by bisection on membership."""
    d = y - body.x0
    if not np.any(d):
        return 0.0
    hi = 2.0 * body.R / max(np.linalg.norm(d), 1e-300)
    if body.membership(body.to_ambient(body.x0 + hi * d)):
        return 0.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if body.membership(body.to_ambient(body.x0 + mid * d)):
            lo = mid
        else:
            hi = mid
    return 1.0 / max(lo, 1e-300)


def _gauge_cut(body: ConvexBody, y: np.ndarray) -> np.ndarray:
    # A subgradient of the gauge at an outside point separates it from {gauge <= 1}.
    step = 1e-6 * max(1.0, body.R)
    g = np.empty(body.dim)
    for j in range(body.dim):
        e = np.zeros(body.dim)
        e[j] = step
        g[j] = (_gauge_value(body, y + e) - _gauge_value(body, y - e)) / (2 * step)
    if not np.any(g):
        g = y - body.x0
    return g


class Ellipsoid:
    """{c + B u : |u| <= 1}, stored through the factor B to keep thin shapes accurate."""

    def __init__(self, center: np.ndarray, radius: float):
        self.c = np.array(center, dtype=float)
        self.n = self.c.size
        self.B = radius * np.eye(self.n)

    def width(self, g: np.ndarray) -> float:
        """Half-width of the ellipsoid along covector g."""
        return float(np.linalg.norm(self.B.T @ g))

    def cut(self, g: np.ndarray, depth: float = 0.0) -> bool:
        """Keep {x : <g, x - c> <= -depth}. Returns False when nothing is left."""
        b = self.B.T @ g
        nb = float(np.linalg.norm(b))
        if nb == 0.0:
            return depth <= 0.0
        alpha = depth / nb
        n = self.n
        if alpha >= 1.0:
            return False
        alpha = max(alpha, -1.0 / n + 1e-12)
        gh = b / nb
        Bg = self.B @ gh
        self.c = self.c - (1 + n * alpha) / (n + 1) * Bg
        par = n * (1 - alpha) / (n + 1)
        if n == 1:
            self.B = self.B * par
            return True
        perp = n * math.sqrt((1 - alpha * alpha) / (n * n - 1))
        self.B = perp * self.B + (par - perp) * np.outer(Bg, gh)
        return True


def iteration_cap(dim: int, R: float, r: float, eps: float) -> int:
    return int(math.ceil(10 * dim * dim * max(math.log(R / (r * eps)), 1.0)))


def _fd_gradient(fn, body: ConvexBody, y: np.ndarray, step: float) -> np.ndarray:
    g = np.empty(body.dim)
    for j in range(body.dim):
        e = np.zeros(body.dim)
        e[j] = step
        g[j] = (fn(body.to_ambient(y + e)) - fn(body.to_ambient(y - e))) / (2 * step)
    return g


def convex_minimize(body: ConvexBody, fn: Callable[[np.ndarray], float], eps: float = 1e-7,
                    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                    max_iter: Optional[int] = None,
                    stop: Optional[Callable[[float], bool]] = None):
    """Minimize a convex function over the body with membership/separation and evaluation oracles.

    Returns (ambient point, value). Subgradients come from `grad` (ambient) or
    central finite differences. `stop(value)` allows early exit once an
    incumbent is good enough for the caller.
    """
    cap = max_iter if max_iter is not None else iteration_cap(body.dim, body.R, body.r, eps)
    ell = Ellipsoid(body.x0, body.R)
    step = 1e-7 * max(1.0, body.R)
    best_x, best_v = None, math.inf
    for _ in range(cap):
        y = ell.c
        cut = body.separate(y)
        if cut is not None:
            if not ell.cut(cut):
                break
            continue
        x = body.to_ambient(y)
        v = float(fn(x))
        if v < best_v:
            best_x, best_v = x.copy(), v
            if stop is not None and stop(best_v):
                return best_x, best_v
        g = body.pull_back(np.asarray(grad(x), float)) if grad is not None else _fd_gradient(fn, body, y, step)
        if ell.width(g) <= eps:
            return best_x, best_v
        ell.cut(g)
    if best_x is None:
        raise SolverFailure("cutting plane never reached a feasible center", incumbent=None)
    # The ellipsoid may have shrunk below eps without a small-gradient certificate.
    if ell.width(np.ones(body.dim)) <= eps:
        return best_x, best_v
    raise SolverFailure(f"iteration budget {cap} exhausted; best value {best_v:.3e}",
                        incumbent=best_x, value=best_v)


def lp_feasible(A: np.ndarray, b: np.ndarray, body: ConvexBody, tol: Optional[float] = None,
                max_iter: Optional[int] = None) -> np.ndarray:
    """Ambient point of the body with A x <= b + tol, found by phase-1 cutting planes.

    Raises Infeasible on a deep-cut certificate or once the ellipsoid volume collapses.
    """
    tol = solver_tol() if tol is None else tol
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if body.lift is None:
        As, bs = A, b
    else:
        As, bs = A @ body.lift, b - A @ body.shift
    cap = max_iter if max_iter is not None else iteration_cap(body.dim, body.R, body.r, tol)
    ell = Ellipsoid(body.x0, body.R)
    for _ in range(cap):
        y = ell.c
        cut = body.separate(y)
        if cut is not None:
            if not ell.cut(cut):
                raise Infeasible("ellipsoid emptied by a body cut")
            continue
        viol = As @ y - bs
        j = int(np.argmax(viol)) if viol.size else -1
        if j < 0 or viol[j] <= tol:
            return body.to_ambient(y)
        if not np.any(As[j]):
            raise Infeasible(f"constraint {j} reads 0 <= {bs[j]:.3e}")
        if not ell.cut(As[j], depth=viol[j] - tol):
            raise Infeasible(f"constraint {j} misses the localization ellipsoid")
    raise Infeasible(f"localization volume collapsed after {cap} cuts")


# ---------------------------------------------------------------- bodies

def ball_body(dim: int, radius: float = 1.0, center: Optional[np.ndarray] = None,
              tol: float = 1e-9) -> ConvexBody:
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def member(x):
        return np.linalg.norm(x - c) <= radius + tol

    def separate(x):
        d = x - c
        nd = np.linalg.norm(d)
        return None if nd <= radius + tol else d / nd

    def project(x):
        d = x - c
        nd = np.linalg.norm(d)
        return x.copy() if nd <= radius else c + d * (radius / nd)

    def cone_sep(z):
        return None if np.linalg.norm(c) < radius else _not_supported(z)

    return ConvexBody(dim, member, c, radius, radius, separation=separate, projection=project,
                      cone_separation=cone_sep)


def _not_supported(z):
    raise ConfigError("cone separation is only available when the body contains 0 in its interior")


def box_body(lo, hi, tol: float = 1e-9) -> ConvexBody:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise ConfigError("box needs hi > lo in every coordinate", field="box")

    def member(x):
        return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))

    def separate(x):
        over = x - hi
        under = lo - x
        j, k = int(np.argmax(over)), int(np.argmax(under))
        if max(over[j], under[k]) <= tol:
            return None
        h = np.zeros_like(x)
        if over[j] >= under[k]:
            h[j] = 1.0
        else:
            h[k] = -1.0
        return h

    def cone_sep(z):
        # cone(box) is everything when 0 is interior; the nonnegative orthant when lo = 0.
        if np.all(lo < 0) and np.all(hi > 0):
            return None
        if np.all(lo >= 0):
            j = int(np.argmin(z))
            if z[j] >= -tol:
                return None
            h = np.zeros_like(z)
            h[j] = -1.0
            return h
        return _not_supported(z)

    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return ConvexBody(lo.size, member, mid, float(half.min()), float(np.linalg.norm(half)),
                      separation=separate, projection=lambda x: np.clip(x, lo, hi),
                      cone_separation=cone_sep)


def product_simplex_body(C: int, K: int, tol: float = 1e-9) -> ConvexBody:
    """Product of C probability simplices over K actions, flattened type-major."""
    if C < 1 or K < 2:
        raise ConfigError(f"need C >= 1 and K >= 2, got C={C}, K={K}", field="K")
    k1 = K - 1
    block = np.vstack([np.eye(k1), -np.ones((1, k1))])
    lift = np.kron(np.eye(C), block)
    shift = np.tile(np.eye(K)[-1], C)
    x0 = np.full(C * k1, 1.0 / K)
    r = 1.0 / (K * math.sqrt(k1))
    if C > 1:
        r = r / math.sqrt(C)

    def member(x):
        x = x.reshape(C, K)
        return bool(np.all(x >= -tol) and np.all(np.abs(x.sum(axis=1) - 1.0) <= tol))

    def separate(x):
        xb = x.reshape(C, K)
        sums = xb.sum(axis=1) - 1.0
        c = int(np.argmax(np.abs(sums)))
        h = np.zeros((C, K))
        if abs(sums[c]) > tol:
            h[c] = np.sign(sums[c])
            return h.ravel()
        c, i = np.unravel_index(int(np.argmin(xb)), xb.shape)
        if xb[c, i] >= -tol:
            return None
        h[c, i] = -1.0
        return h.ravel()

    def project(x):
        return np.concatenate([project_simplex(row) for row in x.reshape(C, K)])

    def cone_sep(z):
        # cone = {z >= 0 with equal block sums}
        zb = z.reshape(C, K)
        c, i = np.unravel_index(int(np.argmin(zb)), zb.shape)
        h = np.zeros((C, K))
        if zb[c, i] < -tol:
            h[c, i] = -1.0
            return h.ravel()
        sums = zb.sum(axis=1)
        a, bb = int(np.argmax(sums)), int(np.argmin(sums))
        if sums[a] - sums[bb] <= tol:
            return None
        h[a] = 1.0
        h[bb] = -1.0
        return h.ravel()

    return ConvexBody(C * k1, member, x0, r, 1.0 * math.sqrt(C), separation=separate, lift=lift,
                      shift=shift, projection=project, cone_separation=cone_sep)


def simplex_body(K: int, tol: float = 1e-9) -> ConvexBody:
    return product_simplex_body(1, K, tol)


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = total} (sort-based)."""
    v = np.asarray(v, dtype=float)
    if total <= 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def project_rows_simplex(M: np.ndarray) -> np.ndarray:
    """Row-wise simplex projection, vectorised."""
    M = np.asarray(M, dtype=float)
    k = M.shape[1]
    u = -np.sort(-M, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, k + 1)
    cond = u - css / idx > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(M.shape[0]), rho] / (rho + 1.0)
    return np.maximum(M - tau[:, None], 0.0)


# ---------------------------------------------------------------- hulls

def min_norm_point(points: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000):
    """Wolfe's algorithm: the point of conv(points) closest to the origin.

    Returns (x, weights) with weights on the rows of `points` (a probability vector).
    """
    P = np.asarray(points, dtype=float)
    k = P.shape[0]
    scale = max(1.0, float(np.max(np.einsum("ij,ij->i", P, P))))
    S = [int(np.argmin(np.einsum("ij,ij->i", P, P)))]
    w = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        vals = P @ x
        j = int(np.argmin(vals))
        if x @ x - vals[j] <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            alpha = _affine_minimizer(P[S])
            if np.all(alpha > 1e-14):
                w = alpha
                break
            neg = alpha <= 1e-14
            ratios = w[neg] / np.maximum(w[neg] - alpha[neg], 1e-300)
            theta = min(1.0, float(ratios.min()))
            w = w + theta * (alpha - w)
            keep = w > 1e-14
            keep[np.argmax(w)] = True
            S = [s for s, kp in zip(S, keep) if kp]
            w = w[keep]
            w = w / w.sum()
            if len(S) == 1:
                break
        x = w @ P[S]
    weights = np.zeros(k)
    weights[S] = w
    return x, weights


def _affine_minimizer(Q: np.ndarray) -> np.ndarray:
    s = Q.shape[0]
    G = Q @ Q.T
    M = np.zeros((s + 1, s + 1))
    M[:s, :s] = G
    M[:s, s] = 1.0
    M[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:s]


def project_hull(points: np.ndarray, a: np.ndarray):
    """Nearest point of conv(points) to a, with its convex weights."""
    a = np.asarray(a, dtype=float)
    x, w = min_norm_point(np.asarray(points, dtype=float) - a)
    return x + a, w


def hull_body(points: np.ndarray, tol: float = 1e-9) -> ConvexBody:
    """conv(points) charted on its affine hull; membership and separation via projection."""
    P = np.asarray(points, dtype=float)
    P = P.reshape(P.shape[0], -1)
    center = P.mean(axis=0)
    D = P - center
    _, s, Vt = np.linalg.svd(D, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s.max() if s.size else 1.0)))
    if rank == 0:
        raise ConfigError("hull of a single point has no interior", field="points")
    U = Vt[:rank].T
    Y = D @ U
    if rank == 1:
        r = float(min(-Y.min(), Y.max()))
    else:
        eq = ConvexHull(Y).equations
        r = float(np.min(-eq[:, -1] / np.linalg.norm(eq[:, :-1], axis=1)))
    R = float(np.max(np.linalg.norm(Y, axis=1)))

    def member(x):
        proj, _ = project_hull(P, x)
        return np.linalg.norm(x - proj) <= tol

    def separate(x):
        proj, _ = project_hull(P, x)
        h = x - proj
        return None if np.linalg.norm(h) <= tol else h

    return ConvexBody(rank, member, np.zeros(rank), max(r, 1e-12), max(R, r), separation=separate,
                      lift=U, shift=center, projection=lambda x: project_hull(P, x)[0])
