"""Bilinear payoffs, the outer-product basis map, and the pseudonorm they induce."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigError

# An n x m real matrix; kept as a plain ndarray.
PayoffMatrix = np.ndarray

_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class ExplicitPayoff:
    """Coefficient matrices v_1..v_d with u_i(p, l) = <v_i, p l^T>."""
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[0] < 1:
            raise ConfigError(f"coeffs must have shape (d, n, m) with d >= 1, got {c.shape}",
                              field="coeffs")
        if not np.all(np.isfinite(c)):
            raise ConfigError("coefficients must be finite", field="coeffs")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def m(self) -> int:
        return self.coeffs.shape[2]

    @property
    def flat(self) -> np.ndarray:
        """V as a d x (n m) matrix."""
        return self.coeffs.reshape(self.d, -1)

    @property
    def coeff_bound(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    @property
    def dual_radius(self) -> float:
        """max_i |v_i|_2."""
        return float(np.max(np.linalg.norm(self.flat, axis=1)))

    @property
    def dual_diameter(self) -> float:
        V = self.flat
        sq = np.einsum("ij,ij->i", V, V)
        d2 = sq[:, None] + sq[None, :] - 2 * V @ V.T
        return float(np.sqrt(max(d2.max(), 0.0)))

    def coordinates(self, z: PayoffMatrix) -> np.ndarray:
        """(<v_1, z>, ..., <v_d, z>)."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n, self.m):
            raise ConfigError(f"basis point has shape {z.shape}, expected {(self.n, self.m)}",
                              field="z")
        return self.flat @ z.ravel()

    def payoff(self, p: np.ndarray, loss: np.ndarray) -> np.ndarray:
        return self.coordinates(basis_map(p, loss, (self.n, self.m)))

    def lift_dual(self, theta: np.ndarray) -> PayoffMatrix:
        """V^T theta for a weight vector over the d coordinates."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.d,):
            raise ConfigError(f"weights have shape {theta.shape}, expected ({self.d},)", field="theta")
        return (theta @ self.flat).reshape(self.n, self.m)


def basis_map(p: np.ndarray, loss: np.ndarray, shape: Optional[Tuple[int, int]] = None) -> PayoffMatrix:
    """Outer product p l^T, the reduced-dimension payoff."""
    p = np.asarray(p, dtype=float)
    loss = np.asarray(loss, dtype=float)
    if p.ndim != 1 or loss.ndim != 1:
        raise ConfigError("action and loss must be vectors", field="shape")
    if shape is not None and (p.size, loss.size) != tuple(shape):
        raise ConfigError(f"action/loss dims {(p.size, loss.size)} do not match instance {tuple(shape)}",
                          field="shape")
    return np.outer(p, loss)


def pseudonorm_eval(payoff: ExplicitPayoff, z: PayoffMatrix) -> float:
    """f(z) = max(max_i <v_i, z>, 0)."""
    return max(float(np.max(payoff.coordinates(z))), 0.0)


def linf_distance_to_orthant(x: np.ndarray) -> float:
    """l_inf distance from x to the nonpositive orthant."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ConfigError("vector must be finite", field="x")
    return max(float(np.max(x)), 0.0)


def pseudodistance_to_cone(payoff: ExplicitPayoff, z: PayoffMatrix, clamp: bool = True) -> float:
    """sup of <theta, z> over conv{v_i}; clamped at 0 when used as a distance.

    The supremum of a linear function over a hull is attained at a vertex, so
    this is max_i <v_i, z>.
    """
    val = float(np.max(payoff.coordinates(z)))
    return max(val, 0.0) if clamp else val


def cone_distance_lp(payoff: ExplicitPayoff, z: PayoffMatrix) -> float:
    """inf over s in the cone {<v_i, s> <= 0} of f(z - s), solved as a primal LP."""
    V = payoff.flat
    d, k = V.shape
    zf = np.asarray(z, dtype=float).ravel()
    # variables: s (k, free), r >= 0; minimize r
    c = np.zeros(k + 1)
    c[-1] = 1.0
    # r >= <v_i, z - s>  ->  -V s - r <= -V z ;  V s <= 0
    A = np.vstack([np.hstack([-V, -np.ones((d, 1))]), np.hstack([V, np.zeros((d, 1))])])
    b = np.concatenate([-V @ zf, np.zeros(d)])
    bounds = [(None, None)] * k + [(0, None)]
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs", options=_LP_OPTS)
    if res.status != 0:
        raise RuntimeError(f"cone distance LP failed: {res.message}")
    return float(res.fun)


def fenchel_dual_distance(payoff: ExplicitPayoff, z: PayoffMatrix, vertices: np.ndarray) -> float:
    """sup over theta in conv{v_i} of <theta, z> - max_s <theta, s>, S = conv(vertices).

    LP over convex weights w of the v_i and an epigraph variable t for the inner max.
    """
    V = payoff.flat
    d = V.shape[0]
    S = np.asarray(vertices, dtype=float).reshape(len(vertices), -1)
    zf = np.asarray(z, dtype=float).ravel()
    gain = V @ zf
    # maximize gain.w - t  s.t.  (V s_j).w - t <= 0 for every vertex
    c = np.concatenate([-gain, [1.0]])
    A_ub = np.hstack([S @ V.T, -np.ones((S.shape[0], 1))])
    b_ub = np.zeros(S.shape[0])
    A_eq = np.concatenate([np.ones(d), [0.0]])[None, :]
    bounds = [(0, None)] * d + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs",
                  options=_LP_OPTS)
    if res.status != 0:
        raise RuntimeError(f"dual distance LP failed: {res.message}")
    return float(-res.fun)


def primal_set_distance(payoff: ExplicitPayoff, z: PayoffMatrix, vertices: np.ndarray) -> float:
    """min over s in conv(vertices) of f(z - s), as an LP in the mixing weights."""
    V = payoff.flat
    d = V.shape[0]
    S = np.asarray(vertices, dtype=float).reshape(len(vertices), -1)
    k = S.shape[0]
    zf = np.asarray(z, dtype=float).ravel()
    # variables mu (k), r >= 0; r >= <v_i, z> - sum_j mu_j <v_i, s_j>
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.hstack([-(V @ S.T), -np.ones((d, 1))])
    b_ub = -(V @ zf)
    A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    bounds = [(0, None)] * k + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs",
                  options=_LP_OPTS)
    if res.status != 0:
        raise RuntimeError(f"primal distance LP failed: {res.message}")
    return float(res.fun)


def hull_contains_lp(points: np.ndarray, x: np.ndarray) -> bool:
    """Is x a convex combination of the rows of points? (LP feasibility.)"""
    P = np.asarray(points, dtype=float).reshape(len(points), -1)
    xf = np.asarray(x, dtype=float).ravel()
    k = P.shape[0]
    A_eq = np.vstack([P.T, np.ones((1, k))])
    b_eq = np.concatenate([xf, [1.0]])
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs",
                  options=_LP_OPTS)
    return res.status == 0


def biaffine_payoff(bilinear: np.ndarray, action_terms: np.ndarray, loss_terms: np.ndarray,
                    constants: np.ndarray) -> ExplicitPayoff:
    """u_i(p, l) = p^T B_i l + a_i.p + b_i.l + c_i as a bilinear payoff in (p, 1) and (l, 1).

    Callers append a constant 1 to both action and loss (see `affine_extend`).
    """
    B = np.asarray(bilinear, dtype=float)
    a = np.asarray(action_terms, dtype=float)
    b = np.asarray(loss_terms, dtype=float)
    c = np.asarray(constants, dtype=float)
    d, n, m = B.shape
    if a.shape != (d, n) or b.shape != (d, m) or c.shape != (d,):
        raise ConfigError("affine terms do not match the bilinear part", field="coeffs")
    out = np.zeros((d, n + 1, m + 1))
    out[:, :n, :m] = B
    out[:, :n, m] = a
    out[:, n, :m] = b
    out[:, n, m] = c
    return ExplicitPayoff(out)


def affine_extend(x: np.ndarray) -> np.ndarray:
    """x -> (x, 1)."""
    return np.append(np.asarray(x, dtype=float), 1.0)
