"""Procrustean swap regret: competing with every orthogonal map applied to the actions."""
from __future__ import annotations

import math

import numpy as np

from ..approach import OracleBundle, OrthantGenerators
from ..convex import ConvexBody, ball_body
from ..errors import ConfigError


def _check_n(n: int) -> None:
    if n < 1:
        raise ConfigError(f"Procrustes dimension must be >= 1, got n={n}", field="n")


def procrustes_regret(actions: np.ndarray, losses: np.ndarray) -> float:
    """sum_t <p_t, l_t> + nuclear norm of sum_t l_t p_t^T.

    max over orthogonal Q of -<Q, A> is the sum of singular values of A.
    """
    P = np.asarray(actions, dtype=float)
    L = np.asarray(losses, dtype=float)
    if P.shape != L.shape:
        raise ConfigError(f"plays must share shape, got {P.shape} and {L.shape}", field="plays")
    A = L.T @ P
    val = float(np.einsum("ti,ti->", P, L) + np.linalg.svd(A, compute_uv=False).sum())
    return max(val, 0.0)


def procrustes_value_at(actions: np.ndarray, losses: np.ndarray, Q: np.ndarray) -> float:
    """Regret against one fixed orthogonal map Q."""
    P = np.asarray(actions, dtype=float)
    L = np.asarray(losses, dtype=float)
    return float(np.einsum("ti,ti->", P, L) - np.einsum("ti,ti->", P @ Q.T, L))


def procrustes_basis_value(Z: np.ndarray) -> float:
    """max over orthogonal Q of <I - Q^T, Z> = tr Z + |Z|_*."""
    Z = np.asarray(Z, dtype=float)
    return float(np.trace(Z) + np.linalg.svd(Z, compute_uv=False).sum())


def clip_singular_values(M: np.ndarray, bound: float = 1.0) -> np.ndarray:
    """Frobenius projection onto the spectral-norm ball, the hull of the orthogonal group."""
    U, s, Vt = np.linalg.svd(M)
    return (U * np.minimum(s, bound)) @ Vt


def procrustes_responder(M: np.ndarray, cutoff: float = 1e-8) -> np.ndarray:
    """Preference vector (1, 1/2, ..., 1/n) projected onto ker(I - M), scaled into the unit ball."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if np.linalg.svd(M, compute_uv=False).max() > 1 + 1e-8:
        raise ConfigError("responder input must have spectral norm <= 1", field="M")
    _, s, Vt = np.linalg.svd(np.eye(n) - M)
    null = Vt[s <= cutoff]
    if null.shape[0] == 0:
        return np.zeros(n)
    pref = 1.0 / np.arange(1, n + 1)
    p = null.T @ (null @ pref)
    norm = np.linalg.norm(p)
    return p / norm if norm > 0 else p


def procrustes_basis_responder(theta_basis: np.ndarray) -> np.ndarray:
    """The dual point is I - M^T with M in conv(O(n)); the condition is (I - M) p = 0."""
    T = np.asarray(theta_basis, dtype=float)
    M = (np.eye(T.shape[0]) - T).T
    s = np.linalg.svd(M, compute_uv=False).max()
    if s > 1:
        M = M / s
    return procrustes_responder(M)


def procrustes_dual_body(n: int) -> ConvexBody:
    """{I - M^T : |M|_op <= 1} with singular-value clipping as the projection."""
    _check_n(n)
    eye = np.eye(n)

    def member(x):
        M = eye - x.reshape(n, n).T
        return np.linalg.svd(M, compute_uv=False).max() <= 1 + 1e-9

    def separate(x):
        M = eye - x.reshape(n, n).T
        U, s, Vt = np.linalg.svd(M)
        if s[0] <= 1 + 1e-9:
            return None
        # <M, u v^T> = s_max > 1 >= sup over the ball; pull back through x -> I - x^T.
        return -np.outer(U[:, 0], Vt[0]).T.ravel()

    def project(x):
        M = eye - x.reshape(n, n).T
        return (eye - clip_singular_values(M).T).ravel()

    return ConvexBody(n * n, member, eye.ravel(), 1.0, 1.0 + math.sqrt(n) * 2,
                      separation=separate, projection=project)


def procrustes_bundle(n: int) -> OracleBundle:
    # Centering at 0 (M = I) rather than I (M = 0): at I the responder plays
    # p = 0, every payoff vanishes, and the learner never moves.
    _check_n(n)
    return OracleBundle(procrustes_basis_value, ball_body(n), OrthantGenerators(np.ones(n)),
                        rho=2.0 * 2.0 * math.sqrt(n), center=np.zeros((n, n)))
