"""Swap regret: competing with every relabelling pi: [K] -> [K] of the learner's actions."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..approach import OracleBundle, OrthantGenerators
from ..convex import ConvexBody, product_simplex_body, project_rows_simplex, simplex_body
from ..errors import ConfigError, InvalidDual
from ..geometry import ExplicitPayoff

MATERIALIZE_LIMIT = 10 ** 4


def _check_K(K: int) -> None:
    if not isinstance(K, (int, np.integer)) or K < 2:
        raise ConfigError(f"swap regret needs K >= 2, got K={K}", field="K")


def swap_functions(K: int) -> np.ndarray:
    """All K^K maps [K] -> [K], one per row, in lexicographic order."""
    _check_K(K)
    if K ** K > MATERIALIZE_LIMIT:
        raise ConfigError(f"K^K = {K ** K} swap functions is too many to enumerate", field="K")
    return np.array(list(itertools.product(range(K), repeat=K)), dtype=int)


def swap_payoff(K: int) -> ExplicitPayoff:
    """v_pi = I - Pi, where Pi[j, pi(j)] = 1; u_pi(p, l) = sum_j p_j (l_j - l_pi(j))."""
    pis = swap_functions(K)
    eye = np.eye(K)
    coeffs = np.stack([eye - eye[pi] for pi in pis])
    return ExplicitPayoff(coeffs)


def swap_regret(actions: np.ndarray, losses: np.ndarray) -> float:
    """sum_i max_j sum_t p_ti (l_ti - l_tj)."""
    P = np.asarray(actions, dtype=float)
    L = np.asarray(losses, dtype=float)
    if P.shape != L.shape or P.ndim != 2:
        raise ConfigError(f"plays must be two (T, K) arrays, got {P.shape} and {L.shape}", field="plays")
    K = P.shape[1]
    cross = np.zeros((K, K))
    for i in range(K):
        cross[i] = P[:, i] @ (L[:, [i]] - L)
    return max(float(cross.max(axis=1).sum()), 0.0)


def swap_basis_value(Z: np.ndarray) -> float:
    """max over pi of <I - Pi, Z> = sum_i max_j (Z_ii - Z_ij)."""
    Z = np.asarray(Z, dtype=float)
    return float(np.sum(np.diag(Z) - Z.min(axis=1)))


def marginals_from_dual(theta_basis: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """q_ij = Pr[pi(i) = j]: -theta_ij off the diagonal, 1 - theta_ii on it."""
    T = np.asarray(theta_basis, dtype=float)
    K = T.shape[0]
    Q = np.eye(K) - T
    if np.any(Q < -tol) or np.any(Q > 1 + tol) or np.any(np.abs(Q.sum(axis=1) - 1) > tol):
        raise InvalidDual("dual point does not encode a row-stochastic marginal matrix")
    return np.clip(Q, 0.0, 1.0)


def dual_from_marginals(Q: np.ndarray) -> np.ndarray:
    return np.eye(Q.shape[0]) - np.asarray(Q, dtype=float)


def product_distribution(Q: np.ndarray) -> np.ndarray:
    """theta_pi = prod_i q_{i, pi(i)} over the enumerated swap functions."""
    K = Q.shape[0]
    pis = swap_functions(K)
    return np.prod(Q[np.arange(K)[None, :], pis], axis=1)


def swap_maxent_regularizer(theta_basis: np.ndarray, tol: float = 1e-9) -> float:
    """Negative maximum entropy: sum_ij q_ij log q_ij (0 log 0 = 0)."""
    Q = marginals_from_dual(theta_basis, tol)
    pos = Q[Q > 0]
    return float(np.sum(pos * np.log(pos)))


def swap_maxent_argmin(cumulative: np.ndarray, eta: float) -> np.ndarray:
    """FTRL step for the maximum-entropy regularizer.

    The minimizing distribution over swap functions is a product of row
    softmaxes of eta * cumulative, so its image I - Q is available directly.
    """
    S = eta * np.asarray(cumulative, dtype=float)
    S = S - S.max(axis=1, keepdims=True)
    W = np.exp(S)
    Q = W / W.sum(axis=1, keepdims=True)
    return np.eye(Q.shape[0]) - Q


def stationary_distribution(Q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """p with p^T Q = p^T.

    A direct solve is used when the stationary distribution is unique; otherwise
    the limit of the lazy chain (I + Q) / 2 started from the uniform
    distribution, which picks one canonical answer among many.
    """
    Q = np.asarray(Q, dtype=float)
    K = Q.shape[0]
    M = np.vstack([Q.T - np.eye(K), np.ones((1, K))])
    rhs = np.zeros(K + 1)
    rhs[K] = 1.0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.min() > 1e-7:
        p = np.linalg.lstsq(M, rhs, rcond=None)[0]
        if p.min() >= -tol and np.max(np.abs(p @ Q - p)) <= 1e-11:
            p = np.maximum(p, 0.0)
            return p / p.sum()
    lazy = 0.5 * (np.eye(K) + Q)
    p = np.full(K, 1.0 / K)
    for _ in range(200):
        p = p @ lazy
        lazy = lazy @ lazy
        if np.max(np.abs(p @ Q - p)) <= tol:
            break
    p = np.maximum(p, 0.0)
    return p / p.sum()


def swap_responder(Q: np.ndarray) -> np.ndarray:
    """Action whose induced swap leaves the play unchanged: a stationary distribution of Q."""
    Q = np.asarray(Q, dtype=float)
    if np.any(Q < -1e-9) or np.any(np.abs(Q.sum(axis=1) - 1) > 1e-9):
        raise InvalidDual("responder input must be row-stochastic")
    return stationary_distribution(Q)


def swap_basis_responder(theta_basis: np.ndarray) -> np.ndarray:
    return swap_responder(marginals_from_dual(theta_basis, tol=1e-7))


def swap_dual_body(K: int) -> ConvexBody:
    """conv{v_pi} = {I - Q : Q row-stochastic}, with closed-form projection."""
    _check_K(K)
    rows = product_simplex_body(K, K)
    eye = np.eye(K).ravel()

    def member(x):
        return rows.membership(eye - x)

    def separate(x):
        h = rows.separation(eye - x)
        return None if h is None else -h

    def project(x):
        return eye - project_rows_simplex((eye - x).reshape(K, K)).ravel()

    return ConvexBody(rows.dim, member, rows.x0, rows.r, rows.R, separation=separate,
                      lift=-rows.lift, shift=eye - rows.shift, projection=project)


def swap_bundle(K: int) -> OracleBundle:
    _check_K(K)
    return OracleBundle(swap_basis_value, simplex_body(K), OrthantGenerators(np.ones(K)),
                        rho=2.0 * math.sqrt(2.0 * K), center=np.eye(K) - np.full((K, K), 1.0 / K))


def swap_dual_diameter(K: int) -> float:
    """Largest |v_pi - v_sigma|: two maps that disagree on every row."""
    return math.sqrt(2.0 * K)
