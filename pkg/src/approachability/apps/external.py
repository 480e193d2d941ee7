"""External regret against the K fixed actions."""
from __future__ import annotations

import math

import numpy as np

from ..approach import OracleBundle, OrthantGenerators
from ..convex import ConvexBody, project_simplex, simplex_body
from ..errors import ConfigError
from ..geometry import ExplicitPayoff


def external_payoff(K: int) -> ExplicitPayoff:
    """v_i = I - 1 e_i^T, so u_i(p, l) = <p, l> - l_i."""
    if K < 2:
        raise ConfigError(f"external regret needs K >= 2, got K={K}", field="K")
    eye = np.eye(K)
    return ExplicitPayoff(np.stack([eye - np.outer(np.ones(K), eye[i]) for i in range(K)]))


def external_regret(actions: np.ndarray, losses: np.ndarray) -> float:
    P = np.asarray(actions, dtype=float)
    L = np.asarray(losses, dtype=float)
    return max(float(np.einsum("ti,ti->", P, L) - L.sum(axis=0).min()), 0.0)


def external_basis_value(Z: np.ndarray) -> float:
    """max_i (tr Z - column sum i)."""
    Z = np.asarray(Z, dtype=float)
    return float(np.trace(Z) - Z.sum(axis=0).min())


def external_responder(theta_basis: np.ndarray) -> np.ndarray:
    """For theta = s I - 1 w^T the halfspace condition pins p = w / sum(w)."""
    T = np.asarray(theta_basis, dtype=float)
    K = T.shape[0]
    w = np.array([-T[(k + 1) % K, k] for k in range(K)])
    w = np.maximum(w, 0.0)
    if w.sum() <= 0:
        return np.full(K, 1.0 / K)
    return w / w.sum()


def external_bundle(K: int) -> OracleBundle:
    return OracleBundle(external_basis_value, simplex_body(K), OrthantGenerators(np.ones(K)),
                        rho=2.0 * math.sqrt(2.0 * K), center=np.eye(K) - np.full((K, K), 1.0 / K))


def external_dual_body(K: int) -> ConvexBody:
    """conv{v_i} = {I - 1 w^T : w in the simplex}; projection fits w column by column."""
    if K < 2:
        raise ConfigError(f"external regret needs K >= 2, got K={K}", field="K")
    eye = np.eye(K)
    simplex = simplex_body(K)

    def coords(x):
        return (eye - x.reshape(K, K)).mean(axis=0)

    def member(x):
        w = coords(x)
        return simplex.membership(w) and np.allclose(x.reshape(K, K), eye - np.outer(np.ones(K), w), atol=1e-9)

    def project(x):
        return (eye - np.outer(np.ones(K), project_simplex(coords(x)))).ravel()

    lift = -np.kron(np.ones((K, 1)), np.eye(K)) @ simplex.lift
    shift = eye.ravel() - np.kron(np.ones(K), simplex.shift)
    return ConvexBody(K - 1, member, simplex.x0, simplex.r / math.sqrt(K), simplex.R * math.sqrt(K),
                      lift=lift, shift=shift, projection=project)
