"""Bayesian swap regret: joint type-misreport and per-type action-swap deviations.

Actions and losses are flattened type-major: index c * K + i is action i of type c.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..approach import OracleBundle, OrthantGenerators, lp_responder
from ..convex import product_simplex_body
from ..errors import ConfigError
from ..geometry import ExplicitPayoff

MATERIALIZE_LIMIT = 10 ** 4


@dataclass(frozen=True)
class BayesInstance:
    C: int
    K: int
    mu: np.ndarray

    def __post_init__(self):
        if self.C < 1:
            raise ConfigError(f"need C >= 1, got C={self.C}", field="C")
        if self.K < 2:
            raise ConfigError(f"need K >= 2, got K={self.K}", field="K")
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (self.C,) or np.any(mu < 0) or abs(mu.sum() - 1) > 1e-9:
            raise ConfigError("mu must be a probability vector over the C types", field="mu")
        object.__setattr__(self, "mu", mu)

    @property
    def dim(self) -> int:
        return self.C * self.K

    @property
    def log_d(self) -> float:
        return self.C * math.log(self.C) + self.K * self.C * math.log(self.K)

    @classmethod
    def uniform(cls, C: int, K: int) -> "BayesInstance":
        return cls(C, K, np.full(C, 1.0 / C))


def _cross(inst: BayesInstance, Z: np.ndarray) -> np.ndarray:
    """G[c, c2, i, j] = mu_c (Z[c,i,c,i] - Z[c2,i,c,j]) with Z indexed (c', i, c, j)."""
    C, K = inst.C, inst.K
    Z4 = np.asarray(Z, dtype=float).reshape(C, K, C, K)
    own = np.einsum("cici->ci", Z4)                     # (c, i)
    other = np.transpose(Z4, (2, 0, 1, 3))              # (c, c2, i, j)
    return inst.mu[:, None, None, None] * (own[:, None, :, None] - other)


def bayes_basis_value(inst: BayesInstance, Z: np.ndarray) -> float:
    """max over (kappa, pi) of <v, Z> = sum_c max_c2 sum_i max_j G[c, c2, i, j]."""
    G = _cross(inst, Z)
    return float(G.max(axis=3).sum(axis=2).max(axis=1).sum())


def bayes_swap_regret(actions: np.ndarray, losses: np.ndarray, inst: BayesInstance) -> float:
    """sum_c max_c2 sum_i max_j sum_t mu_c (p_t(c)_i l_{t,i,c} - p_t(c2)_i l_{t,j,c})."""
    P = np.asarray(actions, dtype=float)
    L = np.asarray(losses, dtype=float)
    if P.shape != L.shape or P.shape[1] != inst.dim:
        raise ConfigError(f"plays must be (T, {inst.dim}) arrays", field="plays")
    return max(bayes_basis_value(inst, P.T @ L), 0.0)


def deviations(inst: BayesInstance):
    """Every (kappa, pi_1..pi_C) as index arrays; only for tiny instances."""
    C, K = inst.C, inst.K
    if C ** C * K ** (K * C) > MATERIALIZE_LIMIT:
        raise ConfigError("too many Bayesian deviations to enumerate", field="K")
    kappas = list(itertools.product(range(C), repeat=C))
    pis = list(itertools.product(range(K), repeat=K))
    for kappa in kappas:
        for combo in itertools.product(pis, repeat=C):
            yield np.array(kappa), np.array(combo)


def bayes_payoff(inst: BayesInstance) -> ExplicitPayoff:
    """Coefficient of p(c2)_i l_{j,c}: mu_c [c2 = c][j = i] - mu_c [c2 = kappa(c)][j = pi_c(i)]."""
    C, K = inst.C, inst.K
    coeffs = []
    for kappa, pi in deviations(inst):
        v = np.zeros((C, K, C, K))
        for c in range(C):
            for i in range(K):
                v[c, i, c, i] += inst.mu[c]
                v[kappa[c], i, c, pi[c][i]] -= inst.mu[c]
        coeffs.append(v.reshape(C * K, C * K))
    return ExplicitPayoff(np.stack(coeffs))


def bayes_center(inst: BayesInstance) -> np.ndarray:
    """V^T(uniform): the average deviation coefficient."""
    C, K = inst.C, inst.K
    v = np.zeros((C, K, C, K))
    for c in range(C):
        v[c, :, c, :] += inst.mu[c] * np.eye(K)
        v[:, :, c, :] -= inst.mu[c] / (C * K)
    return v.reshape(C * K, C * K)


def bayes_bundle(inst: BayesInstance) -> OracleBundle:
    # |v|^2 <= sum_c mu_c^2 * 2K
    rho = 2.0 * math.sqrt(2.0 * inst.K * float(np.sum(inst.mu ** 2)))
    return OracleBundle(lambda Z: bayes_basis_value(inst, Z), product_simplex_body(inst.C, inst.K),
                        OrthantGenerators(np.ones(inst.dim)), rho=rho, center=bayes_center(inst))


def bayes_responder(inst: BayesInstance, tol: float = 1e-9):
    """LP responder over the product of simplices with one constraint per loss coordinate."""
    return lp_responder(product_simplex_body(inst.C, inst.K), OrthantGenerators(np.ones(inst.dim)), tol)
