"""Two-player Bayesian self-play: both players run the Bayesian swap-regret algorithm.

Utilities are tables u[player, c1, c2, a1, a2] in [0, 1]; types are drawn
independently from the instance prior.  Each player's loss for (own type c,
action i) is 1 - expected utility against the opponent's current strategy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from ..apps.bayes import BayesInstance, bayes_bundle, bayes_payoff, bayes_responder, bayes_swap_regret
from ..convex import hull_body
from ..errors import ConfigError
from ..olo import learning_rate, quadratic_learner


@dataclass
class SelfplayReport:
    regrets: List[float]           # BSReg of each player, in loss units
    T: int
    strategies: np.ndarray         # (T, 2, C*K) plays

    @property
    def gap(self) -> float:
        """max over players of BSReg / T: bounds every player's best Bayesian deviation gain."""
        return max(self.regrets) / self.T

    def target(self, inst: BayesInstance) -> float:
        return 3 * inst.K * inst.C / math.sqrt(self.T) + 20 / self.T


def toy_game(C: int = 2, K: int = 2) -> np.ndarray:
    """Type-dependent coordination game: players gain for matching when types agree, else for mismatching."""
    u = np.zeros((2, C, C, K, K))
    for c1 in range(C):
        for c2 in range(C):
            for a1 in range(K):
                for a2 in range(K):
                    hit = (a1 == a2) == (c1 == c2)
                    u[0, c1, c2, a1, a2] = 0.8 if hit else 0.1 + 0.1 * a1
                    u[1, c1, c2, a1, a2] = 0.6 if hit else 0.2 * a2
    return u


def _check(inst: BayesInstance, utilities: np.ndarray) -> np.ndarray:
    u = np.asarray(utilities, dtype=float)
    C, K = inst.C, inst.K
    if u.shape != (2, C, C, K, K):
        raise ConfigError(f"utilities must have shape {(2, C, C, K, K)}, got {u.shape}", field="utilities")
    if np.any(u < 0) or np.any(u > 1):
        raise ConfigError("utilities must lie in [0, 1]", field="utilities")
    return u


def player_losses(inst: BayesInstance, utilities: np.ndarray, strategies: np.ndarray) -> np.ndarray:
    """(2, C*K) loss vectors given both players' type-indexed mixed strategies."""
    C, K, mu = inst.C, inst.K, inst.mu
    s1 = strategies[0].reshape(C, K)
    s2 = strategies[1].reshape(C, K)
    # expected utility of (own type, own action), opponent type and action marginalized
    e1 = np.einsum("d,db,cdab->ca", mu, s2, utilities[0])
    e2 = np.einsum("c,ca,cdab->db", mu, s1, utilities[1])
    return np.stack([1.0 - e1.ravel(), 1.0 - e2.ravel()])


def selfplay_bce(inst: BayesInstance, utilities: np.ndarray, T: int) -> SelfplayReport:
    """Run both players for T rounds and report each player's Bayesian swap regret."""
    if T < 1:
        raise ConfigError(f"horizon must be >= 1, got T={T}", field="T")
    u = _check(inst, utilities)
    bundle = bayes_bundle(inst)
    payoff = bayes_payoff(inst)
    body = hull_body(payoff.flat)
    eta = learning_rate("quadratic", T, D_x=payoff.dual_diameter, D_y=inst.C * math.sqrt(inst.K))
    learners = [quadratic_learner(body, bundle.center, eta) for _ in range(2)]
    responder = bayes_responder(inst)
    plays = np.zeros((T, 2, inst.dim))
    losses = np.zeros((T, 2, inst.dim))
    for t in range(T):
        strat = np.stack([responder(lr.iterate()) for lr in learners])
        loss = player_losses(inst, u, strat)
        for k, lr in enumerate(learners):
            lr.update(-np.outer(strat[k], loss[k]))
        plays[t], losses[t] = strat, loss
    regrets = [bayes_swap_regret(plays[:, k], losses[:, k], inst) for k in range(2)]
    return SelfplayReport(regrets, T, plays)
