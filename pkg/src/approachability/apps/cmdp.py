"""Feasibility in constrained episodic MDPs through l_inf approachability.

States are integers 0..S-1 grouped into layers; layer 0 holds the start state
and the last layer holds the terminal state.  A policy is an (S, A) array of
action probabilities; rows of the terminal state are ignored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigError
from ..olo import learning_rate, negentropy_learner


@dataclass(frozen=True)
class LayeredMdp:
    layers: Sequence[Sequence[int]]
    transitions: np.ndarray          # (S, A, S)
    losses: np.ndarray               # (S, A, d), entries in [0, 1]
    thresholds: np.ndarray           # (d,), entries in [0, L]
    names: Optional[Sequence[str]] = None

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        ell = np.asarray(self.losses, dtype=float)
        c = np.asarray(self.thresholds, dtype=float)
        layers = [list(map(int, layer)) for layer in self.layers]
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "losses", ell)
        object.__setattr__(self, "thresholds", c)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 2 or len(layers[0]) != 1 or len(layers[-1]) != 1:
            raise ConfigError("need >= 2 layers with a single start and a single terminal state",
                              field="layers")
        flat = [s for layer in layers for s in layer]
        S = P.shape[0]
        if sorted(flat) != list(range(S)):
            raise ConfigError("layers must partition the states 0..S-1", field="layers")
        if P.ndim != 3 or P.shape[2] != S or ell.shape[:2] != P.shape[:2]:
            raise ConfigError("transition/loss tables have inconsistent shapes", field="transitions")
        if np.any(ell < 0) or np.any(ell > 1):
            raise ConfigError("losses must lie in [0, 1]", field="losses")
        if c.shape != (ell.shape[2],) or np.any(c < 0) or np.any(c > self.L):
            raise ConfigError(f"thresholds must be a length-{ell.shape[2]} vector in [0, L]", field="thresholds")
        for l in range(self.L):
            nxt = set(layers[l + 1])
            for x in layers[l]:
                rows = P[x]
                if np.any(rows < 0) or np.any(np.abs(rows.sum(axis=1) - 1) > 1e-9):
                    raise ConfigError(f"transition rows of state {x} must be distributions", field="transitions")
                if np.any(rows[:, [s for s in range(S) if s not in nxt]] > 0):
                    raise ConfigError(f"state {x} transitions outside layer {l + 1}", field="transitions")

    @property
    def L(self) -> int:
        return len(self.layers) - 1

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    @property
    def d(self) -> int:
        return self.losses.shape[2]

    def decision_states(self) -> List[int]:
        return [x for layer in self.layers[:-1] for x in layer]


def _check_policy(mdp: LayeredMdp, policy: np.ndarray) -> np.ndarray:
    pol = np.asarray(policy, dtype=float)
    if pol.shape != (mdp.n_states, mdp.n_actions):
        raise ConfigError(f"policy shape {pol.shape} != {(mdp.n_states, mdp.n_actions)}", field="policy")
    rows = pol[mdp.decision_states()]
    if np.any(rows < -1e-12) or np.any(np.abs(rows.sum(axis=1) - 1) > 1e-9):
        raise ConfigError("policy rows must be probability vectors", field="policy")
    return pol


def occupancy_from_policy(mdp: LayeredMdp, policy: np.ndarray) -> np.ndarray:
    """q(x, a) = Pr[visit x and play a], by a forward pass over the layers."""
    pol = _check_policy(mdp, policy)
    reach = np.zeros(mdp.n_states)
    reach[mdp.layers[0][0]] = 1.0
    q = np.zeros((mdp.n_states, mdp.n_actions))
    for layer in mdp.layers[:-1]:
        for x in layer:
            q[x] = reach[x] * pol[x]
            reach += q[x] @ mdp.transitions[x]
    return q


def expected_losses(mdp: LayeredMdp, q: np.ndarray) -> np.ndarray:
    """<q, l^i> for every constraint i."""
    return np.einsum("xa,xai->i", q, mdp.losses)


def best_response(mdp: LayeredMdp, weights: np.ndarray, eps0: float = 0.0,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Deterministic policy minimizing expected <l(x, a), weights>, by backward induction.

    With eps0 > 0 each action value is perturbed by at most eps0 / (2L) before
    the argmin, which keeps the value gap within eps0.  Ties go to the lowest action index.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (mdp.d,):
        raise ConfigError(f"weights must have length {mdp.d}", field="weights")
    cost = mdp.losses @ w
    V = np.zeros(mdp.n_states)
    pol = np.zeros((mdp.n_states, mdp.n_actions))
    pol[mdp.layers[-1][0], 0] = 1.0
    half = eps0 / (2 * mdp.L)
    for layer in reversed(mdp.layers[:-1]):
        for x in layer:
            qv = cost[x] + mdp.transitions[x] @ V
            noisy = qv
            if eps0 > 0:
                gen = rng if rng is not None else np.random.default_rng(0)
                noisy = qv + gen.uniform(-half, half, size=qv.shape)
            a = int(np.flatnonzero(noisy <= noisy.min() + 1e-12)[0])
            pol[x, a] = 1.0
            V[x] = qv[a]
    return pol


def est_oracle(mdp: LayeredMdp, policy: np.ndarray, eps1: float = 0.0,
               rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Expected constraint losses of a policy, plus uniform noise of size eps1, clipped to [0, L]."""
    z = expected_losses(mdp, occupancy_from_policy(mdp, policy))
    if eps1 > 0:
        gen = rng if rng is not None else np.random.default_rng(0)
        z = z + gen.uniform(-eps1, eps1, size=z.shape)
    return np.clip(z, 0.0, mdp.L)


def rollout_mean(mdp: LayeredMdp, policy: np.ndarray, episodes: int, rng: np.random.Generator):
    """Monte-Carlo estimate of the constraint losses (mean and standard error)."""
    pol = _check_policy(mdp, policy)
    totals = np.zeros((episodes, mdp.d))
    start = mdp.layers[0][0]
    x = np.full(episodes, start)
    for _ in range(mdp.L):
        cp = np.cumsum(pol[x], axis=1)
        a = (rng.random(episodes)[:, None] > cp).sum(axis=1)
        a = np.minimum(a, mdp.n_actions - 1)
        totals += mdp.losses[x, a]
        ct = np.cumsum(mdp.transitions[x, a], axis=1)
        x = (rng.random(episodes)[:, None] > ct).sum(axis=1)
        x = np.minimum(x, mdp.n_states - 1)
    return totals.mean(axis=0), totals.std(axis=0, ddof=1) / math.sqrt(episodes)


@dataclass
class CmdpRun:
    policies: List[np.ndarray]
    occupancies: np.ndarray          # (T, S, A)
    violations: np.ndarray           # max_i (q_bar . l^i - c_i) after each round
    weights: np.ndarray              # (T, d + 1) dual iterates

    @property
    def final_violation(self) -> float:
        return float(self.violations[-1])

    def mixture_occupancy(self) -> np.ndarray:
        return self.occupancies.mean(axis=0)


def cmdp_feasibility_run(mdp: LayeredMdp, T: int, eps0: float = 0.0, eps1: float = 0.0,
                         seed: int = 0, eta: Optional[float] = None) -> CmdpRun:
    """Exponential weights over the d constraints (padded), best-responding with the MDP oracles.

    Round t: theta from the learner, pi_t = best response to theta, z_t from the
    estimation oracle, loss -[z_t - c, 0] to the learner.
    """
    if T < 1:
        raise ConfigError(f"horizon must be >= 1, got T={T}", field="T")
    rng = np.random.default_rng(seed)
    d = mdp.d
    if eta is None:
        eta = learning_rate("negentropy", T, D_y=float(mdp.L), dim=d + 1)
    ftrl = negentropy_learner(d, eta)
    S, A = mdp.n_states, mdp.n_actions
    occ = np.zeros((T, S, A))
    weights = np.zeros((T, d + 1))
    viol = np.zeros(T)
    policies = []
    running = np.zeros(d)
    for t in range(T):
        theta = ftrl.iterate()
        pol = best_response(mdp, theta[:d], eps0, rng)
        z = est_oracle(mdp, pol, eps1, rng)
        ftrl.update(-(z - mdp.thresholds))
        q = occupancy_from_policy(mdp, pol)
        occ[t] = q
        weights[t] = theta
        policies.append(pol)
        running += expected_losses(mdp, q)
        viol[t] = float(np.max(running / (t + 1) - mdp.thresholds))
    return CmdpRun(policies, occ, viol, weights)


def violation_bound(mdp: LayeredMdp, T: int, eps0: float = 0.0, eps1: float = 0.0) -> float:
    """2 L sqrt(log(d + 1) / T) + eps0 + 2 eps1."""
    return 2 * mdp.L * math.sqrt(math.log(mdp.d + 1) / T) + eps0 + 2 * eps1


def random_layered_mdp(layer_sizes: Sequence[int], n_actions: int, d: int, rng: np.random.Generator,
                       margin: float = 0.02):
    """Random instance whose thresholds sit `margin` above a random stochastic policy's losses.

    Returns (mdp, feasible_policy).
    """
    sizes = [1] + list(layer_sizes) + [1]
    layers, nxt = [], 0
    for s in sizes:
        layers.append(list(range(nxt, nxt + s)))
        nxt += s
    S = nxt
    P = np.zeros((S, n_actions, S))
    for l in range(len(layers) - 1):
        for x in layers[l]:
            for a in range(n_actions):
                P[x, a, layers[l + 1]] = rng.dirichlet(np.ones(len(layers[l + 1])))
    ell = np.round(rng.random((S, n_actions, d)), 3)
    ell[layers[-1]] = 0.0
    pol = np.zeros((S, n_actions))
    for x in range(S):
        pol[x] = rng.dirichlet(np.ones(n_actions))
    L = len(layers) - 1
    tmp = LayeredMdp(layers, P, ell, np.zeros(d))
    c = np.minimum(expected_losses(tmp, occupancy_from_policy(tmp, pol)) + margin, L)
    return LayeredMdp(layers, P, ell, c), pol
