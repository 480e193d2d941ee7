"""Blackwell approachability to the nonpositive orthant, in two flavours.

`linf_run` keeps a weight vector over all d payoff coordinates (exponential
weights on the padded simplex).  `pseudonorm_run` works in the n x m basis
space, where the payoff is the outer product p l^T and the dual iterate lives
in conv{v_i} or an extension of it described only through oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .convex import ConvexBody, convex_minimize, lp_feasible, solver_tol
from .errors import ConfigError, Infeasible, SeparabilityViolation, SolverFailure
from .geometry import ExplicitPayoff, linf_distance_to_orthant
from .olo import Ftrl, learning_rate, negentropy_learner

LINF_DIM_GUARD = 10 ** 6

Responder = Callable[[np.ndarray], np.ndarray]
Adversary = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OrthantGenerators:
    """Scales lambda_k with lambda_k e_k inside the loss set."""
    scales: np.ndarray

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if s.ndim != 1 or s.size == 0 or np.any(s <= 0) or not np.all(np.isfinite(s)):
            raise ConfigError("orthant generator scales must be finite and positive", field="scales")
        object.__setattr__(self, "scales", s)

    @property
    def m(self) -> int:
        return self.scales.size

    def vectors(self) -> np.ndarray:
        return np.diag(self.scales)

    def check(self, loss_member: Callable[[np.ndarray], bool]) -> None:
        for k, v in enumerate(self.vectors()):
            if not loss_member(v):
                raise ConfigError(f"generator {k} (scale {self.scales[k]}) is outside the loss set",
                                  field="scales")


@dataclass(frozen=True)
class OracleBundle:
    """What the efficient pseudonorm algorithm may touch.

    `basis_value(z)` returns max_i <v_i, z> for z in the cone spanned by the
    basis points; the pair-based regret oracle is derived from it by
    aggregating sum_r alpha_r p_r l_r^T first.
    """
    basis_value: Callable[[np.ndarray], float]
    actions: ConvexBody
    generators: OrthantGenerators
    rho: float
    center: Optional[np.ndarray] = None

    def regret_oracle(self, actions: np.ndarray, losses: np.ndarray,
                      weights: Optional[np.ndarray] = None) -> float:
        """max_i sum_r alpha_r u_i(p_r, l_r)."""
        P = np.atleast_2d(np.asarray(actions, dtype=float))
        L = np.atleast_2d(np.asarray(losses, dtype=float))
        a = np.ones(P.shape[0]) if weights is None else np.asarray(weights, dtype=float)
        if np.any(a < 0):
            raise ConfigError("regret oracle weights must be nonnegative", field="weights")
        return float(self.basis_value(np.einsum("r,ri,rj->ij", a, P, L)))

    @property
    def shape(self):
        return (self.actions.ambient_dim, self.generators.m)


def explicit_bundle(payoff: ExplicitPayoff, actions: ConvexBody,
                    generators: OrthantGenerators) -> OracleBundle:
    """Bundle whose regret oracle loops over the d explicit coefficient matrices."""
    V = payoff.flat
    return OracleBundle(lambda z: float(np.max(V @ np.asarray(z).ravel())), actions, generators,
                        rho=2.0 * payoff.dual_radius,
                        center=payoff.lift_dual(np.full(payoff.d, 1.0 / payoff.d)))


@dataclass
class DualPoint:
    """Either simplex weights over the d coordinates or a point in basis space."""
    weights: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None

    def to_basis(self, payoff: ExplicitPayoff) -> np.ndarray:
        if self.basis is not None:
            return self.basis
        w = np.asarray(self.weights, dtype=float)[: payoff.d]
        return payoff.lift_dual(w)


@dataclass
class ApproachRun:
    """Per-round record of an approachability run."""
    actions: np.ndarray
    losses: np.ndarray
    duals: List[np.ndarray]
    payoffs: np.ndarray
    cumulative: np.ndarray
    regret_curve: np.ndarray
    residuals: np.ndarray
    dual_norms: np.ndarray

    @property
    def T(self) -> int:
        return self.actions.shape[0]

    @property
    def regret(self) -> float:
        return float(self.regret_curve[-1])

    @property
    def distance(self) -> float:
        return self.regret / self.T


def responder_residual(theta_basis: np.ndarray, p: np.ndarray, generators: OrthantGenerators) -> float:
    """Largest <theta, p (lambda_k e_k)^T> over the generators, floored at 0."""
    vals = (np.asarray(p, dtype=float) @ theta_basis) * generators.scales
    return max(float(np.max(vals)), 0.0)


def lp_responder(actions: ConvexBody, generators: OrthantGenerators,
                 tol: Optional[float] = None) -> Responder:
    """Responder that finds p in the action set with <theta, p (lambda_k e_k)^T> <= 0 for all k."""

    def respond(theta_basis: np.ndarray) -> np.ndarray:
        A = (theta_basis * generators.scales[None, :]).T
        return lp_feasible(A, np.zeros(generators.m), actions, tol=tol)

    return respond


def _respond(responder: Responder, theta_basis, theta, t) -> np.ndarray:
    try:
        return np.asarray(responder(theta_basis), dtype=float)
    except Infeasible as exc:
        raise SeparabilityViolation(f"no action satisfies the halfspace condition at round {t}: {exc}",
                                    theta=theta, round_index=t) from exc


def linf_run(payoff: ExplicitPayoff, adversary: Adversary, T: int, responder: Responder,
             generators: Optional[OrthantGenerators] = None, eta: Optional[float] = None,
             payoff_bound: float = 1.0, learner: Optional[Ftrl] = None) -> ApproachRun:
    """Exponential weights over the d payoff coordinates, feeding y_t = -u(p_t, l_t).

    The responder sees V^T theta (theta restricted to the first d padded
    coordinates); the halfspace condition is identical in either coordinate system.
    """
    d = payoff.d
    if d > LINF_DIM_GUARD:
        raise ConfigError(f"explicit payoff dimension d={d} exceeds guard {LINF_DIM_GUARD}", field="d")
    if eta is None:
        eta = learning_rate("negentropy", T, D_y=payoff_bound, dim=d + 1)
    ftrl = learner if learner is not None else negentropy_learner(d, eta)
    gens = generators if generators is not None else OrthantGenerators(np.ones(payoff.m))
    n, m = payoff.n, payoff.m
    P = np.zeros((T, n))
    L = np.zeros((T, m))
    U = np.zeros((T, d))
    duals, curve, resid, norms = [], np.zeros(T), np.zeros(T), np.zeros(T)
    cum = np.zeros(d)
    for t in range(T):
        theta = ftrl.iterate()
        w = theta[:d]
        scale = w.sum()
        # the halfspace condition is scale-invariant, so the responder sees V^T(w / sum w)
        tb = payoff.lift_dual(w / scale)
        p = _respond(responder, tb, theta, t)
        loss = np.asarray(adversary(t, p), dtype=float)
        u = payoff.payoff(p, loss)
        cum += u
        ftrl.update(-u)
        P[t], L[t], U[t] = p, loss, u
        duals.append(theta)
        curve[t] = linf_distance_to_orthant(cum)
        resid[t] = responder_residual(tb, p, gens)
        norms[t] = float(np.linalg.norm(theta))
    return ApproachRun(P, L, duals, U, cum, curve, resid, norms)


def pseudonorm_run(source: OracleBundle, adversary: Adversary, T: int, learner: Ftrl,
                   responder: Responder) -> ApproachRun:
    """Dual iterate in basis space, fed y_t = -p_t l_t^T; regret read off the regret oracle."""
    if isinstance(source, ExplicitPayoff):
        raise ConfigError("wrap explicit payoffs with explicit_bundle() to supply the action set",
                          field="source")
    n, m = source.shape
    P = np.zeros((T, n))
    L = np.zeros((T, m))
    Z = np.zeros((T, n, m))
    duals, curve, resid, norms = [], np.zeros(T), np.zeros(T), np.zeros(T)
    cum = np.zeros((n, m))
    for t in range(T):
        try:
            tb = learner.iterate()
        except SolverFailure as exc:
            exc.round_index = t
            raise
        p = _respond(responder, tb, tb, t)
        loss = np.asarray(adversary(t, p), dtype=float)
        z = np.outer(p, loss)
        cum += z
        learner.update(-z)
        P[t], L[t], Z[t] = p, loss, z
        duals.append(tb)
        curve[t] = max(source.basis_value(cum), 0.0)
        resid[t] = responder_residual(tb, p, source.generators)
        norms[t] = float(np.linalg.norm(tb))
    return ApproachRun(P, L, duals, Z, cum, curve, resid, norms)


def reduce_to_pseudonorm(payoff: ExplicitPayoff):
    """The pseudonorm f(x) = max(max_i <v_i, x>, 0) and the cone {x : <x, v_i> <= 0}.

    Returns (f, cone_member) as callables on n x m matrices.
    """
    V = payoff.flat

    def f(x):
        return max(float(np.max(V @ np.asarray(x).ravel())), 0.0)

    def in_cone(x, tol=1e-9):
        return bool(np.all(V @ np.asarray(x).ravel() <= tol))

    return f, in_cone


# ------------------------------------------------------------ oracle machinery

@dataclass
class Decomposition:
    """z = sum_k alpha_k p_k (lambda_k e_k)^T."""
    alphas: np.ndarray
    actions: np.ndarray
    losses: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ki,kj->ij", self.alphas, self.actions, self.losses)


def _cone_scale(x: np.ndarray, body: ConvexBody, iters: int = 200) -> Optional[float]:
    """Some beta > 0 with beta x in the body, or None (bisection on separation cuts)."""
    if body.cone_separation is not None and body.cone_separation(x) is not None:
        return None
    lo, hi = 0.0, math.inf
    beta = 1.0
    for _ in range(iters):
        pt = beta * x
        if body.membership(pt):
            return beta
        h = body.separation(pt) if body.separation is not None else None
        if h is None:
            # membership-only body: probe both directions
            h = -x if body.membership(0.5 * pt) else x
        slope = float(h @ x)
        if slope > 0:
            hi = beta
        elif slope < 0:
            lo = beta
        else:
            return None
        beta = 2.0 * beta if math.isinf(hi) else 0.5 * (lo + hi)
        if not math.isinf(hi) and hi - lo <= 1e-15 * hi:
            break
    return None


def cone_membership_Z(z: np.ndarray, actions: ConvexBody, generators: OrthantGenerators,
                      tol: float = 1e-8) -> Optional[Decomposition]:
    """Decide z in cone{p l^T}; on success return an explicit conic decomposition."""
    z = np.asarray(z, dtype=float)
    n, m = z.shape
    if m != generators.m or n != actions.ambient_dim:
        raise ConfigError(f"basis point shape {z.shape} does not match ({actions.ambient_dim}, {generators.m})",
                          field="z")
    alphas, acts, losses = [], [], []
    for k in range(m):
        col = z[:, k]
        if np.linalg.norm(col) <= 1e-300:
            continue
        beta = _cone_scale(col, actions)
        if beta is None:
            return None
        lam = generators.scales[k]
        e = np.zeros(m)
        e[k] = lam
        alphas.append(1.0 / (beta * lam))
        acts.append(beta * col)
        losses.append(e)
    if not alphas:
        return Decomposition(np.zeros(0), np.zeros((0, n)), np.zeros((0, m)))
    dec = Decomposition(np.array(alphas), np.array(acts), np.array(losses))
    if np.max(np.abs(dec.reconstruct() - z)) > tol * max(1.0, np.max(np.abs(z))):
        return None
    return dec


def eval_max_over_Z(bundle: OracleBundle, z: np.ndarray) -> float:
    """max_i <v_i, z> for z in the cone, via the decomposition and the regret oracle."""
    dec = cone_membership_Z(z, bundle.actions, bundle.generators)
    if dec is None:
        raise ConfigError("point lies outside the cone of basis points", field="z")
    if dec.alphas.size == 0:
        return 0.0
    return bundle.regret_oracle(dec.actions, dec.losses, dec.alphas)


def cone_slice_body(actions: ConvexBody, generators: OrthantGenerators, tol: float = 1e-9) -> ConvexBody:
    """The cone of basis points intersected with the unit Frobenius ball.

    Column k of z is charted as t s + B w (s, B the affine chart of the action
    set), so lower-dimensional action sets give a lower-dimensional chart.
    """
    n, m = actions.ambient_dim, generators.m
    if actions.lift is None:
        chart = np.eye(n)
        y0_col = None
    else:
        chart = np.hstack([actions.shift[:, None], actions.lift])
    q = chart.shape[1]
    lift = np.zeros((n * m, m * q))
    for k in range(m):
        for i in range(n):
            lift[i * m + k, k * q:(k + 1) * q] = chart[i]
    sv = np.linalg.svd(lift, compute_uv=False)
    x_amb = actions.to_ambient(actions.x0)
    if actions.lift is None:
        if actions.cone_separation is not None and actions.cone_separation(np.zeros(n)) is None \
                and actions.contains(np.zeros(n)) and np.linalg.norm(x_amb) < actions.r:
            # 0 interior to the action set: the cone is everything.
            y0 = np.zeros(m * q)
            r_cone = math.inf
        else:
            tau = 0.5 / (math.sqrt(m) * max(np.linalg.norm(x_amb), 1e-12))
            y0 = np.tile(tau * x_amb, m)
            r_cone = actions.r * tau / (1.0 + np.linalg.norm(actions.x0) + actions.r)
    else:
        tau = 0.5 / (math.sqrt(m) * max(np.linalg.norm(x_amb), 1e-12))
        y0 = np.tile(np.concatenate([[tau], tau * actions.x0]), m)
        r_cone = actions.r * tau / (1.0 + np.linalg.norm(actions.x0) + actions.r)
    z0_norm = float(np.linalg.norm(lift @ y0))
    r = min(r_cone, (1.0 - z0_norm) / sv.max())
    R = float(np.linalg.norm(y0)) + 1.0 / sv.min()

    def member(zf):
        if np.linalg.norm(zf) > 1.0 + tol:
            return False
        zm = zf.reshape(n, m)
        if actions.cone_separation is not None:
            return all(actions.cone_separation(zm[:, k]) is None for k in range(m))
        return cone_membership_Z(zm, actions, generators) is not None

    separate = None
    if actions.cone_separation is not None:
        def separate(zf):
            nz = np.linalg.norm(zf)
            if nz > 1.0 + tol:
                return zf / nz
            zm = zf.reshape(n, m)
            for k in range(m):
                h = actions.cone_separation(zm[:, k])
                if h is not None:
                    H = np.zeros((n, m))
                    H[:, k] = h
                    return H.ravel()
            return None

    return ConvexBody(m * q, member, y0, max(r, 1e-12), R, separation=separate, lift=lift,
                      shift=np.zeros(n * m))


def extended_dual_membership(bundle: OracleBundle, theta_basis: np.ndarray, tol: Optional[float] = None,
                             eps: Optional[float] = None, slice_body: Optional[ConvexBody] = None):
    """Is <theta, z> <= max_i <v_i, z> for every z in the cone of basis points?

    Minimizes h(z) = max_i <v_i, z> - <theta, z> over the cone's unit-ball
    slice.  h is positively homogeneous, so the sign of that minimum decides.
    Returns (inside, witness) where the witness z certifies h(z) < -tol.
    """
    tol = solver_tol() if tol is None else tol
    eps = tol / 10 if eps is None else eps
    body = slice_body if slice_body is not None else cone_slice_body(bundle.actions, bundle.generators)
    tf = np.asarray(theta_basis, dtype=float).ravel()
    shape = bundle.shape

    def h(zf):
        return bundle.basis_value(zf.reshape(shape)) - tf @ zf

    try:
        z, val = convex_minimize(body, h, eps=eps, stop=lambda v: v < -tol)
    except SolverFailure as exc:
        if exc.value is not None and exc.value < -tol:
            return False, exc.incumbent.reshape(shape)
        raise SolverFailure(f"dual membership undecided; incumbent h = {exc.value}",
                            incumbent=exc.incumbent, value=exc.value) from exc
    if val < -tol:
        return False, z.reshape(shape)
    return True, None


def extended_dual_body(bundle: OracleBundle, tol: Optional[float] = None,
                       r: Optional[float] = None) -> ConvexBody:
    """The extended dual set intersected with the ball of radius rho, as an oracle body.

    Separation: the ball normal, or the witness z returned by the membership test
    (every member theta' has <theta', z> <= max_i <v_i, z> < <theta, z>).
    """
    tol = solver_tol() if tol is None else tol
    n, m = bundle.shape
    slice_body = cone_slice_body(bundle.actions, bundle.generators)
    center = np.zeros(n * m) if bundle.center is None else np.asarray(bundle.center, float).ravel()
    rho = bundle.rho

    def separate(x):
        nx = np.linalg.norm(x)
        if nx > rho + tol:
            return x / nx
        inside, wit = extended_dual_membership(bundle, x.reshape(n, m), tol=tol, slice_body=slice_body)
        return None if inside else wit.ravel()

    def member(x):
        return separate(x) is None

    r0 = r if r is not None else 1e-3 * rho
    return ConvexBody(n * m, member, center, r0, rho + float(np.linalg.norm(center)), separation=separate)


# ------------------------------------------------------------ maximum entropy

@dataclass
class MaxentResult:
    entropy: float
    dual_value: float
    weights: np.ndarray
    multipliers: np.ndarray
    residual: float


def maxent_oracle_small(payoff: ExplicitPayoff, theta_basis: np.ndarray, tol: float = 1e-9,
                        max_iter: int = 500) -> MaxentResult:
    """max H(theta) over the simplex subject to V^T theta = theta_tilde, through the Gibbs dual.

    Minimizes the convex dual g(lam) = log Z(lam) - <lam, theta_tilde>, where
    theta_i is proportional to exp(<lam, v_i>), by damped Newton steps.  At the
    optimum the entropy equals the dual value.
    """
    from scipy.special import logsumexp

    if payoff.d > 10 ** 4:
        raise ConfigError(f"d={payoff.d} too large for the explicit maxent oracle", field="d")
    from .geometry import hull_contains_lp
    V = payoff.flat
    tt = np.asarray(theta_basis, dtype=float).ravel()
    if not hull_contains_lp(V, tt):
        raise ConfigError("dual point is outside conv{v_i}", field="theta")
    # restrict to the affine span of the v_i so the dual is strictly convex
    Vc = V - V.mean(axis=0)
    _, s, Wt = np.linalg.svd(Vc, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s.max())))
    W = Wt[:rank].T
    A = V @ W
    b = tt @ W
    mu = np.zeros(rank)

    def dual(mu_):
        return float(logsumexp(A @ mu_) - mu_ @ b)

    g_val = dual(mu)
    res = math.inf
    for _ in range(max_iter):
        a = A @ mu
        th = np.exp(a - logsumexp(a))
        mean = th @ A
        grad = mean - b
        res = float(np.max(np.abs(grad)))
        if res <= tol:
            break
        cov = (A * th[:, None]).T @ A - np.outer(mean, mean)
        lam_reg = 1e-12 + 1e-3 * res
        step = np.linalg.solve(cov + lam_reg * np.eye(rank), -grad)
        t = 1.0
        while t > 1e-12:
            cand = mu + t * step
            c_val = dual(cand)
            if c_val <= g_val + 1e-4 * t * (grad @ step):
                break
            t *= 0.5
        mu, g_val = cand, c_val
    a = A @ mu
    th = np.exp(a - logsumexp(a))
    resid = float(np.max(np.abs(th @ V - tt)))
    pos = th[th > 0]
    entropy = float(-np.sum(pos * np.log(pos)))
    if resid > 1e-6:
        raise SolverFailure(f"maxent dual did not converge: residual {resid:.2e}", incumbent=th, value=resid)
    return MaxentResult(entropy, dual(mu), th, W @ mu, resid)
