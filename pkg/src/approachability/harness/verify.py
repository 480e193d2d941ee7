"""Invariant batteries behind `approach verify --suite ...`.

Every suite returns a SuiteResult listing named checks; a suite passes when
all of its checks do.  Independent oracles (grids, enumeration, sampling,
Monte Carlo) are kept separate from the code paths they check.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from ..approach import (OrthantGenerators, cone_membership_Z, cone_slice_body, eval_max_over_Z,
                        explicit_bundle, extended_dual_body, extended_dual_membership,
                        maxent_oracle_small)
from ..convex import ball_body, convex_minimize, product_simplex_body, simplex_body
from ..errors import ConfigError
from ..geometry import (ExplicitPayoff, basis_map, cone_distance_lp, fenchel_dual_distance,
                        hull_contains_lp, linf_distance_to_orthant, primal_set_distance,
                        pseudodistance_to_cone)
from ..olo import quadratic_learner
from ..apps import bayes, cmdp, external, procrustes, swap
from .mdp_io import shipped_instance
from .runner import ExperimentConfig, run_experiment


@dataclass
class SuiteResult:
    name: str
    checks: List[Tuple[str, bool, str]] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def check(self, label: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    def failures(self) -> List[Tuple[str, bool, str]]:
        return [c for c in self.checks if not c[1]]

    def report(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.runtime:.1f}s, "
                 f"{len(self.checks) - len(self.failures())}/{len(self.checks)} checks)"]
        for label, ok, detail in self.checks:
            if not ok:
                lines.append(f"    failed: {label} {detail}")
        return "\n".join(lines)


def _timed(name: str):
    def wrap(fn: Callable[..., SuiteResult]):
        def run(**kwargs) -> SuiteResult:
            res = SuiteResult(name)
            start = time.perf_counter()
            fn(res, **kwargs)
            res.runtime = time.perf_counter() - start
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


# ------------------------------------------------------------------ oracles

def random_payoff(rng: np.random.Generator, max_nm: int = 3, max_d: int = 8) -> ExplicitPayoff:
    n, m = rng.integers(1, max_nm + 1, size=2)
    d = int(rng.integers(1, max_d + 1))
    return ExplicitPayoff(rng.normal(size=(d, n, m)))


def grid_min_over_hull(fn: Callable[[np.ndarray], float], vertices: np.ndarray, grid: int = 200) -> float:
    """min of a convex fn over conv(vertices) for up to 3 vertices.

    A barycentric grid brackets the minimizer; bounded scalar searches (nested
    for a triangle) then polish it.  Partial minimization keeps each nested
    function convex.
    """
    S = np.asarray(vertices, dtype=float)
    k = S.shape[0]
    if k == 1:
        return fn(S[0])
    if k == 2:
        seg = lambda a: fn((1 - a) * S[0] + a * S[1])
        best = min(seg(a) for a in np.linspace(0, 1, grid + 1))
        res = minimize_scalar(seg, bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
        return min(best, float(res.fun))
    if k == 3:
        def inner(a):
            if a >= 1:
                return fn(S[2])
            seg = lambda b: fn((1 - a) * ((1 - b) * S[0] + b * S[1]) + a * S[2])
            vals = min(seg(b) for b in np.linspace(0, 1, grid // 4 + 1))
            res = minimize_scalar(seg, bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
            return min(vals, float(res.fun))
        best = min(inner(a) for a in np.linspace(0, 1, grid // 4 + 1))
        res = minimize_scalar(inner, bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
        return min(best, float(res.fun))
    raise ConfigError("grid oracle supports at most 3 vertices", field="vertices")


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of O(n) (rotations and reflections)."""
    A = rng.normal(size=(n, n))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def enumerate_policies(mdp: cmdp.LayeredMdp):
    states = mdp.decision_states()
    for choice in itertools.product(range(mdp.n_actions), repeat=len(states)):
        pol = np.zeros((mdp.n_states, mdp.n_actions))
        pol[mdp.layers[-1][0], 0] = 1.0
        for x, a in zip(states, choice):
            pol[x, a] = 1.0
        yield pol


def random_simplex(rng, size):
    return rng.dirichlet(np.ones(size))


# ------------------------------------------------------------------ suites

@_timed("duality")
def suite_duality(res: SuiteResult, instances: int = 100, seed: int = 0) -> None:
    """Distance identity, primal/dual cone LPs, and Fenchel duality against a grid oracle."""
    rng = np.random.default_rng(seed)
    worst = {"dist": 0.0, "lp": 0.0, "fenchel_lp": 0.0, "grid": 0.0}
    for _ in range(instances):
        pay = random_payoff(rng)
        n, m = pay.n, pay.m
        T = int(rng.integers(1, 6))
        P = rng.normal(size=(T, n))
        L = rng.normal(size=(T, m))
        avg_u = np.mean([pay.payoff(p, l) for p, l in zip(P, L)], axis=0)
        avg_z = np.mean([basis_map(p, l) for p, l in zip(P, L)], axis=0)
        worst["dist"] = max(worst["dist"], abs(linf_distance_to_orthant(avg_u) - pseudodistance_to_cone(pay, avg_z)))
        # LP vs LP: primal cone distance vs dual support value (S = {0})
        primal = cone_distance_lp(pay, avg_z)
        dual = max(fenchel_dual_distance(pay, avg_z, np.zeros((1, n * m))), 0.0)
        worst["lp"] = max(worst["lp"], abs(primal - dual))
        # Fenchel duality with a polytope S given by 1-3 vertices
        k = int(rng.integers(1, 4))
        S = rng.normal(size=(k, n * m))
        dual_S = max(fenchel_dual_distance(pay, avg_z, S), 0.0)
        primal_S = primal_set_distance(pay, avg_z, S)
        worst["fenchel_lp"] = max(worst["fenchel_lp"], abs(primal_S - dual_S))
        V = pay.flat
        zf = avg_z.ravel()
        grid = grid_min_over_hull(lambda s: max(float(np.max(V @ (zf - s))), 0.0), S)
        worst["grid"] = max(worst["grid"], abs(grid - dual_S))
    res.check("linf distance == clamped pseudodistance", worst["dist"] <= 1e-9, f"max err {worst['dist']:.2e}")
    res.check("primal cone LP == dual hull LP", worst["lp"] <= 1e-9, f"max err {worst['lp']:.2e}")
    res.check("primal set LP == Fenchel dual LP", worst["fenchel_lp"] <= 1e-9,
              f"max err {worst['fenchel_lp']:.2e}")
    res.check("grid oracle == Fenchel dual LP", worst["grid"] <= 1e-6, f"max err {worst['grid']:.2e}")


def _orthant_extended_sup(pay: ExplicitPayoff, z: np.ndarray, box: float) -> float:
    """sup of <theta, z> over (conv{v_i} - nonnegative matrices) within a box, by LP.

    With the simplex as action set and unit generators the cone of basis
    points is the nonnegative orthant, whose polar is the nonpositive one.
    """
    V = pay.flat
    d, k = V.shape
    zf = z.ravel()
    # variables w (d, simplex), y (k, >= 0); theta = V^T w - y
    c = np.concatenate([-(V @ zf), zf])
    A_ub = np.vstack([np.hstack([V.T, -np.eye(k)]), np.hstack([-V.T, np.eye(k)])])
    b_ub = np.full(2 * k, box)
    A_eq = np.concatenate([np.ones(d), np.zeros(k)])[None, :]
    r = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                bounds=[(0, None)] * (d + k), method="highs")
    return float(-r.fun)


def _orthant_extended_contains(pay: ExplicitPayoff, theta: np.ndarray) -> bool:
    """theta in conv{v_i} - nonnegative matrices, by LP feasibility."""
    V = pay.flat
    d, k = V.shape
    A_eq = np.vstack([np.hstack([V.T, -np.eye(k)]), np.concatenate([np.ones(d), np.zeros(k)])[None, :]])
    b_eq = np.concatenate([theta.ravel(), [1.0]])
    r = linprog(np.zeros(d + k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * (d + k), method="highs")
    return r.status == 0


@_timed("dualset")
def suite_dualset(res: SuiteResult, seed: int = 0, probes: int = 1000, instances: int = 20,
                  extension_points: int = 2, ftrl_rounds: int = 4) -> None:
    """Hull equivalence, polar containment, extended dual set, iterate norms, cone decompositions."""
    rng = np.random.default_rng(seed)
    # LP hull membership agrees with the probe criterion
    agree = True
    for _ in range(instances):
        pay = random_payoff(rng)
        V = pay.flat
        X = rng.normal(size=(probes, V.shape[1]))
        fmax = (X @ V.T).max(axis=1)
        inside = random_simplex(rng, pay.d) @ V
        ok_in = hull_contains_lp(V, inside) and np.all(X @ inside <= fmax + 1e-9)
        # push a hull point well outside along the direction that separates it
        probe_dir = X[int(rng.integers(probes))]
        top = V[int(np.argmax(V @ probe_dir))]
        outside = top + (1.0 + np.linalg.norm(V, axis=1).max()) * probe_dir / np.linalg.norm(probe_dir)
        ok_out = (not hull_contains_lp(V, outside)) and np.any(X @ outside > fmax + 1e-9)
        agree &= bool(ok_in and ok_out)
    res.check("hull LP membership iff probe inequalities", agree)
    # hull points are in the polar of the cone
    worst = -np.inf
    for _ in range(instances):
        pay = random_payoff(rng)
        V = pay.flat
        k = V.shape[1]
        for _ in range(5):
            r = linprog(rng.normal(size=k), A_ub=V, b_ub=np.zeros(pay.d), bounds=[(-1, 1)] * k, method="highs")
            x = r.x
            theta = random_simplex(rng, pay.d) @ V
            worst = max(worst, float(theta @ x))
    res.check("<theta, x> <= 0 for hull theta and cone x", worst <= 1e-9, f"max {worst:.2e}")
    # sup over the extended set equals f(z) on the cone of basis points
    for name, pay in (("external K=2", external.external_payoff(2)), ("swap K=2", swap.swap_payoff(2))):
        bundle = explicit_bundle(pay, simplex_body(2), OrthantGenerators(np.ones(2)))
        body = extended_dual_body(bundle)
        slice_body = cone_slice_body(bundle.actions, bundle.generators)
        for j in range(extension_points):
            p = rng.dirichlet(np.ones(2), size=3)
            l = rng.random((3, 2))
            z = np.einsum("ri,rj->ij", p, l)
            f_z = float(np.max(pay.flat @ z.ravel()))
            via_oracle = eval_max_over_Z(bundle, z)
            via_lp = _orthant_extended_sup(pay, z, box=bundle.rho)
            _, val = convex_minimize(body, lambda th: -(th @ z.ravel()), eps=1e-9, grad=lambda th: -z.ravel())
            err = max(abs(-val - f_z), abs(via_lp - f_z), abs(via_oracle - f_z))
            res.check(f"extension ({name}, point {j}): sup over extended set == sup over hull == f(z)",
                      err <= 1e-6, f"err {err:.2e}")
        agree, decided = True, 0
        for _ in range(12):
            theta = random_simplex(rng, pay.d) @ pay.flat + rng.normal(scale=0.4, size=4)
            # skip points within 1e-6 of the boundary, where either answer is acceptable
            if _orthant_extended_contains(pay, theta + 1e-6) != _orthant_extended_contains(pay, theta - 1e-6):
                continue
            inside, wit = extended_dual_membership(bundle, theta.reshape(2, 2), slice_body=slice_body)
            decided += 1
            agree &= inside == _orthant_extended_contains(pay, theta)
            if not inside:
                agree &= bundle.basis_value(wit) - float(theta @ wit.ravel()) < 0
        res.check(f"extended membership ({name}): oracle agrees with polyhedral LP", agree and decided > 0,
                  f"{decided} points decided")
    # quadratic FTRL over the extended set stays within the hull diameter
    pay = external.external_payoff(2)
    bundle = explicit_bundle(pay, simplex_body(2), OrthantGenerators(np.ones(2)))
    body = extended_dual_body(bundle)
    learner = quadratic_learner(body, bundle.center, eta=1.0, eps=1e-7)
    norms = []
    for _ in range(ftrl_rounds):
        th = learner.iterate()
        norms.append(float(np.linalg.norm(th)))
        learner.update(-np.outer(rng.dirichlet(np.ones(2)), rng.random(2)))
    res.check("extended-set FTRL iterate norms <= hull diameter", max(norms) <= pay.dual_diameter + 1e-6,
              f"max norm {max(norms):.4f} vs diameter {pay.dual_diameter:.4f}")
    # cone decompositions reconstruct their input
    worst = 0.0
    cases = [(simplex_body(3), 3), (ball_body(3), 3), (product_simplex_body(2, 2), 3)]
    for body_a, m in cases:
        gens = OrthantGenerators(rng.uniform(0.5, 2.0, size=m))
        n = body_a.ambient_dim
        for _ in range(10):
            acts = np.array([body_a.to_ambient(body_a.x0 + 0.0) for _ in range(5)])
            if body_a.projection is not None:
                acts = np.array([body_a.projection(a + rng.normal(scale=0.5, size=n)) for a in acts])
            alphas = rng.exponential(size=5)
            ks = rng.integers(0, m, size=5)
            z = sum(a * np.outer(p, gens.scales[k] * np.eye(m)[k]) for a, p, k in zip(alphas, acts, ks))
            dec = cone_membership_Z(z, body_a, gens)
            if dec is None:
                worst = math.inf
                continue
            worst = max(worst, float(np.max(np.abs(dec.reconstruct() - z))))
    res.check("decomposition reconstruction", worst <= 1e-8, f"max err {worst:.2e}")


@_timed("equivalence")
def suite_equivalence(res: SuiteResult, T: int = 256, seeds: int = 5, Ks=(2, 3)) -> None:
    """Explicit exponential weights and the maxent pseudonorm path play identical actions."""
    for K in Ks:
        for seed in range(seeds):
            runs = {}
            for algo in ("linf-negentropy", "pseudo-maxent"):
                runs[algo] = run_experiment(ExperimentConfig(app="swap", K=K, T=T, algo=algo, seed=seed)).run
            diff = float(np.max(np.abs(runs["linf-negentropy"].actions - runs["pseudo-maxent"].actions)))
            res.check(f"swap K={K} seed={seed}: identical actions", diff <= 1e-6, f"max diff {diff:.2e}")


@_timed("maxent")
def suite_maxent(res: SuiteResult, points: int = 50, seed: int = 0) -> None:
    """Closed-form swap regularizer vs the numeric maxent oracle; Gibbs product identities."""
    rng = np.random.default_rng(seed)
    for K in (2, 3):
        pay = swap.swap_payoff(K)
        pis = swap.swap_functions(K)
        worst = 0.0
        for _ in range(points):
            Q = rng.dirichlet(np.full(K, 0.7), size=K)
            theta = swap.dual_from_marginals(Q)
            closed = swap.swap_maxent_regularizer(theta)
            numeric = maxent_oracle_small(pay, theta)
            worst = max(worst, abs(closed + numeric.entropy))
        res.check(f"K={K}: closed form == -numeric maxent", worst <= 1e-5, f"max err {worst:.2e}")
        norm_err, marg_err, proj_err = 0.0, 0.0, 0.0
        for _ in range(20):
            lam = rng.normal(size=(K, K))
            soft = np.exp(lam) / np.exp(lam).sum(axis=1, keepdims=True)
            gibbs = np.prod(soft[np.arange(K)[None, :], pis], axis=1)
            norm_err = max(norm_err, abs(gibbs.sum() - 1.0))
            marg = np.zeros((K, K))
            for w, pi in zip(gibbs, pis):
                marg[np.arange(K), pi] += w
            marg_err = max(marg_err, float(np.max(np.abs(marg - soft))))
            # marginal map round trip: theta -> q -> product distribution -> V^T theta
            th = swap.dual_from_marginals(soft)
            back = pay.lift_dual(swap.product_distribution(swap.marginals_from_dual(th)))
            proj_err = max(proj_err, float(np.max(np.abs(back - th))))
        res.check(f"K={K}: Gibbs product sums to 1", norm_err <= 1e-9, f"err {norm_err:.2e}")
        res.check(f"K={K}: Gibbs marginals == row softmax", marg_err <= 1e-9, f"err {marg_err:.2e}")
        res.check(f"K={K}: marginal map round trip", proj_err <= 1e-9, f"err {proj_err:.2e}")


RATE_CASES: Dict[str, Tuple[dict, Callable[[int], float]]] = {
    "external K=3 linf": (dict(app="external", K=3, algo="linf-negentropy"),
                          lambda T: 2 * math.sqrt(T * math.log(3 + 1)) + 10),
    "swap K=3 maxent": (dict(app="swap", K=3, algo="pseudo-maxent"),
                        lambda T: 3 * math.sqrt(T * 3 * math.log(3)) + 20),
    "swap K=3 quadratic": (dict(app="swap", K=3, algo="pseudo-quadratic"),
                           lambda T: 3 * 3 * math.sqrt(T) + 20),
    "bayes C=K=2 quadratic": (dict(app="bayes", C=2, K=2, algo="pseudo-quadratic"),
                              lambda T: 3 * 2 * 2 * math.sqrt(T) + 20),
    "procrustes n=3 quadratic": (dict(app="procrustes", n=3, algo="pseudo-quadratic"),
                                 lambda T: 3 * math.sqrt(3 * T) + 20),
}


@_timed("rates")
def suite_rates(res: SuiteResult, T: int = 4096, seeds: int = 20, cases=None) -> None:
    """Worst regret over seeds against the rate bound with slack, iid uniform losses."""
    for name in (cases or RATE_CASES):
        kw, bound = RATE_CASES[name]
        worst, mismatch = 0.0, 0.0
        for seed in range(seeds):
            tr = run_experiment(ExperimentConfig(T=T, seed=seed, adversary="iid", **kw))
            worst = max(worst, tr.summary["final_regret"])
            mismatch = max(mismatch, abs(tr.summary["final_regret"] - tr.summary["offline_regret"]))
        res.check(f"{name}: regret <= bound", worst <= bound(T), f"worst {worst:.2f} vs {bound(T):.2f}")
        res.check(f"{name}: trace regret == offline oracle", mismatch <= 1e-6, f"err {mismatch:.2e}")


def smoothed(x: np.ndarray, window: int = 64) -> np.ndarray:
    return np.convolve(x, np.ones(window) / window, mode="valid")


@_timed("cmdp")
def suite_cmdp(res: SuiteResult, T: int = 10_000, eps1: float = 0.2, seed: int = 0) -> None:
    """Violation bound on the shipped feasible instance, and sensitivity to estimation noise."""
    mdp = shipped_instance()
    clean = cmdp.cmdp_feasibility_run(mdp, T, seed=seed)
    bound = 2 * mdp.L * math.sqrt(math.log(mdp.d + 1) / T) + 0.05
    res.check("noise-free final violation <= bound", clean.final_violation <= bound,
              f"{clean.final_violation:.4f} vs {bound:.4f}")
    sm = smoothed(clean.violations)
    idx = np.linspace(0, sm.size - 1, 11).astype(int)
    res.check("smoothed violation trends downward", sm[-1] < sm[0] and np.all(np.diff(sm[idx]) <= 1e-3),
              f"deciles {np.round(sm[idx], 4).tolist()}")
    noisy = cmdp.cmdp_feasibility_run(mdp, T, eps1=eps1, seed=seed)
    tail = slice(int(0.9 * T), T)
    excess = float(np.mean(noisy.violations[tail] - clean.violations[tail]))
    res.check("noisy estimation: asymptotic excess <= 2 eps1 + 0.05", excess <= 2 * eps1 + 0.05,
              f"excess {excess:.4f}")
    res.check("T=1 violation <= L", cmdp.cmdp_feasibility_run(mdp, 1).final_violation <= mdp.L)


@_timed("bruteforce")
def suite_bruteforce(res: SuiteResult, seed: int = 0, trials: int = 20, samples: int = 10_000,
                     episodes: int = 100_000) -> None:
    """Application regret oracles against explicit enumeration, sampling and Monte Carlo."""
    rng = np.random.default_rng(seed)
    pay2 = swap.swap_payoff(2)
    worst = 0.0
    for _ in range(trials):
        T = int(rng.integers(1, 6))
        P = rng.dirichlet(np.ones(2), size=T)
        L = rng.random((T, 2))
        brute = max(float(np.max(pay2.flat @ (P.T @ L).ravel())), 0.0)
        worst = max(worst, abs(swap.swap_regret(P, L) - brute))
    res.check("swap_regret == 4-map enumeration", worst <= 1e-12, f"err {worst:.2e}")
    inst = bayes.BayesInstance(2, 2, np.array([0.3, 0.7]))
    bpay = bayes.bayes_payoff(inst)
    worst = 0.0
    for _ in range(trials):
        P = np.hstack([rng.dirichlet(np.ones(2), size=2) for _ in range(2)])
        L = rng.random((2, 4))
        brute = max(float(np.max([sum(float(np.sum(v * np.outer(p, l))) for p, l in zip(P, L))
                                  for v in bpay.coeffs])), 0.0)
        worst = max(worst, abs(bayes.bayes_swap_regret(P, L, inst) - brute))
    res.check(f"bayes_swap_regret == {bpay.d}-deviation enumeration", worst <= 1e-12, f"err {worst:.2e}")
    for n in (2, 3):
        T = 4
        P = np.array([v / max(1.0, np.linalg.norm(v)) for v in rng.normal(size=(T, n))])
        L = rng.uniform(-1, 1, size=(T, n))
        exact = procrustes.procrustes_regret(P, L)
        sampled = max(procrustes.procrustes_value_at(P, L, haar_orthogonal(n, rng)) for _ in range(samples))
        res.check(f"procrustes n={n}: regret >= sampled orthogonal values", sampled <= exact + 1e-9,
                  f"sampled {sampled:.6f} exact {exact:.6f}")
        if n == 2:
            res.check("procrustes n=2: sampled maximum within 1e-3", exact - sampled <= 1e-3,
                      f"gap {exact - sampled:.2e}")
    mdp, _ = cmdp.random_layered_mdp([2, 2], 2, 3, rng)
    ok = True
    for _ in range(trials):
        w = rng.normal(size=mdp.d)
        dp = cmdp.best_response(mdp, w)
        dp_val = float(cmdp.expected_losses(mdp, cmdp.occupancy_from_policy(mdp, dp)) @ w)
        brute = min(float(cmdp.expected_losses(mdp, cmdp.occupancy_from_policy(mdp, pol)) @ w)
                    for pol in enumerate_policies(mdp))
        ok &= abs(dp_val - brute) <= 1e-12
    res.check("best_response == deterministic-policy enumeration", ok)
    pol = np.array([rng.dirichlet(np.ones(mdp.n_actions)) for _ in range(mdp.n_states)])
    exact = cmdp.est_oracle(mdp, pol)
    mean, se = cmdp.rollout_mean(mdp, pol, episodes, rng)
    zscore = float(np.max(np.abs(mean - exact) / np.maximum(se, 1e-12)))
    res.check("est_oracle within 3 standard errors of Monte Carlo", zscore <= 3.0, f"max |z| {zscore:.2f}")


def _per_round_time(K: int, T: int, reps: int) -> float:
    times = []
    for rep in range(reps):
        cfg = ExperimentConfig(app="swap", K=K, T=T, algo="pseudo-quadratic", seed=rep)
        start = time.perf_counter()
        run_experiment(cfg)
        times.append((time.perf_counter() - start) / T)
    return float(np.median(times))


@_timed("complexity")
def suite_complexity(res: SuiteResult, T: int = 300, reps: int = 3) -> None:
    """Per-round cost of the pseudonorm path at K=8 and K=16; the explicit path refuses K=16."""
    t8 = _per_round_time(8, T, reps)
    t16 = _per_round_time(16, T, reps)
    res.check("pseudonorm per-round time grows at most 4x from K=8 to K=16", t16 <= 4 * t8,
              f"{t8 * 1e3:.3f} ms -> {t16 * 1e3:.3f} ms (ratio {t16 / t8:.2f})")
    try:
        ExperimentConfig(app="swap", K=16, T=T, algo="linf-negentropy").validate()
        res.check("explicit path rejected at K=16", False, "validation accepted d = 16^16")
    except ConfigError as exc:
        res.check("explicit path rejected at K=16", exc.field == "algo", str(exc))


SUITES = {
    "duality": suite_duality,
    "dualset": suite_dualset,
    "equivalence": suite_equivalence,
    "maxent": suite_maxent,
    "rates": suite_rates,
    "cmdp": suite_cmdp,
    "bruteforce": suite_bruteforce,
    "complexity": suite_complexity,
}
