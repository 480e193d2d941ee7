import itertools
import math

import numpy as np
import pytest

from approachability.apps import bayes, cmdp, procrustes, swap
from approachability.apps.external import external_basis_value, external_payoff, external_regret
from approachability.approach import maxent_oracle_small
from approachability.convex import product_simplex_body
from approachability.errors import ConfigError, InvalidDual
from approachability.harness.verify import enumerate_policies, haar_orthogonal


# ---------------------------------------------------------------- swap

def test_swap_regret_single_round():
    assert swap.swap_regret(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])) == 1.0


def test_swap_regret_best_response_is_zero():
    L = np.tile([0.3, 0.1, 0.8], (10, 1))
    P = np.tile([0.0, 1.0, 0.0], (10, 1))
    assert swap.swap_regret(P, L) == 0.0


def test_swap_regret_matches_enumeration():
    rng = np.random.default_rng(0)
    pay = swap.swap_payoff(2)
    assert pay.d == 4
    for _ in range(20):
        P = rng.dirichlet(np.ones(2), size=2)
        L = rng.random((2, 2))
        brute = max(0.0, max(sum(float(p @ L[t] - p @ L[t][list(pi)]) for t, p in enumerate(P))
                             for pi in itertools.product(range(2), repeat=2)))
        assert swap.swap_regret(P, L) == pytest.approx(brute, abs=1e-12)
        assert max(float(np.max(pay.flat @ (P.T @ L).ravel())), 0.0) == pytest.approx(brute, abs=1e-12)


def test_swap_functions_limit():
    assert swap.swap_functions(3).shape == (27, 3)
    with pytest.raises(ConfigError):
        swap.swap_functions(6)
    with pytest.raises(ConfigError):
        swap.swap_functions(1)


def test_maxent_regularizer_uniform_and_identity():
    K = 3
    assert swap.swap_maxent_regularizer(np.eye(K) - np.full((K, K), 1 / K)) == pytest.approx(-K * math.log(K))
    assert swap.swap_maxent_regularizer(np.zeros((K, K))) == 0.0


def test_maxent_regularizer_matches_numeric():
    rng = np.random.default_rng(1)
    for K in (2, 3):
        pay = swap.swap_payoff(K)
        for _ in range(5):
            Q = rng.dirichlet(np.ones(K), size=K)
            th = swap.dual_from_marginals(Q)
            assert swap.swap_maxent_regularizer(th) == pytest.approx(-maxent_oracle_small(pay, th).entropy, abs=1e-5)


def test_maxent_regularizer_rejects_invalid():
    with pytest.raises(InvalidDual):
        swap.swap_maxent_regularizer(np.array([[0.5, 0.7], [0.0, 0.0]]))


def test_maxent_argmin_is_row_softmax():
    rng = np.random.default_rng(2)
    cum = rng.normal(size=(3, 3))
    Q = np.eye(3) - swap.swap_maxent_argmin(cum, 0.4)
    # minimizing <I - Q, cum> rewards large cumulative entries, hence the positive exponent
    soft = np.exp(0.4 * cum) / np.exp(0.4 * cum).sum(axis=1, keepdims=True)
    np.testing.assert_allclose(Q, soft, atol=1e-12)


def test_swap_responder_examples():
    np.testing.assert_allclose(swap.swap_responder(np.array([[0.0, 1.0], [1.0, 0.0]])), [0.5, 0.5])
    np.testing.assert_allclose(swap.swap_responder(np.eye(2)), [0.5, 0.5])


def test_swap_responder_stationary():
    rng = np.random.default_rng(3)
    for K in (2, 3, 5, 8):
        for _ in range(10):
            Q = rng.dirichlet(np.ones(K), size=K)
            p = swap.swap_responder(Q)
            assert np.max(np.abs(p @ Q - p)) <= 1e-10
            assert p.min() >= 0 and p.sum() == pytest.approx(1.0)


def test_swap_responder_reducible_chain():
    Q = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]])
    p = swap.swap_responder(Q)
    assert np.max(np.abs(p @ Q - p)) <= 1e-10
    np.testing.assert_allclose(p, [1 / 3, 1 / 3, 1 / 3], atol=1e-10)


def test_swap_marginal_round_trip():
    rng = np.random.default_rng(4)
    for K in (2, 3):
        pay = swap.swap_payoff(K)
        Q = rng.dirichlet(np.ones(K), size=K)
        th = swap.dual_from_marginals(Q)
        back = pay.lift_dual(swap.product_distribution(swap.marginals_from_dual(th)))
        np.testing.assert_allclose(back, th, atol=1e-9)


def test_swap_gibbs_product_identity():
    rng = np.random.default_rng(5)
    for K in (2, 3):
        lam = rng.normal(size=(K, K))
        soft = np.exp(lam) / np.exp(lam).sum(axis=1, keepdims=True)
        theta = swap.product_distribution(soft)
        assert theta.sum() == pytest.approx(1.0, abs=1e-12)
        marg = np.zeros((K, K))
        for w, pi in zip(theta, swap.swap_functions(K)):
            marg[np.arange(K), pi] += w
        np.testing.assert_allclose(marg, soft, atol=1e-12)


def test_swap_dual_body_projection():
    K = 3
    body = swap.swap_dual_body(K)
    rng = np.random.default_rng(6)
    x = body.projection(rng.normal(size=K * K))
    assert body.contains(x)
    Q = np.eye(K) - x.reshape(K, K)
    assert np.all(Q >= -1e-12) and np.allclose(Q.sum(axis=1), 1)


def test_swap_basis_value_is_max_over_maps():
    rng = np.random.default_rng(7)
    pay = swap.swap_payoff(3)
    Z = rng.normal(size=(3, 3))
    assert swap.swap_basis_value(Z) == pytest.approx(float(np.max(pay.flat @ Z.ravel())), abs=1e-12)


def test_external_regret_and_basis_value():
    rng = np.random.default_rng(8)
    pay = external_payoff(3)
    P = rng.dirichlet(np.ones(3), size=6)
    L = rng.random((6, 3))
    Z = P.T @ L
    assert external_basis_value(Z) == pytest.approx(float(np.max(pay.flat @ Z.ravel())), abs=1e-12)
    assert external_regret(P, L) == pytest.approx(max(external_basis_value(Z), 0.0), abs=1e-12)


# ---------------------------------------------------------------- procrustes

def test_procrustes_single_round():
    assert procrustes.procrustes_regret(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])) == pytest.approx(2.0)


def test_procrustes_sampled_lower_bound_tight_for_unit_example():
    rng = np.random.default_rng(9)
    P, L = np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])
    best = max(procrustes.procrustes_value_at(P, L, haar_orthogonal(2, rng)) for _ in range(100_000))
    assert 2.0 - 1e-3 <= best <= 2.0 + 1e-12


def test_procrustes_zero_actions():
    assert procrustes.procrustes_regret(np.zeros((5, 3)), np.ones((5, 3))) == 0.0


def test_procrustes_regret_dominates_samples():
    rng = np.random.default_rng(10)
    P = rng.normal(size=(6, 2))
    P /= np.maximum(1, np.linalg.norm(P, axis=1, keepdims=True))
    L = rng.uniform(-1, 1, size=(6, 2))
    exact = procrustes.procrustes_regret(P, L)
    assert exact >= procrustes.procrustes_value_at(P, L, np.eye(2)) - 1e-12
    samples = [procrustes.procrustes_value_at(P, L, haar_orthogonal(2, rng)) for _ in range(10_000)]
    assert max(samples) <= exact + 1e-12


def test_procrustes_basis_value_matches_regret():
    rng = np.random.default_rng(11)
    P, L = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    assert procrustes.procrustes_basis_value(P.T @ L) == pytest.approx(
        procrustes.procrustes_regret(P, L), abs=1e-10)


def test_procrustes_responder_examples():
    n = 3
    pref = 1.0 / np.arange(1, n + 1)
    np.testing.assert_allclose(procrustes.procrustes_responder(np.eye(n)), pref / np.linalg.norm(pref))
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(procrustes.procrustes_responder(rot), np.zeros(2))


def test_procrustes_responder_residual():
    rng = np.random.default_rng(12)
    for _ in range(20):
        w = rng.dirichlet(np.ones(3))
        Ms = [haar_orthogonal(3, rng) for _ in range(2)] + [np.eye(3)]
        M = sum(a * m for a, m in zip(w, Ms))
        p = procrustes.procrustes_responder(M)
        assert np.linalg.norm(p) <= 1 + 1e-12
        assert np.max(np.abs((np.eye(3) - M) @ p)) <= 1e-7


def test_procrustes_dual_body_projection():
    rng = np.random.default_rng(13)
    body = procrustes.procrustes_dual_body(3)
    x = body.projection(rng.normal(size=9) * 3)
    assert body.contains(x)


# ---------------------------------------------------------------- bayes

def test_bayes_dimensions():
    inst = bayes.BayesInstance.uniform(2, 2)
    assert bayes.bayes_payoff(inst).d == 64
    assert inst.dim == 4
    with pytest.raises(ConfigError):
        bayes.BayesInstance(2, 2, np.array([0.5, 0.6]))


def test_bayes_constant_loss_best_response_zero():
    inst = bayes.BayesInstance(2, 3, np.array([0.4, 0.6]))
    l = np.array([[0.5, 0.1, 0.9], [0.2, 0.7, 0.3]])
    p = np.concatenate([np.eye(3)[np.argmin(row)] for row in l])
    T = 5
    assert bayes.bayes_swap_regret(np.tile(p, (T, 1)), np.tile(l.ravel(), (T, 1)), inst) == 0.0


def test_bayes_one_type_is_swap():
    rng = np.random.default_rng(14)
    inst = bayes.BayesInstance.uniform(1, 3)
    P = rng.dirichlet(np.ones(3), size=7)
    L = rng.random((7, 3))
    assert bayes.bayes_swap_regret(P, L, inst) == pytest.approx(swap.swap_regret(P, L), abs=1e-12)


def test_bayes_matches_enumeration():
    rng = np.random.default_rng(15)
    inst = bayes.BayesInstance(2, 2, np.array([0.3, 0.7]))
    C, K, mu = 2, 2, inst.mu
    for _ in range(10):
        P = np.hstack([rng.dirichlet(np.ones(2), size=2) for _ in range(C)])
        L = rng.random((2, C * K))
        best = 0.0
        for kappa in itertools.product(range(C), repeat=C):
            for pis in itertools.product(itertools.product(range(K), repeat=K), repeat=C):
                val = 0.0
                for t in range(2):
                    for c in range(C):
                        for i in range(K):
                            val += mu[c] * (P[t, c * K + i] * L[t, c * K + i]
                                            - P[t, kappa[c] * K + i] * L[t, c * K + pis[c][i]])
                best = max(best, val)
        assert bayes.bayes_swap_regret(P, L, inst) == pytest.approx(best, abs=1e-12)


def test_bayes_responder_identity_deviation():
    inst = bayes.BayesInstance.uniform(2, 2)
    pay = bayes.bayes_payoff(inst)
    # index 0 of the enumeration is kappa = id, pi_c = (0, 0); find the all-identity deviation
    norms = np.linalg.norm(pay.flat, axis=1)
    ident = int(np.argmin(norms))
    assert norms[ident] == 0.0
    p = bayes.bayes_responder(inst)(pay.coeffs[ident])
    assert product_simplex_body(2, 2).contains(p)


def test_bayes_responder_one_type_contains_stationary():
    rng = np.random.default_rng(16)
    inst = bayes.BayesInstance.uniform(1, 2)
    pay = bayes.bayes_payoff(inst)
    theta = pay.lift_dual(rng.dirichlet(np.ones(pay.d)))
    Q = np.eye(2) - theta
    p_stat = swap.swap_responder(Q)
    # the stationary action satisfies every generator constraint of the LP responder
    assert np.all(p_stat @ theta <= 1e-12)
    p = bayes.bayes_responder(inst)(theta)
    assert np.all(p @ theta <= 1e-8)


def test_bayes_responder_random_feasibility():
    rng = np.random.default_rng(17)
    inst = bayes.BayesInstance.uniform(2, 2)
    pay = bayes.bayes_payoff(inst)
    respond = bayes.bayes_responder(inst)
    for _ in range(10):
        theta = pay.lift_dual(rng.dirichlet(np.ones(pay.d)))
        p = respond(theta)
        assert np.max(p @ theta) <= 1e-8
        assert product_simplex_body(2, 2).contains(p)


def test_bayes_basis_value_matches_payoff():
    rng = np.random.default_rng(18)
    inst = bayes.BayesInstance(2, 2, np.array([0.25, 0.75]))
    pay = bayes.bayes_payoff(inst)
    Z = rng.normal(size=(4, 4))
    assert bayes.bayes_basis_value(inst, Z) == pytest.approx(float(np.max(pay.flat @ Z.ravel())), abs=1e-12)
    np.testing.assert_allclose(bayes.bayes_center(inst), pay.lift_dual(np.full(pay.d, 1 / pay.d)), atol=1e-12)


# ---------------------------------------------------------------- cmdp

def chain_mdp(L=3, d=2):
    layers = [[i] for i in range(L + 1)]
    P = np.zeros((L + 1, 2, L + 1))
    for i in range(L):
        P[i, :, i + 1] = 1.0
    ell = np.ones((L + 1, 2, d))
    ell[L] = 0.0
    return cmdp.LayeredMdp(layers, P, ell, np.full(d, float(L)))


def test_occupancy_deterministic_chain():
    mdp = chain_mdp()
    pol = np.zeros((4, 2))
    pol[:, 0] = 1.0
    q = cmdp.occupancy_from_policy(mdp, pol)
    np.testing.assert_array_equal(q[:3, 0], 1.0)
    assert q[:, 1].sum() == 0.0


def test_occupancy_uniform_single_layer():
    P = np.zeros((2, 2, 2))
    P[0, :, 1] = 1.0
    mdp = cmdp.LayeredMdp([[0], [1]], P, np.zeros((2, 2, 1)), np.zeros(1))
    q = cmdp.occupancy_from_policy(mdp, np.full((2, 2), 0.5))
    np.testing.assert_allclose(q[0], [0.5, 0.5])


def test_occupancy_flow_conservation():
    rng = np.random.default_rng(19)
    mdp, pol = cmdp.random_layered_mdp([3, 2, 3], 3, 4, rng)
    q = cmdp.occupancy_from_policy(mdp, pol)
    for layer in mdp.layers[:-1]:
        assert q[layer].sum() == pytest.approx(1.0, abs=1e-9)
    inflow = np.einsum("xa,xay->y", q, mdp.transitions)
    for layer in mdp.layers[1:-1]:
        for y in layer:
            assert q[y].sum() == pytest.approx(inflow[y], abs=1e-9)


def test_malformed_policy_rejected():
    with pytest.raises(ConfigError):
        cmdp.occupancy_from_policy(chain_mdp(), np.full((4, 2), 0.7))


def test_best_response_single_decision():
    P = np.zeros((2, 2, 2))
    P[0, :, 1] = 1.0
    ell = np.zeros((2, 2, 1))
    ell[0, :, 0] = [0.7, 0.2]
    mdp = cmdp.LayeredMdp([[0], [1]], P, ell, np.zeros(1))
    pol = cmdp.best_response(mdp, np.ones(1))
    np.testing.assert_array_equal(pol[0], [0, 1])


def test_best_response_tie_break_lowest_index():
    mdp = chain_mdp()
    pol = cmdp.best_response(mdp, np.zeros(mdp.d))
    np.testing.assert_array_equal(pol[:3, 0], 1.0)


def test_best_response_matches_enumeration():
    rng = np.random.default_rng(20)
    for _ in range(5):
        mdp, _ = cmdp.random_layered_mdp([2, 2], 2, 3, rng)
        w = rng.normal(size=3)
        val = lambda pol: float(cmdp.expected_losses(mdp, cmdp.occupancy_from_policy(mdp, pol)) @ w)
        brute = min(val(pol) for pol in enumerate_policies(mdp))
        assert val(cmdp.best_response(mdp, w)) == pytest.approx(brute, abs=1e-12)


def test_best_response_noise_gap():
    rng = np.random.default_rng(21)
    mdp, _ = cmdp.random_layered_mdp([2, 2], 2, 3, rng)
    for _ in range(20):
        w = rng.random(3)
        val = lambda pol: float(cmdp.expected_losses(mdp, cmdp.occupancy_from_policy(mdp, pol)) @ w)
        assert val(cmdp.best_response(mdp, w, eps0=0.3, rng=rng)) <= val(cmdp.best_response(mdp, w)) + 0.3


def test_est_oracle_chain_exact():
    mdp = chain_mdp()
    pol = np.zeros((4, 2))
    pol[:, 1] = 1.0
    np.testing.assert_allclose(cmdp.est_oracle(mdp, pol), [3.0, 3.0])


def test_est_oracle_monte_carlo():
    rng = np.random.default_rng(22)
    mdp, pol = cmdp.random_layered_mdp([2, 3], 2, 4, rng)
    exact = cmdp.est_oracle(mdp, pol)
    mean, se = cmdp.rollout_mean(mdp, pol, 100_000, rng)
    assert np.all(np.abs(mean - exact) <= 3 * se)


def test_est_oracle_noise_contract():
    rng = np.random.default_rng(23)
    mdp, pol = cmdp.random_layered_mdp([2, 3], 2, 4, rng)
    exact = cmdp.est_oracle(mdp, pol)
    for _ in range(50):
        z = cmdp.est_oracle(mdp, pol, eps1=0.1, rng=rng)
        assert np.all(np.abs(z - exact) <= 0.1 + 1e-12)
        assert np.all((z >= 0) & (z <= mdp.L))


def test_cmdp_single_round_violation_bounded():
    from approachability.harness.mdp_io import shipped_instance
    mdp = shipped_instance()
    assert cmdp.cmdp_feasibility_run(mdp, 1).final_violation <= mdp.L


def test_cmdp_feasibility_run_occupancies_valid():
    rng = np.random.default_rng(24)
    mdp, _ = cmdp.random_layered_mdp([2, 2], 2, 3, rng, margin=0.05)
    run = cmdp.cmdp_feasibility_run(mdp, 200)
    for q in run.occupancies[::20]:
        for layer in mdp.layers[:-1]:
            assert q[layer].sum() == pytest.approx(1.0, abs=1e-9)
    assert run.final_violation <= cmdp.violation_bound(mdp, 200) + 0.05


def test_layered_mdp_validation():
    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = 0.5
    with pytest.raises(ConfigError):
        cmdp.LayeredMdp([[0], [1]], P, np.zeros((2, 1, 1)), np.zeros(1))
    P[0, 0, 1] = 1.0
    with pytest.raises(ConfigError):
        cmdp.LayeredMdp([[0], [1]], P, np.full((2, 1, 1), 2.0), np.zeros(1))


def test_procrustes_run_is_not_degenerate():
    from approachability.harness.runner import ExperimentConfig, run_experiment
    tr = run_experiment(ExperimentConfig(app="procrustes", n=3, T=300, seed=0))
    assert np.abs(tr.run.actions).sum() > 0
    assert tr.regret[-1] == pytest.approx(tr.summary["offline_regret"], abs=1e-6)
