import json
import math

import numpy as np
import pytest

from approachability.apps import bayes, cmdp
from approachability.apps.external import external_basis_value
from approachability.errors import AdversaryExhausted, ConfigError
from approachability.harness import cli
from approachability.harness.adversaries import AdaptiveWorst, FixedSequence, IidUniform
from approachability.harness.mdp_io import dump_mdp, load_mdp, parse_mdp, shipped_instance
from approachability.harness.runner import TRACE_HEADER, ExperimentConfig, RunTrace, run_experiment
from approachability.harness.selfplay import player_losses, selfplay_bce, toy_game
from approachability.harness.verify import smoothed


# ---------------------------------------------------------------- config

@pytest.mark.parametrize("overrides, field", [
    (dict(app="swap", K=1), "K"),
    (dict(app="bogus"), "app"),
    (dict(app="swap", T=0), "T"),
    (dict(app="external", algo="pseudo-maxent"), "algo"),
    (dict(app="swap", K=16, algo="linf-negentropy"), "algo"),
    (dict(app="procrustes", algo="linf-negentropy"), "algo"),
    (dict(app="swap", adversary="fixed"), "loss_file"),
    (dict(app="cmdp", eps1=-0.1, algo="linf-negentropy"), "eps1"),
])
def test_config_validation_names_field(overrides, field):
    cfg = ExperimentConfig(**{"T": 10, **overrides})
    with pytest.raises(ConfigError) as info:
        cfg.validate()
    assert info.value.field == field


def test_explicit_dimension():
    assert ExperimentConfig(app="swap", T=1, K=3).explicit_dim() == 27
    assert ExperimentConfig(app="external", T=1, K=4).explicit_dim() == 4
    assert ExperimentConfig(app="swap", T=1, K=16).explicit_dim() > 1e6


# ---------------------------------------------------------------- determinism and traces

def test_swap_trace_byte_identical(tmp_path):
    paths = []
    for i in range(2):
        path = tmp_path / f"trace{i}.csv"
        run_experiment(ExperimentConfig(app="swap", K=3, T=4096, algo="pseudo-maxent", seed=7, trace=str(path)))
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text().splitlines()[0] == TRACE_HEADER


def test_seed_changes_trace():
    a = run_experiment(ExperimentConfig(app="external", K=3, T=50, seed=1))
    b = run_experiment(ExperimentConfig(app="external", K=3, T=50, seed=2))
    assert a.csv_text() != b.csv_text()


@pytest.mark.parametrize("cfg", [
    ExperimentConfig(app="external", K=3, T=200, algo="linf-negentropy"),
    ExperimentConfig(app="external", K=3, T=200),
    ExperimentConfig(app="swap", K=3, T=200, algo="pseudo-maxent"),
    ExperimentConfig(app="swap", K=3, T=200),
    ExperimentConfig(app="swap", K=2, T=200, algo="linf-negentropy"),
    ExperimentConfig(app="procrustes", n=2, T=200),
    ExperimentConfig(app="bayes", C=2, K=2, T=60),
], ids=lambda c: f"{c.app}-{c.algo}")
def test_trace_regret_matches_offline_oracle(cfg):
    tr = run_experiment(cfg)
    run = tr.run
    assert tr.regret[-1] == pytest.approx(tr.summary["offline_regret"], abs=1e-6)
    # spot-check prefixes as well
    setup_regret = {
        "external": lambda P, L: max(external_basis_value(P.T @ L), 0.0),
    }.get(cfg.app)
    if setup_regret:
        for t in (1, 17, 100):
            assert tr.regret[t - 1] == pytest.approx(setup_regret(run.actions[:t], run.losses[:t]), abs=1e-6)


def test_summary_recomputable_from_rows(tmp_path):
    trace, summary = tmp_path / "t.csv", tmp_path / "s.json"
    run_experiment(ExperimentConfig(app="swap", K=2, T=300, seed=3, trace=str(trace), summary=str(summary)))
    rows = RunTrace.read_csv(str(trace))
    info = json.loads(summary.read_text())
    np.testing.assert_array_equal(rows[:, 0], np.arange(1, 301))
    assert info["final_regret"] == rows[-1, 1]
    assert info["rate_constant"] == pytest.approx(rows[-1, 1] / math.sqrt(300), rel=1e-15)
    assert info["max_residual"] == rows[:, 4].max()
    np.testing.assert_allclose(rows[:, 2], rows[:, 1] / rows[:, 0], rtol=1e-15)
    assert info["config"]["seed"] == 3 and info["wall_time"] >= 0


def test_cmdp_violation_trend_decreasing():
    tr = run_experiment(ExperimentConfig(app="cmdp", T=4096, algo="linf-negentropy"))
    curve = smoothed(tr.distance, 64)
    checkpoints = curve[[64 * (2 ** k - 1) for k in range(7)]]
    assert np.all(np.diff(checkpoints) <= 0)
    slope = np.polyfit(np.log(np.arange(64, 4097)), curve, 1)[0]
    assert slope < 0
    assert tr.summary["final_violation"] <= tr.summary["violation_bound"] + 0.05


# ---------------------------------------------------------------- adversaries

def test_fixed_sequence_replays_file(tmp_path):
    table = np.random.default_rng(0).random((5, 3))
    path = tmp_path / "losses.txt"
    np.savetxt(path, table, fmt="%.17g")
    adv = FixedSequence.from_file(path, m=3)
    out = np.array([adv(t, None) for t in range(5)])
    np.testing.assert_array_equal(out, table)
    with pytest.raises(AdversaryExhausted) as info:
        adv(5, None)
    assert info.value.round_index == 5


def test_fixed_sequence_rejects_bad_files(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(ConfigError):
        FixedSequence.from_file(empty)
    wide = tmp_path / "wide.txt"
    wide.write_text("0 1 0\n")
    with pytest.raises(ConfigError):
        FixedSequence.from_file(wide, m=2)


def test_adaptive_external_picks_regret_vertex():
    adv = AdaptiveWorst(np.zeros(2), np.ones(2), lambda Z: max(external_basis_value(Z), 0.0))
    np.testing.assert_array_equal(adv(0, np.array([1.0, 0.0])), [1.0, 0.0])


def test_iid_uniform_within_box():
    adv = IidUniform(np.zeros(4), np.ones(4), np.random.default_rng(0))
    draws = np.array([adv(t, None) for t in range(2000)])
    assert draws.min() >= 0 and draws.max() <= 1
    assert abs(draws.mean() - 0.5) < 0.02


def test_fixed_adversary_through_runner(tmp_path):
    path = tmp_path / "l.txt"
    path.write_text("1 0\n0 1\n1 0\n")
    tr = run_experiment(ExperimentConfig(app="external", K=2, T=3, adversary="fixed", loss_file=str(path)))
    np.testing.assert_array_equal(tr.run.losses, [[1, 0], [0, 1], [1, 0]])
    with pytest.raises(AdversaryExhausted):
        run_experiment(ExperimentConfig(app="external", K=2, T=4, adversary="fixed", loss_file=str(path)))


# ---------------------------------------------------------------- mdp files

def test_mdp_round_trip():
    mdp = shipped_instance()
    again = parse_mdp(dump_mdp(mdp))
    assert again.layers == mdp.layers
    np.testing.assert_array_equal(again.transitions, mdp.transitions)
    np.testing.assert_array_equal(again.losses, mdp.losses)
    np.testing.assert_array_equal(again.thresholds, mdp.thresholds)


def test_shipped_instance_shape_and_feasibility():
    from scipy.optimize import linprog

    from approachability.harness.verify import enumerate_policies
    mdp = shipped_instance()
    assert (mdp.L, mdp.n_states, mdp.n_actions, mdp.d) == (3, 6, 2, 10)
    # the feasible policy may be stochastic, so look for a feasible mixture of deterministic ones
    slack = np.array([cmdp.expected_losses(mdp, cmdp.occupancy_from_policy(mdp, pol)) - mdp.thresholds
                      for pol in enumerate_policies(mdp)])
    k = slack.shape[0]
    res = linprog(np.r_[np.zeros(k), 1.0], A_ub=np.c_[slack.T, -np.ones(mdp.d)], b_ub=np.zeros(mdp.d),
                  A_eq=np.r_[np.ones(k), 0.0][None], b_eq=[1.0], bounds=[(0, None)] * k + [(None, None)])
    assert res.status == 0 and res.fun <= 0


def test_mdp_parse_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_mdp("layer s0\nlayer s1\ntrans s0 0 s1 0.5\nthresh 0 1\n")
    with pytest.raises(ConfigError):
        parse_mdp("bogus record\n")
    path = tmp_path / "m.txt"
    path.write_text(dump_mdp(shipped_instance()))
    assert load_mdp(path).d == 10


# ---------------------------------------------------------------- self-play

def test_selfplay_gap_meets_target():
    inst = bayes.BayesInstance.uniform(2, 2)
    rep = selfplay_bce(inst, toy_game(2, 2), 4096)
    assert rep.gap <= rep.target(inst)


def test_selfplay_single_round_bounded():
    inst = bayes.BayesInstance.uniform(2, 2)
    util = toy_game(2, 2)
    rep = selfplay_bce(inst, util, 1)
    assert rep.gap <= util.max() - util.min()


def test_selfplay_zero_game():
    inst = bayes.BayesInstance.uniform(2, 2)
    rep = selfplay_bce(inst, np.zeros((2, 2, 2, 2, 2)), 64)
    assert rep.gap == 0.0


def test_player_losses_are_one_minus_expected_utility():
    inst = bayes.BayesInstance.uniform(2, 2)
    util = toy_game(2, 2)
    rng = np.random.default_rng(0)
    strategies = np.stack([np.concatenate([rng.dirichlet(np.ones(2)) for _ in range(2)]) for _ in range(2)])
    losses = player_losses(inst, util, strategies)
    # brute force for player 0, type 1, action 0
    s1 = strategies[1].reshape(2, 2)
    expect = sum(inst.mu[c1] * s1[c1, a1] * util[0, 1, c1, 0, a1] for c1 in range(2) for a1 in range(2))
    assert losses[0].reshape(2, 2)[1, 0] == pytest.approx(1 - expect, abs=1e-12)


# ---------------------------------------------------------------- cli

def test_cli_config_error_exit_code(capsys):
    assert cli.main(["run", "--app", "swap", "--k", "1", "--t", "10"]) == 2
    assert "[K]" in capsys.readouterr().err


def test_cli_linf_guard(capsys):
    assert cli.main(["run", "--app", "swap", "--k", "16", "--t", "10", "--algo", "linf-negentropy"]) == 2
    assert "[algo]" in capsys.readouterr().err


def test_cli_exhausted_file_exit_code(tmp_path, capsys):
    path = tmp_path / "l.txt"
    path.write_text("1 0\n0 1\n")
    code = cli.main(["run", "--app", "external", "--t", "5", "--adversary", "fixed", "--loss-file", str(path)])
    assert code == 3
    assert "round 2" in capsys.readouterr().err


def test_cli_run_writes_files(tmp_path):
    trace, summary = tmp_path / "t.csv", tmp_path / "s.json"
    code = cli.main(["run", "--app", "swap", "--k", "3", "--t", "64", "--algo", "pseudo-maxent",
                     "--seed", "7", "--trace", str(trace), "--summary", str(summary)])
    assert code == 0
    assert len(trace.read_text().splitlines()) == 65
    assert json.loads(summary.read_text())["config"]["algo"] == "pseudo-maxent"


def test_cli_verify_unknown_suite(capsys):
    assert cli.main(["verify", "--suite", "nonsense"]) == 2


def test_cli_verify_passing_suite(capsys):
    assert cli.main(["verify", "--suite", "maxent"]) == 0
    assert "maxent" in capsys.readouterr().out
