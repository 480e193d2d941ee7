"""Config validation, per-application setup and seeded experiment runs."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np

from ..approach import LINF_DIM_GUARD, ApproachRun, linf_run, pseudonorm_run
from ..convex import hull_body
from ..errors import ConfigError
from ..olo import closed_form_learner, learning_rate, quadratic_learner
from ..apps import bayes, cmdp, external, procrustes, swap
from .adversaries import AdaptiveWorst, FixedSequence, IidUniform
from .mdp_io import load_mdp, shipped_instance

APPS = ("external", "swap", "procrustes", "bayes", "cmdp")
ALGOS = ("linf-negentropy", "pseudo-quadratic", "pseudo-maxent")
ADVERSARIES = ("iid", "fixed", "adaptive")
TRACE_HEADER = "t,regret,distance,dual_norm,residual"


@dataclass
class ExperimentConfig:
    app: str
    T: int
    algo: str = "pseudo-quadratic"
    adversary: str = "iid"
    seed: int = 0
    K: int = 2
    C: int = 2
    n: int = 2
    mdp: Optional[str] = None
    loss_file: Optional[str] = None
    trace: Optional[str] = None
    summary: Optional[str] = None
    eps0: float = 0.0
    eps1: float = 0.0

    def explicit_dim(self) -> float:
        """d for the explicit path, as a float so huge values do not overflow."""
        if self.app == "external":
            return float(self.K)
        if self.app == "swap":
            return float(self.K) ** self.K
        if self.app == "bayes":
            return float(self.C) ** self.C * float(self.K) ** (self.K * self.C)
        if self.app == "procrustes":
            return math.inf
        return float("nan")

    def validate(self) -> "ExperimentConfig":
        if self.app not in APPS:
            raise ConfigError(f"unknown application {self.app!r}; choose from {APPS}", field="app")
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algorithm {self.algo!r}; choose from {ALGOS}", field="algo")
        if self.adversary not in ADVERSARIES:
            raise ConfigError(f"unknown adversary {self.adversary!r}; choose from {ADVERSARIES}",
                              field="adversary")
        if not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ConfigError(f"horizon must be a positive integer, got T={self.T}", field="T")
        if self.app in ("external", "swap", "bayes") and self.K < 2:
            raise ConfigError(f"need K >= 2, got K={self.K}", field="K")
        if self.app == "bayes" and self.C < 1:
            raise ConfigError(f"need C >= 1, got C={self.C}", field="C")
        if self.app == "procrustes" and self.n < 1:
            raise ConfigError(f"need n >= 1, got n={self.n}", field="n")
        if self.eps0 < 0 or self.eps1 < 0:
            raise ConfigError("oracle noise levels must be nonnegative", field="eps0" if self.eps0 < 0 else "eps1")
        if self.algo == "pseudo-maxent" and self.app != "swap":
            raise ConfigError(f"no maximum-entropy regularizer is available for {self.app}", field="algo")
        if self.app == "cmdp":
            if self.algo != "linf-negentropy":
                raise ConfigError("cmdp runs only on the linf-negentropy path", field="algo")
            if self.adversary != "iid":
                raise ConfigError("cmdp losses come from the MDP; no adversary option applies", field="adversary")
        elif self.algo == "linf-negentropy" and self.explicit_dim() > LINF_DIM_GUARD:
            raise ConfigError(f"explicit dimension d={self.explicit_dim():.3g} exceeds {LINF_DIM_GUARD}; "
                              "use a pseudonorm path", field="algo")
        if self.app == "procrustes" and self.algo != "pseudo-quadratic":
            raise ConfigError("procrustes runs only on the pseudo-quadratic path", field="algo")
        if self.adversary == "fixed" and not self.loss_file:
            raise ConfigError("the fixed adversary needs a loss file", field="loss_file")
        return self


@dataclass
class RunTrace:
    """Per-round rows plus a summary; `summary` is recomputable from the rows."""
    t: np.ndarray
    regret: np.ndarray
    distance: np.ndarray
    dual_norm: np.ndarray
    residual: np.ndarray
    summary: Dict = field(default_factory=dict)
    run: Optional[object] = field(default=None, repr=False)

    def csv_text(self) -> str:
        lines = [TRACE_HEADER]
        for row in zip(self.t, self.regret, self.distance, self.dual_norm, self.residual):
            t, rest = int(row[0]), [repr(float(v)) for v in row[1:]]
            lines.append(",".join([str(t)] + rest))
        return "\n".join(lines) + "\n"

    def write(self, trace: Optional[str] = None, summary: Optional[str] = None) -> None:
        if trace:
            Path(trace).write_text(self.csv_text())
        if summary:
            Path(summary).write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def read_csv(path: str) -> np.ndarray:
        return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


@dataclass
class Setup:
    """Everything a run needs once the config is resolved."""
    run: Callable[[Callable], ApproachRun]
    offline_regret: Callable[[np.ndarray, np.ndarray], float]
    loss_lo: np.ndarray
    loss_hi: np.ndarray
    score: Callable[[np.ndarray], float]


def _linf(payoff, responder, T):
    return lambda adv: linf_run(payoff, adv, T, responder)


def _pseudo(bundle, learner, responder, T):
    return lambda adv: pseudonorm_run(bundle, adv, T, learner, responder)


def build_setup(cfg: ExperimentConfig) -> Setup:
    T = cfg.T
    if cfg.app == "external":
        K = cfg.K
        bundle = external.external_bundle(K)
        if cfg.algo == "linf-negentropy":
            run = _linf(external.external_payoff(K), external.external_responder, T)
        else:
            eta = learning_rate("quadratic", T, D_x=math.sqrt(2.0 * K), D_y=math.sqrt(K))
            learner = quadratic_learner(external.external_dual_body(K), bundle.center, eta)
            run = _pseudo(bundle, learner, external.external_responder, T)
        return Setup(run, external.external_regret, np.zeros(K), np.ones(K), bundle.basis_value)
    if cfg.app == "swap":
        K = cfg.K
        bundle = swap.swap_bundle(K)
        if cfg.algo == "linf-negentropy":
            run = _linf(swap.swap_payoff(K), swap.swap_basis_responder, T)
        elif cfg.algo == "pseudo-maxent":
            # same step size as the explicit path, so the two paths coincide
            eta = learning_rate("negentropy", T, D_y=1.0, log_dim=math.log(float(K) ** K + 1))
            learner = closed_form_learner(swap.swap_maxent_argmin, (K, K), eta)
            run = _pseudo(bundle, learner, swap.swap_basis_responder, T)
        else:
            eta = learning_rate("quadratic", T, D_x=swap.swap_dual_diameter(K), D_y=math.sqrt(K))
            learner = quadratic_learner(swap.swap_dual_body(K), bundle.center, eta)
            run = _pseudo(bundle, learner, swap.swap_basis_responder, T)
        return Setup(run, swap.swap_regret, np.zeros(K), np.ones(K), bundle.basis_value)
    if cfg.app == "procrustes":
        n = cfg.n
        bundle = procrustes.procrustes_bundle(n)
        eta = learning_rate("quadratic", T, D_x=2.0 * math.sqrt(n), D_y=math.sqrt(n))
        learner = quadratic_learner(procrustes.procrustes_dual_body(n), bundle.center, eta)
        run = _pseudo(bundle, learner, procrustes.procrustes_basis_responder, T)
        return Setup(run, procrustes.procrustes_regret, -np.ones(n), np.ones(n), bundle.basis_value)
    if cfg.app == "bayes":
        inst = bayes.BayesInstance.uniform(cfg.C, cfg.K)
        bundle = bayes.bayes_bundle(inst)
        responder = bayes.bayes_responder(inst)
        payoff = bayes.bayes_payoff(inst)
        if cfg.algo == "linf-negentropy":
            run = _linf(payoff, responder, T)
        else:
            eta = learning_rate("quadratic", T, D_x=payoff.dual_diameter, D_y=cfg.C * math.sqrt(cfg.K))
            learner = quadratic_learner(hull_body(payoff.flat), bundle.center, eta)
            run = _pseudo(bundle, learner, responder, T)
        return Setup(run, lambda P, L: bayes.bayes_swap_regret(P, L, inst), np.zeros(inst.dim),
                     np.ones(inst.dim), bundle.basis_value)
    raise ConfigError(f"no generic setup for {cfg.app}", field="app")


def make_adversary(cfg: ExperimentConfig, setup: Setup):
    if cfg.adversary == "iid":
        return IidUniform(setup.loss_lo, setup.loss_hi, np.random.default_rng(cfg.seed))
    if cfg.adversary == "fixed":
        return FixedSequence.from_file(cfg.loss_file, m=setup.loss_lo.size)
    return AdaptiveWorst(setup.loss_lo, setup.loss_hi, lambda Z: max(setup.score(Z), 0.0))


def _trace_from_run(run: ApproachRun) -> RunTrace:
    t = np.arange(1, run.T + 1)
    return RunTrace(t, run.regret_curve.copy(), run.regret_curve / t, run.dual_norms.copy(),
                    run.residuals.copy(), run=run)


def _cmdp_trace(cfg: ExperimentConfig) -> RunTrace:
    mdp = load_mdp(cfg.mdp) if cfg.mdp else shipped_instance()
    res = cmdp.cmdp_feasibility_run(mdp, cfg.T, cfg.eps0, cfg.eps1, seed=cfg.seed)
    t = np.arange(1, cfg.T + 1)
    dist = np.maximum(res.violations, 0.0)
    payoff = np.einsum("txa,xai->ti", res.occupancies, mdp.losses) - mdp.thresholds
    resid = np.maximum(np.einsum("ti,ti->t", res.weights[:, :mdp.d], payoff), 0.0)
    trace = RunTrace(t, dist * t, dist, np.linalg.norm(res.weights, axis=1), resid, run=res)
    trace.summary["final_violation"] = res.final_violation
    trace.summary["violation_bound"] = cmdp.violation_bound(mdp, cfg.T, cfg.eps0, cfg.eps1)
    avg = res.mixture_occupancy()
    trace.summary["offline_regret"] = cfg.T * max(float(np.max(cmdp.expected_losses(mdp, avg) - mdp.thresholds)), 0.0)
    return trace


def run_experiment(cfg: ExperimentConfig) -> RunTrace:
    """Validate, run, and write the trace/summary files named in the config."""
    cfg.validate()
    start = time.perf_counter()
    if cfg.app == "cmdp":
        trace = _cmdp_trace(cfg)
    else:
        setup = build_setup(cfg)
        run = setup.run(make_adversary(cfg, setup))
        trace = _trace_from_run(run)
        trace.summary["offline_regret"] = setup.offline_regret(run.actions, run.losses)
    wall = time.perf_counter() - start
    final = float(trace.regret[-1])
    trace.summary.update({
        "config": {k: v for k, v in asdict(cfg).items() if k not in ("trace", "summary")},
        "final_regret": final,
        "rate_constant": final / math.sqrt(cfg.T),
        "max_residual": float(np.max(trace.residual)),
        "wall_time": wall,
    })
    trace.write(cfg.trace, cfg.summary)
    return trace
