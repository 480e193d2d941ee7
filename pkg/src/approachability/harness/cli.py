"""Command line entry point: `approach run ...`, `approach verify ...`, `approach selfplay ...`."""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from ..apps.bayes import BayesInstance
from ..errors import AdversaryExhausted, ConfigError, SeparabilityViolation, SolverFailure
from .runner import ADVERSARIES, ALGOS, APPS, ExperimentConfig, run_experiment

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approach", description="Approachability-based regret minimization")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one seeded experiment")
    run.add_argument("--app", choices=APPS, required=True)
    run.add_argument("--algo", choices=ALGOS, default="pseudo-quadratic")
    run.add_argument("--adversary", choices=ADVERSARIES, default="iid")
    run.add_argument("--t", dest="T", type=int, required=True, help="horizon")
    run.add_argument("--k", dest="K", type=int, default=2, help="actions (external, swap, bayes)")
    run.add_argument("--c", dest="C", type=int, default=2, help="types (bayes)")
    run.add_argument("--n", dest="n", type=int, default=2, help="dimension (procrustes)")
    run.add_argument("--mdp", help="MDP instance file (cmdp); defaults to the shipped instance")
    run.add_argument("--loss-file", help="whitespace-separated loss table for --adversary fixed")
    run.add_argument("--eps0", type=float, default=0.0, help="best-response noise (cmdp)")
    run.add_argument("--eps1", type=float, default=0.0, help="estimation noise (cmdp)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trace", help="CSV trace output path")
    run.add_argument("--summary", help="JSON summary output path")

    ver = sub.add_parser("verify", help="run invariant batteries")
    ver.add_argument("--suite", action="append", required=True,
                     help="suite name (repeatable) or 'all': duality, dualset, equivalence, maxent, "
                          "rates, cmdp, bruteforce, complexity")

    sp = sub.add_parser("selfplay", help="two-player Bayesian self-play on the toy game")
    sp.add_argument("--t", dest="T", type=int, default=4096)
    sp.add_argument("--k", dest="K", type=int, default=2)
    sp.add_argument("--c", dest="C", type=int, default=2)
    return parser


def _cmd_run(args) -> int:
    cfg = ExperimentConfig(app=args.app, T=args.T, algo=args.algo, adversary=args.adversary, seed=args.seed,
                           K=args.K, C=args.C, n=args.n, mdp=args.mdp, loss_file=args.loss_file,
                           trace=args.trace, summary=args.summary, eps0=args.eps0, eps1=args.eps1)
    trace = run_experiment(cfg)
    if not args.summary:
        print(json.dumps(trace.summary, indent=2, sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    from .verify import SUITES
    names: List[str] = []
    for name in args.suite:
        names.extend(SUITES if name == "all" else [name])
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {list(SUITES)} or 'all'", field="suite")
    ok = True
    for name in names:
        res = SUITES[name]()
        print(res.report(), flush=True)
        ok &= res.passed
    return 0 if ok else 1


def _cmd_selfplay(args) -> int:
    from .selfplay import selfplay_bce, toy_game
    inst = BayesInstance.uniform(args.C, args.K)
    rep = selfplay_bce(inst, toy_game(args.C, args.K), args.T)
    print(json.dumps({"regrets": rep.regrets, "gap": rep.gap, "target": rep.target(inst)}, indent=2))
    return 0 if rep.gap <= rep.target(inst) else 1


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "verify": _cmd_verify, "selfplay": _cmd_selfplay}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error [{exc.field}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, SeparabilityViolation, AdversaryExhausted) as exc:
        where = getattr(exc, "round_index", None)
        print(f"run failed at round {where}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
