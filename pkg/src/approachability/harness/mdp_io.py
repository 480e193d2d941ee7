"""Line-oriented text format for layered MDP instances.

    # comment
    layer x0
    layer s1 s2
    layer end
    trans s1 0 end 1.0
    loss s1 0 3 0.25
    thresh 3 1.5

`layer` lines list state names in order (first: the start state, last: the
terminal state).  Actions and constraint indices are 0-based integers; loss
entries not given are 0.
"""
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from ..apps.cmdp import LayeredMdp
from ..errors import ConfigError


def parse_mdp(text: str) -> LayeredMdp:
    layers, trans, losses, thresh = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "layer":
                layers.append(tok[1:])
            elif kind == "trans":
                trans.append((tok[1], int(tok[2]), tok[3], float(tok[4])))
            elif kind == "loss":
                losses.append((tok[1], int(tok[2]), int(tok[3]), float(tok[4])))
            elif kind == "thresh":
                thresh.append((int(tok[1]), float(tok[2])))
            else:
                raise ConfigError(f"line {lineno}: unknown record {kind!r}", field="mdp")
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: malformed {kind!r} record", field="mdp") from exc
    names = [s for layer in layers for s in layer]
    if len(set(names)) != len(names):
        raise ConfigError("state names must be unique", field="mdp")
    index = {s: i for i, s in enumerate(names)}

    def state(name):
        if name not in index:
            raise ConfigError(f"unknown state {name!r}", field="mdp")
        return index[name]

    if not trans or not thresh:
        raise ConfigError("instance needs trans and thresh records", field="mdp")
    A = 1 + max(a for _, a, _, _ in trans)
    d = 1 + max(i for i, _ in thresh)
    S = len(names)
    P = np.zeros((S, A, S))
    for x, a, y, pr in trans:
        P[state(x), a, state(y)] += pr
    terminal = state(layers[-1][0])
    P[terminal, :, terminal] = 0.0
    ell = np.zeros((S, A, d))
    for x, a, i, v in losses:
        if i >= d:
            raise ConfigError(f"loss index {i} has no threshold", field="mdp")
        ell[state(x), a, i] = v
    c = np.zeros(d)
    for i, v in thresh:
        c[i] = v
    layer_idx = [[index[s] for s in layer] for layer in layers]
    return LayeredMdp(layer_idx, P, ell, c, names=names)


def load_mdp(path: Union[str, Path]) -> LayeredMdp:
    return parse_mdp(Path(path).read_text())


def dump_mdp(mdp: LayeredMdp) -> str:
    names = mdp.names or [f"s{i}" for i in range(mdp.n_states)]
    out = []
    for layer in mdp.layers:
        out.append("layer " + " ".join(names[x] for x in layer))
    for x in mdp.decision_states():
        for a in range(mdp.n_actions):
            for y in np.flatnonzero(mdp.transitions[x, a]):
                out.append(f"trans {names[x]} {a} {names[y]} {float(mdp.transitions[x, a, y])!r}")
    for x in mdp.decision_states():
        for a in range(mdp.n_actions):
            for i in np.flatnonzero(mdp.losses[x, a]):
                out.append(f"loss {names[x]} {a} {i} {float(mdp.losses[x, a, i])!r}")
    for i, v in enumerate(mdp.thresholds):
        out.append(f"thresh {i} {float(v)!r}")
    return "\n".join(out) + "\n"


def shipped_instance() -> LayeredMdp:
    """The small feasible instance bundled with the package."""
    return load_mdp(Path(__file__).resolve().parent.parent / "data" / "cmdp_small.txt")
